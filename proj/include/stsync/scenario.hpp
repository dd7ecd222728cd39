#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stsync/engine.hpp"
#include "stsync/graph.hpp"
#include "stsync/synthesis.hpp"

namespace stsync::io {

/// Flat, human-writable scenario file (key = value, '#' comments). Parsing is
/// strict: unknown keys are errors.
struct Scenario {
  int n_agents = 0;
  int state_dim = 0;
  int input_dim = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<std::pair<int, int>> edges;   // (j, i)
  synthesis::Threshold threshold;
  double varrho = 0.0;
  double eta0 = 0.0;
  Eigen::VectorXd x0;
  double horizon = 0.0;
  double output_step = 1e-3;
  double tol_t = 1e-7;
  double tol_sigma = 1e-9;
  /// Designer-chosen bound pairs (Algorithm-1 "choose"); validated at design time.
  std::optional<std::pair<double, double>> contraction_pair;  // kappa, lambda
  std::optional<std::pair<double, double>> plant_pair;        // kappa_theta, theta
  std::optional<double> epsilon_request;
  std::string out_dir;     // default output directory, overridable on the CLI
  /// FNV-1a 64 of the scenario file bytes.
  std::string hash;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

std::string fnv1a_hex(const std::string& bytes);

/// Certificate file: key = value with full-precision decimals, bound to the
/// scenario content hash.
void save_certificate(const synthesis::DesignCertificate& cert,
                      const std::string& scenario_hash, const std::string& path);
std::pair<synthesis::DesignCertificate, std::string> load_certificate(
    const std::string& path);

/// Human-readable design report (gain, bound pairs, per-agent constants).
void write_design_report(const synthesis::DesignCertificate& cert,
                         const std::string& path);

engine::SimConfig make_sim_config(const Scenario& scenario,
                                  const synthesis::DesignCertificate& cert);

synthesis::DesignCertificate design_from_scenario(const Scenario& scenario);

/// Plot-ready aggregates from simulate outputs: delta-vs-epsilon table,
/// per-agent state table, and the access raster over the last three seconds.
void write_report_files(const std::string& trajectory_csv,
                        const std::string& events_csv,
                        const std::string& summary_txt,
                        const std::string& out_dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace stsync::io
