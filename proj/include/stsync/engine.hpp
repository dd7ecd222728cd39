#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <vector>

#include "stsync/cloud.hpp"
#include "stsync/controller.hpp"
#include "stsync/graph.hpp"
#include "stsync/synthesis.hpp"

namespace stsync::engine {

struct SimConfig {
  synthesis::AgentDynamics dynamics;
  graph::AccessibilityGraph graph;
  synthesis::DesignCertificate certificate;
  Eigen::VectorXd x0;          // stacked, length N*n
  double horizon = 1.0;
  double output_step = 1e-3;
  double tol_t = 1e-7;
  double tol_sigma = 1e-9;
  /// Abort with MonitorViolation at the first violated monitor instead of
  /// recording it and continuing.
  bool strict_monitors = false;
};

struct Sample {
  double t = 0.0;
  Eigen::VectorXd x;          // stacked true state
  Eigen::VectorXd delta;      // x - 1 (x) alpha
  double delta_norm = 0.0;
  double eta = 0.0;
  double s = 0.0;
  Eigen::VectorXd u_err;      // per-agent ||u_i - z_i|| from true states
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<cloud::LogEntry> events;
};

struct MonitorReport {
  double lemma1_margin = -1.0;      // max ||delta|| - eta
  double lemma2_margin = -1.0;      // max_i ||u_err_i|| - s
  double repo_margin = -1.0;        // worst repository time-consistency margin
  double ground_truth_margin = 0.0; // worst |predicted - true| at accesses
  bool zeno_free = true;
  bool all_ok(double tol) const {
    return lemma1_margin <= tol && lemma2_margin <= tol && repo_margin <= tol &&
           zeno_free;
  }
};

struct RunSummary {
  std::vector<long> access_count;     // per agent
  std::vector<double> min_interval;   // per agent, +inf when fewer than 2 accesses
  std::vector<double> avg_interval;   // per agent, +inf when fewer than 2 accesses
  double final_error = 0.0;
  double epsilon = 0.0;
  double settle_time = 0.0;           // +inf when ||delta|| never stays below eps
  double limsup_tail = 0.0;           // sup of ||delta|| over the last 10% of the run
  bool zeno_flag = false;             // true when an interval fell below tau*
  MonitorReport monitors;
};

class Engine {
 public:
  explicit Engine(SimConfig config);

  /// Algorithm-2 initialization: every agent accesses at t = 0 in ascending
  /// index order against a pre-seeded repository, then inputs are recomputed
  /// once so each u_i(0) is built from the exact x_j(0).
  void initialize();

  /// Event loop to the horizon. Requires initialize().
  std::pair<Trajectory, RunSummary> run();

  const cloud::Repository& repository() const { return repo_; }

 private:
  void access(int agent, double now);
  void propagate_to(double t);
  void record_sample(double t);

  SimConfig config_;
  cloud::Repository repo_;
  std::vector<Eigen::VectorXd> x_;       // true states at time_
  std::vector<Eigen::VectorXd> u_;       // currently applied inputs
  std::vector<double> next_access_;
  Eigen::VectorXd phi_;
  double time_ = 0.0;
  bool initialized_ = false;
  Trajectory trajectory_;
  MonitorReport monitors_;
};

/// max over samples of ||delta(t)|| - eta(t); must stay below 1e-6.
double monitor_lemma1(const Trajectory& trajectory,
                      const synthesis::DesignCertificate& cert);

/// max over samples and agents of ||u_err_i(t)|| - s(t).
double monitor_lemma2(const Trajectory& trajectory);

/// True iff every observed inter-access interval is at least tau_i^* - tol_t
/// and the event count is finite.
bool monitor_zeno(const RunSummary& summary,
                  const synthesis::DesignCertificate& cert, double tol_t);

RunSummary summarize(const Trajectory& trajectory,
                     const synthesis::DesignCertificate& cert, int n_agents,
                     double horizon);

void write_trajectory_csv(const Trajectory& trajectory, int n_agents, int state_dim,
                          std::ostream& os);
void write_summary(const RunSummary& summary, std::ostream& os);

}  // namespace stsync::engine
