// Batch front-end: design certificates from scenario files, run the
// closed-loop simulation, and emit plot-ready aggregates.
//
// Exit codes: 0 ok, 2 synthesis failure, 3 monitor violation, 4 i/o or
// parse failure.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "stsync.h"

namespace {

char g_err[1024];

int fail(stsync_status status) {
  std::fprintf(stderr, "error (%s): %s\n", stsync_status_message(status), g_err);
  return static_cast<int>(status);
}

struct ScenarioHandle {
  stsync_scenario* ptr = nullptr;
  ~ScenarioHandle() { stsync_scenario_free(ptr); }
};
struct CertificateHandle {
  stsync_certificate* ptr = nullptr;
  ~CertificateHandle() { stsync_certificate_free(ptr); }
};
struct RunHandle {
  stsync_run* ptr = nullptr;
  ~RunHandle() { stsync_run_free(ptr); }
};

int cmd_design(const std::string& scenario_path, const std::string& out_dir) {
  ScenarioHandle scenario;
  stsync_status st =
      stsync_scenario_load(scenario_path.c_str(), &scenario.ptr, g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  CertificateHandle cert;
  st = stsync_design(scenario.ptr, &cert.ptr, g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  const std::string cert_path = out_dir + "/certificate.txt";
  const std::string report_path = out_dir + "/design_report.txt";
  st = stsync_certificate_save(cert.ptr, cert_path.c_str(), g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);
  st = stsync_design_report_write(cert.ptr, report_path.c_str(), g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  std::printf("certificate: %s\n", cert_path.c_str());
  std::printf("report:      %s\n", report_path.c_str());
  std::printf("epsilon = %.6g, kappa = %.6g, lambda = %.6g, kappa_theta = %.6g, "
              "theta = %.6g\n",
              stsync_certificate_stat(cert.ptr, "epsilon"),
              stsync_certificate_stat(cert.ptr, "kappa"),
              stsync_certificate_stat(cert.ptr, "lambda"),
              stsync_certificate_stat(cert.ptr, "kappa_theta"),
              stsync_certificate_stat(cert.ptr, "theta"));
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& cert_path,
                 const std::string& out_dir, double horizon_override,
                 double grid_step, bool strict) {
  ScenarioHandle scenario;
  stsync_status st =
      stsync_scenario_load(scenario_path.c_str(), &scenario.ptr, g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  CertificateHandle cert;
  st = stsync_certificate_load(cert_path.c_str(), &cert.ptr, g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  stsync_sim_options options{horizon_override, grid_step, strict ? 1 : 0};
  RunHandle run;
  st = stsync_simulate(scenario.ptr, cert.ptr, &options, &run.ptr, g_err,
                       sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  st = stsync_run_write_outputs(run.ptr, out_dir.c_str(), g_err, sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);

  std::printf("outputs in %s (trajectory.csv, events.csv, summary.txt)\n",
              out_dir.c_str());
  std::printf("final ||delta|| = %.6g (epsilon = %.6g), settle_time = %.6g s\n",
              stsync_run_stat(run.ptr, "final_error"),
              stsync_run_stat(run.ptr, "epsilon"),
              stsync_run_stat(run.ptr, "settle_time"));
  if (!stsync_run_monitors_ok(run.ptr)) {
    std::fprintf(stderr, "monitor violation: lemma1 margin %.3g, lemma2 margin "
                         "%.3g, repo margin %.3g\n",
                 stsync_run_stat(run.ptr, "lemma1_margin"),
                 stsync_run_stat(run.ptr, "lemma2_margin"),
                 stsync_run_stat(run.ptr, "repo_margin"));
    return static_cast<int>(STSYNC_ERROR_MONITOR);
  }
  return 0;
}

int cmd_report(const std::string& out_dir) {
  const std::string trajectory = out_dir + "/trajectory.csv";
  const std::string events = out_dir + "/events.csv";
  const std::string summary = out_dir + "/summary.txt";
  const stsync_status st = stsync_report(trajectory.c_str(), events.c_str(),
                                         summary.c_str(), out_dir.c_str(), g_err,
                                         sizeof(g_err));
  if (st != STSYNC_OK) return fail(st);
  std::printf("reports in %s (report_delta.csv, report_states.csv, "
              "report_raster.csv)\n",
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cloud-mediated self-triggered synchronization toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, cert_path, out_dir = ".";
  double horizon_override = 0.0, grid_step = 0.0;
  bool strict = false;

  auto* design = app.add_subcommand("design", "Design a certificate from a scenario");
  design->add_option("--scenario", scenario_path, "Scenario file")->required();
  design->add_option("--out-dir", out_dir, "Output directory");

  auto* simulate = app.add_subcommand("simulate", "Run the closed loop");
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--certificate", cert_path, "Certificate file")->required();
  simulate->add_option("--out-dir", out_dir, "Output directory");
  simulate->add_option("--horizon-override", horizon_override,
                       "Simulate this horizon instead of the scenario's");
  simulate->add_option("--grid-step", grid_step, "Output sampling step");
  simulate->add_flag("--strict-monitors", strict,
                     "Abort at the first violated monitor");

  auto* report = app.add_subcommand("report", "Plot-ready aggregates from outputs");
  report->add_option("--out-dir", out_dir,
                     "Directory holding simulate outputs; reports go there too");

  CLI11_PARSE(app, argc, argv);

  if (design->parsed()) return cmd_design(scenario_path, out_dir);
  if (simulate->parsed()) {
    return cmd_simulate(scenario_path, cert_path, out_dir, horizon_override,
                        grid_step, strict);
  }
  return cmd_report(out_dir);
}
