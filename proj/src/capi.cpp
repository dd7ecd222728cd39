#include "stsync.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>

#include "stsync/engine.hpp"
#include "stsync/errors.hpp"
#include "stsync/scenario.hpp"

struct stsync_scenario {
  stsync::io::Scenario scenario;
};

struct stsync_certificate {
  stsync::synthesis::DesignCertificate cert;
  std::string scenario_hash;
};

struct stsync_run {
  stsync::engine::Trajectory trajectory;
  stsync::engine::RunSummary summary;
  int n_agents = 0;
  int state_dim = 0;
};

namespace {

void set_err(char* err, size_t err_len, const std::string& message) {
  if (err && err_len > 0) {
    std::snprintf(err, err_len, "%s", message.c_str());
  }
}

template <typename Fn>
stsync_status guarded(char* err, size_t err_len, Fn&& fn) {
  try {
    fn();
    return STSYNC_OK;
  } catch (const stsync::SynthesisError& e) {
    set_err(err, err_len, e.what());
    return STSYNC_ERROR_SYNTHESIS;
  } catch (const stsync::MonitorViolation& e) {
    set_err(err, err_len, e.what());
    return STSYNC_ERROR_MONITOR;
  } catch (const std::exception& e) {
    set_err(err, err_len, e.what());
    return STSYNC_ERROR_IO;
  }
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double indexed_stat(const std::string& key, const std::string& prefix,
                    const std::vector<double>& values) {
  if (key.rfind(prefix, 0) != 0) return kNan;
  const int i = std::atoi(key.c_str() + prefix.size());
  if (i < 1 || i > static_cast<int>(values.size())) return kNan;
  return values[static_cast<size_t>(i - 1)];
}

}  // namespace

extern "C" {

const char* stsync_status_message(stsync_status status) {
  switch (status) {
    case STSYNC_OK: return "ok";
    case STSYNC_ERROR_SYNTHESIS: return "synthesis failure";
    case STSYNC_ERROR_MONITOR: return "monitor violation";
    case STSYNC_ERROR_IO: return "i/o or parse failure";
  }
  return "unknown status";
}

stsync_status stsync_scenario_load(const char* path, stsync_scenario** out,
                                   char* err, size_t err_len) {
  if (!path || !out) {
    set_err(err, err_len, "scenario_load: null argument");
    return STSYNC_ERROR_IO;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    auto handle = std::make_unique<stsync_scenario>();
    handle->scenario = stsync::io::load_scenario(path);
    *out = handle.release();
  });
}

void stsync_scenario_free(stsync_scenario* scenario) { delete scenario; }

stsync_status stsync_design(const stsync_scenario* scenario,
                            stsync_certificate** out, char* err, size_t err_len) {
  if (!scenario || !out) {
    set_err(err, err_len, "design: null argument");
    return STSYNC_ERROR_IO;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    auto handle = std::make_unique<stsync_certificate>();
    handle->cert = stsync::io::design_from_scenario(scenario->scenario);
    handle->scenario_hash = scenario->scenario.hash;
    *out = handle.release();
  });
}

stsync_status stsync_certificate_save(const stsync_certificate* cert,
                                      const char* path, char* err,
                                      size_t err_len) {
  if (!cert || !path) {
    set_err(err, err_len, "certificate_save: null argument");
    return STSYNC_ERROR_IO;
  }
  return guarded(err, err_len, [&] {
    stsync::io::save_certificate(cert->cert, cert->scenario_hash, path);
  });
}

stsync_status stsync_certificate_load(const char* path, stsync_certificate** out,
                                      char* err, size_t err_len) {
  if (!path || !out) {
    set_err(err, err_len, "certificate_load: null argument");
    return STSYNC_ERROR_IO;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    auto handle = std::make_unique<stsync_certificate>();
    auto [cert, hash] = stsync::io::load_certificate(path);
    handle->cert = std::move(cert);
    handle->scenario_hash = hash;
    *out = handle.release();
  });
}

stsync_status stsync_design_report_write(const stsync_certificate* cert,
                                         const char* path, char* err,
                                         size_t err_len) {
  if (!cert || !path) {
    set_err(err, err_len, "design_report_write: null argument");
    return STSYNC_ERROR_IO;
  }
  return guarded(err, err_len,
                 [&] { stsync::io::write_design_report(cert->cert, path); });
}

double stsync_certificate_stat(const stsync_certificate* cert, const char* key) {
  if (!cert || !key) return kNan;
  const auto& c = cert->cert;
  const std::string k = key;
  if (k == "epsilon") return c.epsilon;
  if (k == "kappa") return c.contraction.kappa;
  if (k == "lambda") return c.lambda();
  if (k == "kappa_theta") return c.plant_bound.kappa;
  if (k == "theta") return c.plant_bound.rate;
  if (k == "eta0") return c.eta0;
  if (k == "eta_bar") return c.eta_bar;
  if (k == "b_prime_norm") return c.b_prime_norm;
  if (k == "s0") return c.threshold.s0;
  if (k == "s_inf") return c.threshold.s_inf;
  if (k == "lambda_s") return c.threshold.lambda_s;
  auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  if (k.rfind("beta_", 0) == 0) return indexed_stat(k, "beta_", to_vec(c.beta));
  if (k.rfind("gamma_", 0) == 0) return indexed_stat(k, "gamma_", to_vec(c.gamma));
  if (k.rfind("tau_star_", 0) == 0) {
    return indexed_stat(k, "tau_star_", to_vec(c.tau_star));
  }
  return kNan;
}

void stsync_certificate_free(stsync_certificate* cert) { delete cert; }

stsync_status stsync_simulate(const stsync_scenario* scenario,
                              const stsync_certificate* cert,
                              const stsync_sim_options* options, stsync_run** out,
                              char* err, size_t err_len) {
  if (!scenario || !cert || !out) {
    set_err(err, err_len, "simulate: null argument");
    return STSYNC_ERROR_IO;
  }
  *out = nullptr;
  return guarded(err, err_len, [&] {
    if (cert->scenario_hash != scenario->scenario.hash) {
      throw stsync::IoError(
          "simulate: certificate was designed for a different scenario "
          "(content hash mismatch " + cert->scenario_hash + " vs " +
          scenario->scenario.hash + ")");
    }
    stsync::engine::SimConfig config =
        stsync::io::make_sim_config(scenario->scenario, cert->cert);
    if (options) {
      if (options->horizon_override > 0.0) config.horizon = options->horizon_override;
      if (options->grid_step > 0.0) config.output_step = options->grid_step;
      config.strict_monitors = options->strict_monitors != 0;
    }
    stsync::engine::Engine engine(config);
    auto handle = std::make_unique<stsync_run>();
    auto [trajectory, summary] = engine.run();
    handle->trajectory = std::move(trajectory);
    handle->summary = std::move(summary);
    handle->n_agents = scenario->scenario.n_agents;
    handle->state_dim = scenario->scenario.state_dim;
    *out = handle.release();
  });
}

stsync_status stsync_run_write_outputs(const stsync_run* run, const char* out_dir,
                                       char* err, size_t err_len) {
  if (!run || !out_dir) {
    set_err(err, err_len, "run_write_outputs: null argument");
    return STSYNC_ERROR_IO;
  }
  return guarded(err, err_len, [&] {
    std::filesystem::create_directories(out_dir);
    const std::string dir = out_dir;
    {
      std::ofstream os(dir + "/trajectory.csv", std::ios::binary);
      if (!os) throw stsync::IoError("cannot write trajectory.csv");
      stsync::engine::write_trajectory_csv(run->trajectory, run->n_agents,
                                           run->state_dim, os);
    }
    {
      std::ofstream os(dir + "/events.csv", std::ios::binary);
      if (!os) throw stsync::IoError("cannot write events.csv");
      os << "time_s,agent,access_count,next_access_time_s\n";
      char buf[128];
      for (const auto& e : run->trajectory.events) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%ld,%.17g\n", e.time, e.agent_id,
                      e.record.access_count, e.record.next_access_time);
        os << buf;
      }
    }
    {
      std::ofstream os(dir + "/summary.txt", std::ios::binary);
      if (!os) throw stsync::IoError("cannot write summary.txt");
      stsync::engine::write_summary(run->summary, os);
    }
  });
}

int stsync_run_monitors_ok(const stsync_run* run) {
  if (!run) return 0;
  return run->summary.monitors.all_ok(1e-6) ? 1 : 0;
}

double stsync_run_stat(const stsync_run* run, const char* key) {
  if (!run || !key) return kNan;
  const std::string k = key;
  const auto& s = run->summary;
  if (k == "final_error") return s.final_error;
  if (k == "epsilon") return s.epsilon;
  if (k == "settle_time") return s.settle_time;
  if (k == "limsup_tail") return s.limsup_tail;
  if (k == "lemma1_margin") return s.monitors.lemma1_margin;
  if (k == "lemma2_margin") return s.monitors.lemma2_margin;
  if (k == "repo_margin") return s.monitors.repo_margin;
  if (k.rfind("access_count_", 0) == 0) {
    std::vector<double> counts(s.access_count.begin(), s.access_count.end());
    return indexed_stat(k, "access_count_", counts);
  }
  if (k.rfind("min_interval_", 0) == 0) {
    return indexed_stat(k, "min_interval_", s.min_interval);
  }
  if (k.rfind("avg_interval_", 0) == 0) {
    return indexed_stat(k, "avg_interval_", s.avg_interval);
  }
  return kNan;
}

void stsync_run_free(stsync_run* run) { delete run; }

stsync_status stsync_report(const char* trajectory_csv, const char* events_csv,
                            const char* summary_txt, const char* out_dir,
                            char* err, size_t err_len) {
  if (!trajectory_csv || !events_csv || !summary_txt || !out_dir) {
    set_err(err, err_len, "report: null argument");
    return STSYNC_ERROR_IO;
  }
  return guarded(err, err_len, [&] {
    stsync::io::write_report_files(trajectory_csv, events_csv, summary_txt,
                                   out_dir);
  });
}

}  // extern "C"
