#include "stsync/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>

#include "stsync/errors.hpp"
#include "stsync/numerics.hpp"

namespace stsync::engine {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Engine::Engine(SimConfig config)
    : config_(std::move(config)), repo_(config_.graph) {
  const int n_agents = config_.graph.n_agents;
  const int n = config_.dynamics.n;
  if (config_.x0.size() != static_cast<Eigen::Index>(n_agents) * n) {
    throw SynthesisError("engine: x0 must stack N states of dimension n");
  }
  if (!(config_.horizon > 0.0) || !(config_.output_step > 0.0)) {
    throw SynthesisError("engine: horizon and output_step must be positive");
  }
  x_.resize(static_cast<size_t>(n_agents));
  u_.resize(static_cast<size_t>(n_agents));
  next_access_.assign(static_cast<size_t>(n_agents), 0.0);
  for (int i = 0; i < n_agents; ++i) {
    x_[static_cast<size_t>(i)] = config_.x0.segment(i * n, n);
    u_[static_cast<size_t>(i)] = Eigen::VectorXd::Zero(config_.dynamics.m);
  }
}

void Engine::initialize() {
  const int n_agents = config_.graph.n_agents;

  phi_ = graph::spectral(config_.graph).phi;

  // ||delta(0)|| < eta0 is the admissibility condition of the problem.
  Eigen::VectorXd alpha0 = Eigen::VectorXd::Zero(config_.dynamics.n);
  for (int i = 0; i < n_agents; ++i) {
    alpha0 += phi_(i) * x_[static_cast<size_t>(i)];
  }
  double acc = 0.0;
  for (int i = 0; i < n_agents; ++i) {
    acc += (x_[static_cast<size_t>(i)] - alpha0).squaredNorm();
  }
  const double delta0_norm = std::sqrt(acc);
  if (!(delta0_norm < config_.certificate.eta0)) {
    throw SynthesisError("engine: ||delta(0)|| = " + std::to_string(delta0_norm) +
                         " must be smaller than eta0 = " +
                         std::to_string(config_.certificate.eta0));
  }

  // Pre-seed: (t=0, x_j(0), u_j=0, next=0), resolved as agents post in index order.
  for (int i = 1; i <= n_agents; ++i) {
    cloud::CloudRecord seed;
    seed.agent_id = i;
    seed.last_access_time = 0.0;
    seed.last_state = x_[static_cast<size_t>(i - 1)];
    seed.held_input = Eigen::VectorXd::Zero(config_.dynamics.m);
    seed.next_access_time = 0.0;
    seed.access_count = 0;
    repo_.seed(seed);
  }
  for (int i = 1; i <= n_agents; ++i) {
    access(i, 0.0);
  }
  // Consistency pass: with all t=0 records posted, recompute each input from
  // the exact x_j(0); the records are amended in place if anything changed.
  for (int i = 1; i <= n_agents; ++i) {
    std::vector<cloud::CloudRecord> views;
    for (int j : config_.graph.neighbors(i)) {
      views.push_back(repo_.fetch(i, j));
    }
    const Eigen::VectorXd u_new = controller::compute_input(
        views, x_[static_cast<size_t>(i - 1)], config_.certificate.gain.f,
        config_.dynamics, 0.0);
    if ((u_new - u_[static_cast<size_t>(i - 1)]).norm() > 0.0) {
      u_[static_cast<size_t>(i - 1)] = u_new;
      cloud::CloudRecord amended = repo_.fetch(i, i);
      amended.held_input = u_new;
      repo_.seed(amended);
    }
  }
  record_sample(0.0);
  initialized_ = true;
}

void Engine::propagate_to(double t) {
  const double dt = t - time_;
  if (dt < 0.0) {
    throw MonitorViolation("engine: attempted to propagate backwards");
  }
  if (dt == 0.0) return;
  for (size_t i = 0; i < x_.size(); ++i) {
    x_[i] = numerics::zoh_flow(config_.dynamics.a, config_.dynamics.b, x_[i], u_[i], dt);
  }
  time_ = t;
}

void Engine::access(int agent, double now) {
  const auto& cert = config_.certificate;
  std::vector<cloud::CloudRecord> views;
  for (int j : config_.graph.neighbors(agent)) {
    views.push_back(repo_.fetch(agent, j));
  }
  const Eigen::VectorXd& own = x_[static_cast<size_t>(agent - 1)];

  // Ground-truth consistency: the record-based reconstruction of x_j(now)
  // must match the engine's exact state.
  for (const auto& view : views) {
    const Eigen::VectorXd predicted =
        controller::predict_neighbor(view, config_.dynamics, now);
    const double err =
        (predicted - x_[static_cast<size_t>(view.agent_id - 1)]).norm();
    monitors_.ground_truth_margin = std::max(monitors_.ground_truth_margin, err);
    if (config_.strict_monitors && err > 1e-9 * (1.0 + predicted.norm())) {
      throw MonitorViolation("engine: record-based state of agent " +
                             std::to_string(view.agent_id) +
                             " deviates from ground truth by " +
                             std::to_string(err));
    }
  }

  const Eigen::VectorXd input =
      controller::compute_input(views, own, cert.gain.f, config_.dynamics, now);

  controller::PlanContext ctx;
  ctx.dyn = &config_.dynamics;
  ctx.cert = &cert;
  ctx.agent = agent;
  ctx.now = now;
  ctx.own_state = own;
  ctx.input = input;
  ctx.views = std::move(views);
  const double t_next =
      controller::next_access_time(ctx, config_.horizon, config_.tol_t);

  u_[static_cast<size_t>(agent - 1)] = input;
  next_access_[static_cast<size_t>(agent - 1)] = t_next;

  cloud::CloudRecord rec;
  rec.agent_id = agent;
  rec.last_access_time = now;
  rec.last_state = own;
  rec.held_input = input;
  rec.next_access_time = t_next;
  rec.access_count = repo_.fetch(agent, agent).access_count + 1;
  repo_.post(rec, now);

  const double repo_margin = repo_.time_consistency_margin(now);
  monitors_.repo_margin = std::max(monitors_.repo_margin, repo_margin);
  if (config_.strict_monitors && repo_margin > 1e-9) {
    throw MonitorViolation("engine: repository time consistency violated at t=" +
                           std::to_string(now));
  }
}

void Engine::record_sample(double t) {
  // Samples are strictly increasing in t; a re-sample at the same instant
  // (event on a grid point, post-access state) replaces the previous one.
  if (!trajectory_.samples.empty() && trajectory_.samples.back().t == t) {
    trajectory_.samples.pop_back();
  }
  const int n_agents = config_.graph.n_agents;
  const int n = config_.dynamics.n;
  Sample sample;
  sample.t = t;
  sample.x.resize(n_agents * n);
  for (int i = 0; i < n_agents; ++i) {
    sample.x.segment(i * n, n) = x_[static_cast<size_t>(i)];
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n_agents; ++i) {
    alpha += phi_(i) * x_[static_cast<size_t>(i)];
  }
  sample.delta.resize(n_agents * n);
  for (int i = 0; i < n_agents; ++i) {
    sample.delta.segment(i * n, n) = x_[static_cast<size_t>(i)] - alpha;
  }
  sample.delta_norm = sample.delta.norm();
  sample.eta = config_.certificate.eta_of(t);
  sample.s = config_.certificate.s_of(t);
  sample.u_err.resize(n_agents);
  for (int i = 1; i <= n_agents; ++i) {
    std::vector<Eigen::VectorXd> nbr_true;
    for (int j : config_.graph.neighbors(i)) {
      nbr_true.push_back(x_[static_cast<size_t>(j - 1)]);
    }
    sample.u_err(i - 1) = controller::input_error(
        u_[static_cast<size_t>(i - 1)], x_[static_cast<size_t>(i - 1)], nbr_true,
        config_.certificate.gain.f);
  }
  monitors_.lemma1_margin =
      std::max(monitors_.lemma1_margin, sample.delta_norm - sample.eta);
  monitors_.lemma2_margin =
      std::max(monitors_.lemma2_margin, sample.u_err.maxCoeff() - sample.s);
  if (config_.strict_monitors &&
      (monitors_.lemma1_margin > 1e-6 || monitors_.lemma2_margin > 1e-6)) {
    throw MonitorViolation("engine: lemma monitor violated at t=" + std::to_string(t));
  }
  trajectory_.samples.push_back(std::move(sample));
}

std::pair<Trajectory, RunSummary> Engine::run() {
  if (!initialized_) {
    initialize();
  }
  const int n_agents = config_.graph.n_agents;

  using Event = std::pair<double, int>;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
  for (int i = 1; i <= n_agents; ++i) {
    const double t_next = next_access_[static_cast<size_t>(i - 1)];
    if (std::isfinite(t_next)) {
      queue.push({t_next, i});
    }
  }

  double next_grid = config_.output_step;
  while (!queue.empty()) {
    const auto [t_event, agent] = queue.top();
    if (t_event > config_.horizon) break;
    queue.pop();

    while (next_grid < t_event - 1e-12) {
      propagate_to(next_grid);
      record_sample(next_grid);
      next_grid += config_.output_step;
    }
    propagate_to(t_event);
    access(agent, t_event);
    // Process any other event scheduled at the same instant before sampling.
    while (!queue.empty() && queue.top().first <= t_event) {
      const int other = queue.top().second;
      queue.pop();
      access(other, t_event);
      if (std::isfinite(next_access_[static_cast<size_t>(other - 1)])) {
        queue.push({next_access_[static_cast<size_t>(other - 1)], other});
      }
    }
    if (std::isfinite(next_access_[static_cast<size_t>(agent - 1)])) {
      queue.push({next_access_[static_cast<size_t>(agent - 1)], agent});
    }
    record_sample(t_event);
    if (std::abs(next_grid - t_event) <= 1e-12) {
      next_grid += config_.output_step;
    }
  }
  while (next_grid <= config_.horizon + 1e-12) {
    propagate_to(std::min(next_grid, config_.horizon));
    record_sample(time_);
    next_grid += config_.output_step;
  }
  if (time_ < config_.horizon) {
    propagate_to(config_.horizon);
    record_sample(config_.horizon);
  }

  trajectory_.events = repo_.access_log();
  RunSummary summary =
      summarize(trajectory_, config_.certificate, n_agents, config_.horizon);
  summary.monitors = monitors_;
  summary.monitors.zeno_free =
      monitor_zeno(summary, config_.certificate, config_.tol_t);
  summary.zeno_flag = !summary.monitors.zeno_free;
  if (config_.strict_monitors && summary.zeno_flag) {
    throw MonitorViolation("engine: inter-access interval fell below tau*");
  }
  return {trajectory_, summary};
}

double monitor_lemma1(const Trajectory& trajectory,
                      const synthesis::DesignCertificate& cert) {
  double worst = -kInf;
  for (const auto& s : trajectory.samples) {
    worst = std::max(worst, s.delta_norm - cert.eta_of(s.t));
  }
  return worst;
}

double monitor_lemma2(const Trajectory& trajectory) {
  double worst = -kInf;
  for (const auto& s : trajectory.samples) {
    if (s.u_err.size() > 0) {
      worst = std::max(worst, s.u_err.maxCoeff() - s.s);
    }
  }
  return worst;
}

bool monitor_zeno(const RunSummary& summary,
                  const synthesis::DesignCertificate& cert, double tol_t) {
  for (size_t i = 0; i < summary.min_interval.size(); ++i) {
    const double tau = cert.tau_star(static_cast<Eigen::Index>(i));
    if (std::isfinite(summary.min_interval[i]) &&
        summary.min_interval[i] < tau - tol_t) {
      return false;
    }
  }
  return true;
}

RunSummary summarize(const Trajectory& trajectory,
                     const synthesis::DesignCertificate& cert, int n_agents,
                     double horizon) {
  RunSummary s;
  s.access_count.assign(static_cast<size_t>(n_agents), 0);
  s.min_interval.assign(static_cast<size_t>(n_agents), kInf);
  s.avg_interval.assign(static_cast<size_t>(n_agents), kInf);
  std::vector<double> first(static_cast<size_t>(n_agents), 0.0);
  std::vector<double> last(static_cast<size_t>(n_agents), 0.0);
  std::vector<bool> seen(static_cast<size_t>(n_agents), false);
  for (const auto& e : trajectory.events) {
    const size_t k = static_cast<size_t>(e.agent_id - 1);
    if (seen[k]) {
      s.min_interval[k] = std::min(s.min_interval[k], e.time - last[k]);
    } else {
      first[k] = e.time;
      seen[k] = true;
    }
    last[k] = e.time;
    ++s.access_count[k];
  }
  for (size_t k = 0; k < s.access_count.size(); ++k) {
    if (s.access_count[k] > 1) {
      s.avg_interval[k] =
          (last[k] - first[k]) / static_cast<double>(s.access_count[k] - 1);
    }
  }
  s.epsilon = cert.epsilon;
  if (!trajectory.samples.empty()) {
    s.final_error = trajectory.samples.back().delta_norm;
    // First grid time after which ||delta|| stays below epsilon.
    s.settle_time = kInf;
    for (auto it = trajectory.samples.rbegin(); it != trajectory.samples.rend();
         ++it) {
      if (it->delta_norm <= cert.epsilon) {
        s.settle_time = it->t;
      } else {
        break;
      }
    }
    double tail = 0.0;
    for (const auto& sm : trajectory.samples) {
      if (sm.t >= 0.9 * horizon) {
        tail = std::max(tail, sm.delta_norm);
      }
    }
    s.limsup_tail = tail;
  }
  return s;
}

void write_trajectory_csv(const Trajectory& trajectory, int n_agents, int state_dim,
                          std::ostream& os) {
  os << "t_s";
  for (int i = 1; i <= n_agents; ++i) {
    for (int k = 1; k <= state_dim; ++k) {
      os << ",x_" << i << "_" << k;
    }
  }
  os << ",delta_norm,eta,s";
  for (int i = 1; i <= n_agents; ++i) {
    os << ",u_err_" << i;
  }
  os << "\n";
  char buf[64];
  for (const auto& sm : trajectory.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g", sm.t);
    os << buf;
    for (Eigen::Index k = 0; k < sm.x.size(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g", sm.x(k));
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g", sm.delta_norm, sm.eta,
                  sm.s);
    os << buf;
    for (Eigen::Index k = 0; k < sm.u_err.size(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g", sm.u_err(k));
      os << buf;
    }
    os << "\n";
  }
}

void write_summary(const RunSummary& summary, std::ostream& os) {
  char buf[128];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
    os << buf;
  };
  const size_t n = summary.access_count.size();
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "access_count_%zu = %ld\n", i + 1,
                  summary.access_count[i]);
    os << buf;
  }
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "min_interval_%zu = %.17g\n", i + 1,
                  summary.min_interval[i]);
    os << buf;
  }
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "avg_interval_%zu = %.17g\n", i + 1,
                  summary.avg_interval[i]);
    os << buf;
  }
  put("final_error", summary.final_error);
  put("epsilon", summary.epsilon);
  put("settle_time", summary.settle_time);
  put("limsup_tail", summary.limsup_tail);
  os << "zeno_flag = " << (summary.zeno_flag ? 1 : 0) << "\n";
  put("lemma1_margin", summary.monitors.lemma1_margin);
  put("lemma2_margin", summary.monitors.lemma2_margin);
  put("repo_margin", summary.monitors.repo_margin);
  put("ground_truth_margin", summary.monitors.ground_truth_margin);
  os << "zeno_free = " << (summary.monitors.zeno_free ? 1 : 0) << "\n";
}

}  // namespace stsync::engine
