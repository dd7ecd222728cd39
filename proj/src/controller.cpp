#include "stsync/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "stsync/errors.hpp"
#include "stsync/numerics.hpp"

namespace stsync::controller {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

numerics::ExpSum mu_envelope(const synthesis::DesignCertificate& cert, int agent_j) {
  // mu_j(t) = beta_j eta(t) + s(t)
  numerics::ExpSum mu;
  mu.offset_time = cert.eta.offset_time;
  const double beta_j = cert.beta(agent_j - 1);
  for (const auto& term : cert.eta.terms) {
    mu.terms.push_back({beta_j * term.coeff, term.rate});
  }
  mu.terms.push_back({cert.threshold.s_inf, 0.0});
  mu.terms.push_back({cert.threshold.s0 - cert.threshold.s_inf,
                      cert.threshold.lambda_s});
  return mu;
}

}  // namespace

Eigen::VectorXd predict_neighbor(const cloud::CloudRecord& view_j,
                                 const synthesis::AgentDynamics& dyn, double t) {
  if (t < view_j.last_access_time) {
    throw std::invalid_argument("predict_neighbor: t precedes the record time");
  }
  const double t_zoh = std::min(t, view_j.next_access_time);
  Eigen::VectorXd x = numerics::zoh_flow(dyn.a, dyn.b, view_j.last_state,
                                         view_j.held_input,
                                         t_zoh - view_j.last_access_time);
  if (t > view_j.next_access_time) {
    x = numerics::matexp(dyn.a, t - view_j.next_access_time) * x;
  }
  return x;
}

Eigen::VectorXd compute_input(const std::vector<cloud::CloudRecord>& views,
                              const Eigen::VectorXd& own_state,
                              const Eigen::MatrixXd& f,
                              const synthesis::AgentDynamics& dyn, double now) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dyn.n);
  for (const auto& view : views) {
    sum += predict_neighbor(view, dyn, now) - own_state;
  }
  return f * sum;
}

double trigger_f(const PlanContext& ctx, double t) {
  const auto& dyn = *ctx.dyn;
  const Eigen::VectorXd own =
      numerics::zoh_flow(dyn.a, dyn.b, ctx.own_state, ctx.input, t - ctx.now);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dyn.n);
  for (const auto& view : ctx.views) {
    sum += predict_neighbor(view, dyn, t) - own;
  }
  return (ctx.cert->gain.f * sum - ctx.input).norm();
}

double trigger_g(const PlanContext& ctx, double t) {
  const auto& cert = *ctx.cert;
  double acc = 0.0;
  for (const auto& view : ctx.views) {
    if (t > view.next_access_time) {
      const numerics::ExpSum mu = mu_envelope(cert, view.agent_id);
      acc += numerics::exp_envelope_integral(cert.plant_bound.rate, mu,
                                             view.next_access_time, t);
    }
  }
  if (acc == 0.0) return 0.0;
  const double nb = Eigen::JacobiSVD<Eigen::MatrixXd>(ctx.dyn->b).singularValues()(0);
  const double nf =
      Eigen::JacobiSVD<Eigen::MatrixXd>(cert.gain.f).singularValues()(0);
  return nb * nf * cert.plant_bound.kappa * acc;
}

double sigma(const PlanContext& ctx, double t) {
  return trigger_f(ctx, t) + trigger_g(ctx, t);
}

namespace {

// Marching state for one piece: every tracked state advances by the same
// fixed step with x <- E x + v (v = 0 for the zero-input branch).
struct Stepper {
  Eigen::MatrixXd e;
  std::vector<Eigen::VectorXd> forced;  // per tracked agent, forced term or zero
};

double g_closed_form(const PlanContext& ctx, double t, double nb_nf_kth,
                     const std::vector<numerics::ExpSum>& mus) {
  double acc = 0.0;
  for (size_t k = 0; k < ctx.views.size(); ++k) {
    const double t_next = ctx.views[k].next_access_time;
    if (t > t_next) {
      acc += numerics::exp_envelope_integral(ctx.cert->plant_bound.rate, mus[k],
                                             t_next, t);
    }
  }
  return nb_nf_kth * acc;
}

}  // namespace

double next_access_time(const PlanContext& ctx, double horizon, double tol_t,
                        std::vector<SigmaSample>* trace) {
  const auto& dyn = *ctx.dyn;
  const auto& cert = *ctx.cert;
  const double now = ctx.now;
  if (horizon <= now) return kInf;

  const double s_now = cert.s_of(now);
  const double sigma_now = sigma(ctx, now);
  if (!(sigma_now < s_now)) {
    throw MonitorViolation("next_access_time: sigma(now) >= s(now) at t=" +
                           std::to_string(now));
  }

  const double tau_i = cert.tau_star(ctx.agent - 1);
  const double step = std::isfinite(tau_i)
                          ? std::max(tau_i / 4.0, tol_t)
                          : std::max((horizon - now) / 4096.0, tol_t);

  const double nb = Eigen::JacobiSVD<Eigen::MatrixXd>(dyn.b).singularValues()(0);
  const double nf = Eigen::JacobiSVD<Eigen::MatrixXd>(cert.gain.f).singularValues()(0);
  const double nb_nf_kth = nb * nf * cert.plant_bound.kappa;
  std::vector<numerics::ExpSum> mus;
  mus.reserve(ctx.views.size());
  for (const auto& view : ctx.views) {
    mus.push_back(mu_envelope(cert, view.agent_id));
  }

  // Pieces of ]now, horizon] delimited by the fetched next access times.
  std::set<double> cuts;
  for (const auto& view : ctx.views) {
    if (view.next_access_time > now && view.next_access_time < horizon) {
      cuts.insert(view.next_access_time);
    }
  }
  std::vector<double> bounds{now};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(horizon);

  auto exact_gap = [&](double t) { return sigma(ctx, t) - cert.s_of(t); };

  for (size_t p = 0; p + 1 < bounds.size(); ++p) {
    const double p0 = bounds[p];
    const double p1 = bounds[p + 1];
    // Exact states at the piece start.
    Eigen::VectorXd own = numerics::zoh_flow(dyn.a, dyn.b, ctx.own_state, ctx.input,
                                             p0 - now);
    std::vector<Eigen::VectorXd> nbr(ctx.views.size());
    for (size_t k = 0; k < ctx.views.size(); ++k) {
      nbr[k] = predict_neighbor(ctx.views[k], dyn, p0);
    }
    const Eigen::MatrixXd e = numerics::matexp(dyn.a, step);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dyn.n);
    const Eigen::VectorXd own_forced =
        numerics::zoh_flow(dyn.a, dyn.b, zero, ctx.input, step);
    std::vector<Eigen::VectorXd> nbr_forced(ctx.views.size());
    for (size_t k = 0; k < ctx.views.size(); ++k) {
      const bool zoh_active = ctx.views[k].next_access_time >= p1;
      nbr_forced[k] = zoh_active ? Eigen::VectorXd(numerics::zoh_flow(
                                       dyn.a, dyn.b, zero,
                                       ctx.views[k].held_input, step))
                                 : zero;
    }

    double t_prev = p0;
    double t = p0;
    while (t < p1 - 1e-15) {
      const double t2 = std::min(t + step, p1);
      if (t2 - t >= step - 1e-15) {
        own = e * own + own_forced;
        for (size_t k = 0; k < nbr.size(); ++k) {
          nbr[k] = e * nbr[k] + nbr_forced[k];
        }
      } else {
        // short final sub-step of the piece
        const Eigen::MatrixXd e2 = numerics::matexp(dyn.a, t2 - t);
        const Eigen::VectorXd of2 =
            numerics::zoh_flow(dyn.a, dyn.b, zero, ctx.input, t2 - t);
        own = e2 * own + of2;
        for (size_t k = 0; k < nbr.size(); ++k) {
          const bool zoh_active = ctx.views[k].next_access_time >= p1;
          nbr[k] = e2 * nbr[k] +
                   (zoh_active ? Eigen::VectorXd(numerics::zoh_flow(
                                     dyn.a, dyn.b, zero,
                                     ctx.views[k].held_input, t2 - t))
                               : zero);
        }
      }
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(dyn.n);
      for (const auto& xj : nbr) sum += xj - own;
      const double f_val = (cert.gain.f * sum - ctx.input).norm();
      const double g_val = g_closed_form(ctx, t2, nb_nf_kth, mus);
      const double s_val = cert.s_of(t2);
      if (trace) {
        trace->push_back({t2, f_val + g_val, s_val});
      }
      if (f_val + g_val >= s_val) {
        // Bracketed; refine with exact evaluations, left-biased.
        double lo = t_prev, hi = t2;
        while (exact_gap(lo) >= 0.0 && lo - step > now) {
          hi = lo;
          lo -= step;
        }
        while (hi - lo > tol_t) {
          const double mid = 0.5 * (lo + hi);
          if (exact_gap(mid) >= 0.0) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        return lo;
      }
      t_prev = t2;
      t = t2;
    }
  }
  return kInf;
}

double input_error(const Eigen::VectorXd& input, const Eigen::VectorXd& own_true,
                   const std::vector<Eigen::VectorXd>& neighbor_true,
                   const Eigen::MatrixXd& f) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(own_true.size());
  for (const auto& xj : neighbor_true) {
    sum += xj - own_true;
  }
  return (input - f * sum).norm();
}

}  // namespace stsync::controller
