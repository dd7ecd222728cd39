#pragma once

#include <Eigen/Dense>
#include <vector>

namespace stsync::numerics {

/// Matrix exponential e^{m t} (scaling-and-squaring with Pade approximant).
Eigen::MatrixXd matexp(const Eigen::MatrixXd& m, double t);

/// Exact zero-order-hold flow: e^{a dt} x0 + (integral_0^dt e^{a tau} dtau) b u.
/// Computed through the augmented (n+1) exponential of [[a, b*u], [0, 0]],
/// so there is no time-stepping error.
Eigen::VectorXd zoh_flow(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                         double dt);

/// t -> sum_k coeff_k * exp(-rate_k * (t - offset_time)).
/// Distinct rates are never merged; terms are kept exactly as designed.
struct ExpSum {
  struct Term {
    double coeff = 0.0;
    double rate = 0.0;
  };
  std::vector<Term> terms;
  double offset_time = 0.0;
};

double eval_expsum(const ExpSum& env, double t);

/// Closed form of integral_a^b e^{theta (b - tau)} env(tau) dtau.
/// A term whose rate satisfies theta + rate == 0 (within 1e-12) degenerates
/// to the linear-in-length limit (b - a) * c * e^{-rate (b - offset)}.
double exp_envelope_integral(double theta, const ExpSum& env, double a, double b);

}  // namespace stsync::numerics
