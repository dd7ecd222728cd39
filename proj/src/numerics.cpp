#include "stsync/numerics.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace stsync::numerics {

Eigen::MatrixXd matexp(const Eigen::MatrixXd& m, double t) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("matexp: matrix must be square");
  }
  if (!m.allFinite() || !std::isfinite(t)) {
    throw std::invalid_argument("matexp: non-finite input");
  }
  return (m * t).exp();
}

Eigen::VectorXd zoh_flow(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                         double dt) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || x0.size() != n || u.size() != b.cols()) {
    throw std::invalid_argument("zoh_flow: dimension mismatch");
  }
  if (dt < 0.0) {
    throw std::invalid_argument("zoh_flow: dt must be nonnegative");
  }
  if (dt == 0.0) {
    return x0;
  }
  // Augmented matrix [[a, b*u], [0, 0]]; top-right block of its exponential
  // is the forced-response integral.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, 1) = b * u;
  const Eigen::MatrixXd e = matexp(aug, dt);
  return e.topLeftCorner(n, n) * x0 + e.topRightCorner(n, 1);
}

double eval_expsum(const ExpSum& env, double t) {
  const double tau = t - env.offset_time;
  double v = 0.0;
  for (const auto& term : env.terms) {
    v += term.coeff * std::exp(-term.rate * tau);
  }
  return v;
}

double exp_envelope_integral(double theta, const ExpSum& env, double a, double b) {
  if (a > b) {
    throw std::invalid_argument("exp_envelope_integral: requires a <= b");
  }
  const double len = b - a;
  double v = 0.0;
  for (const auto& term : env.terms) {
    // integral_a^b e^{theta (b-tau)} c e^{-r (tau-off)} dtau
    //   = c e^{-r (a-off)} e^{theta len} (1 - e^{-(theta+r) len}) / (theta+r)
    const double q = theta + term.rate;
    const double front = term.coeff * std::exp(-term.rate * (a - env.offset_time));
    if (std::abs(q) <= 1e-12) {
      v += front * std::exp(theta * len) * len;
    } else {
      v += front * std::exp(theta * len) * (-std::expm1(-q * len)) / q;
    }
  }
  return v;
}

}  // namespace stsync::numerics
