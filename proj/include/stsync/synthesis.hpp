#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stsync/graph.hpp"
#include "stsync/numerics.hpp"

namespace stsync::synthesis {

/// The pair (A, B). (A, B) must be stabilizable.
struct AgentDynamics {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  int n = 0;
  int m = 0;
};

AgentDynamics make_dynamics(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// True iff every uncontrollable mode of (a, b) has negative real part (PBH).
bool is_stabilizable(const AgentDynamics& dyn);

struct GainDesign {
  Eigen::MatrixXd f;   // m x n
  Eigen::MatrixXd p;   // n x n symmetric positive definite
  double rho = 0.0;    // Riccati parameter varrho
};

/// Certified exponential bound ||e^{M t}|| <= kappa e^{rate t} for t >= 0.
struct ExpBoundCert {
  double kappa = 1.0;
  double rate = 0.0;
  std::string target;
};

/// Threshold s(t) = s_inf + (s0 - s_inf) e^{-lambda_s t}.
struct Threshold {
  double s0 = 1.0;
  double s_inf = 0.01;
  double lambda_s = 1.0;
};

struct DesignCertificate {
  GainDesign gain;
  ExpBoundCert plant_bound;     // (kappa_theta, theta) for A
  ExpBoundCert contraction;     // kappa, rate = -lambda for the reduced closed loop
  double b_prime_norm = 0.0;    // ||(I - 1 phi^T) (x) B||
  Eigen::VectorXd beta;         // beta_i = ||row block i of L (x) F||
  Eigen::VectorXd gamma;        // Zeno constants
  Eigen::VectorXd tau_star;     // per-agent lower bounds; +inf marker allowed
  double epsilon = 0.0;         // kappa sqrt(N) ||B'|| s_inf / lambda
  Threshold threshold;
  double eta0 = 0.0;
  double eta_bar = 0.0;
  numerics::ExpSum eta;         // closed-form envelope eta(t), anchored at t0 = 0
  int n_agents = 0;

  double lambda() const { return -contraction.rate; }
  double s_of(double t) const;
  double eta_of(double t) const { return numerics::eval_expsum(eta, t); }
};

/// Continuous algebraic Riccati equation A^T P + P A - P B B^T P / varrho + I = 0.
/// Returns (P, residual Frobenius norm).
std::pair<Eigen::MatrixXd, double> solve_riccati(const AgentDynamics& dyn,
                                                 double varrho);

/// F = B^T P with the spectral condition varrho >= 1 / (2 Re lambda_2).
GainDesign design_gain(const AgentDynamics& dyn, const Eigen::MatrixXd& p,
                       const graph::Spectrum& spectrum, double varrho);

/// max Re eig(A - lambda_i B F) for i = 2..N; all must be negative for a valid design.
std::vector<double> verify_hurwitz(const AgentDynamics& dyn, const Eigen::MatrixXd& f,
                                   const graph::Spectrum& spectrum);

/// Reduced closed-loop matrix I_{N-1} (x) A - Lc (x) (B F).
Eigen::MatrixXcd build_acheck(const AgentDynamics& dyn, const Eigen::MatrixXd& f,
                              const graph::Spectrum& spectrum);

/// Certified bound ||e^{m t}|| <= kappa e^{theta t}: theta is the spectral
/// abscissa (plus a 1e-6 margin when m is not diagonalizable) and kappa comes
/// from a Lyapunov witness (conditioning of the real modal frame), falling
/// back to the validation-grid supremum in the defective case. The returned
/// certificate is checked on the grid {0, h, ..., t_val}.
ExpBoundCert exp_bound(const Eigen::MatrixXd& m, double t_val, double grid_step);

/// Same technique applied to the (Hurwitz) reduced closed loop; rate < 0.
ExpBoundCert contraction_bound(const Eigen::MatrixXcd& acheck,
                               double t_val = 20.0, double grid_step = 0.01);

double compute_bprime_norm(const graph::Spectrum& spectrum, const AgentDynamics& dyn);

Eigen::VectorXd beta_norms(const graph::Spectrum& spectrum, const Eigen::MatrixXd& f);

/// Closed-form envelope eta(t) and its upper bound eta_bar
/// (dense-grid maximum including both endpoint limits, times 1.001).
std::pair<numerics::ExpSum, double> eta_envelope(double kappa, double lambda,
                                                 int n_agents, double b_prime_norm,
                                                 const Threshold& threshold,
                                                 double eta0);

Eigen::VectorXd gamma_constants(const graph::AccessibilityGraph& g,
                                const AgentDynamics& dyn, const Eigen::MatrixXd& f,
                                const Eigen::VectorXd& beta, double kappa_theta,
                                double eta_bar, double s0);

/// Smallest positive root of gamma_i (e^{theta tau} - 1) / theta = s_inf;
/// +inf marker when no positive root exists (theta < 0 with theta s_inf <= -gamma_i,
/// or gamma_i = 0).
double tau_star(double gamma_i, double theta, double s_inf);

double tolerance_epsilon(double kappa, int n_agents, double b_prime_norm,
                         double s_inf, double lambda);

struct DesignOptions {
  /// Designer-specified (kappa, lambda) for the contraction bound
  /// (Algorithm-1 style "choose kappa, lambda"); validated against the
  /// reduced closed loop before being certified.
  std::optional<std::pair<double, double>> contraction_pair;
  /// Designer-specified (kappa_theta, theta) for the plant bound; validated.
  std::optional<std::pair<double, double>> plant_pair;
  /// Requested synchronization tolerance; when set, s_inf must satisfy
  /// s_inf <= lambda epsilon / (kappa sqrt(N) ||B'||).
  std::optional<double> epsilon_request;
  double t_val = 20.0;
  double grid_step = 0.01;
};

DesignCertificate design_pipeline(const AgentDynamics& dyn,
                                  const graph::AccessibilityGraph& g,
                                  const Threshold& threshold, double eta0,
                                  double varrho,
                                  const DesignOptions& options = {});

}  // namespace stsync::synthesis
