#include "stsync/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "stsync/errors.hpp"

namespace stsync::synthesis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

// Solve M^T X + X M = C for symmetric X via Kronecker vectorization (n <= ~12).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& m, const Eigen::MatrixXd& c) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  // vec(M^T X) = (I (x) M^T) vec X, vec(X M) = (M^T (x) I) vec X
  for (Eigen::Index bi = 0; bi < n; ++bi)
    for (Eigen::Index bj = 0; bj < n; ++bj) {
      k.block(bi * n, bj * n, n, n) += id(bi, bj) * m.transpose();
      k.block(bi * n, bj * n, n, n) += m(bj, bi) * id;
    }
  Eigen::VectorXd rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = c.col(j);
  const Eigen::VectorXd v = k.partialPivLu().solve(rhs);
  Eigen::MatrixXd x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) x.col(j) = v.segment(j * n, n);
  return 0.5 * (x + x.transpose());
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd kron_c(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Real modal frame: real eigenvectors as-is, conjugate pairs as [Re v, Im v]
// (shared pair scaling keeps the 2x2 rotation-block structure, whose symmetric
// part is Re(lambda) I, so P = T^{-T} T^{-1} witnesses the bound at the abscissa).
Eigen::MatrixXd real_modal_frame(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXcd w = es.eigenvalues();
  const Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::MatrixXd t(n, n);
  Eigen::Index col = 0;
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (Eigen::Index k = 0; k < n && col < n; ++k) {
    if (used[static_cast<size_t>(k)]) continue;
    used[static_cast<size_t>(k)] = true;
    const double scale = std::max(1.0, std::abs(w(k)));
    if (std::abs(w(k).imag()) <= 1e-12 * scale) {
      Eigen::VectorXd re = v.col(k).real();
      const double nrm = re.norm();
      t.col(col++) = (nrm > 0) ? Eigen::VectorXd(re / nrm) : re;
    } else {
      // consume the conjugate partner
      for (Eigen::Index k2 = k + 1; k2 < n; ++k2) {
        if (!used[static_cast<size_t>(k2)] &&
            std::abs(w(k2) - std::conj(w(k))) <= 1e-9 * scale) {
          used[static_cast<size_t>(k2)] = true;
          break;
        }
      }
      Eigen::VectorXd re = v.col(k).real();
      Eigen::VectorXd im = v.col(k).imag();
      const double nrm = std::sqrt((re.squaredNorm() + im.squaredNorm()) / 2.0);
      t.col(col++) = re / nrm;
      if (col < n) t.col(col++) = im / nrm;
    }
  }
  return t;
}

struct BoundCore {
  double kappa;
  double rate;
};

double grid_sup(const Eigen::MatrixXd& m, double rate, double t_val, double h) {
  double sup = 0.0;
  for (double t = 0.0; t <= t_val + 1e-12; t += h) {
    sup = std::max(sup, spectral_norm(numerics::matexp(m, t)) * std::exp(-rate * t));
  }
  return sup;
}

void validate_on_grid(const Eigen::MatrixXd& m, double kappa, double rate,
                      double t_val, double h, const std::string& what) {
  for (double t = 0.0; t <= t_val + 1e-12; t += h) {
    const double lhs = spectral_norm(numerics::matexp(m, t));
    const double rhs = kappa * std::exp(rate * t);
    if (lhs - rhs > 1e-9) {
      throw SynthesisError(what + ": certificate rejected on validation grid at t=" +
                           std::to_string(t) + " (margin " +
                           std::to_string(lhs - rhs) + ")");
    }
  }
}

BoundCore exp_bound_core(const Eigen::MatrixXd& m, double t_val, double h) {
  const Eigen::Index n = m.rows();
  if (n == 0) return {1.0, -1.0};
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  const double alpha = es.eigenvalues().real().maxCoeff();
  Eigen::JacobiSVD<Eigen::MatrixXcd> vsvd(es.eigenvectors());
  const double smin = vsvd.singularValues()(n - 1);
  const double smax = vsvd.singularValues()(0);
  const bool diagonalizable = smin > 1e-8 * smax;

  const double theta = diagonalizable ? alpha : alpha + 1e-6;

  double kappa;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sa(0.5 * (m + m.transpose()));
  const double lognorm = sa.eigenvalues().maxCoeff();
  if (lognorm <= theta + 1e-12) {
    kappa = 1.0;
  } else if (diagonalizable) {
    const Eigen::MatrixXd t = real_modal_frame(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> tsvd(t);
    kappa = std::max(1.0, tsvd.singularValues()(0) / tsvd.singularValues()(n - 1));
  } else {
    kappa = std::max(1.0, grid_sup(m, theta, t_val, h));
  }
  return {kappa, theta};
}

Eigen::MatrixXd to_real_embedding(const Eigen::MatrixXcd& m) {
  const Eigen::Index k = m.rows();
  const Eigen::MatrixXd re = m.real(), im = m.imag();
  if (im.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + re.cwiseAbs().maxCoeff())) {
    return re;
  }
  Eigen::MatrixXd e(2 * k, 2 * k);
  e << re, -im, im, re;
  return e;
}

}  // namespace

double DesignCertificate::s_of(double t) const {
  return threshold.s_inf +
         (threshold.s0 - threshold.s_inf) * std::exp(-threshold.lambda_s * t);
}

AgentDynamics make_dynamics(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || b.cols() < 1) {
    throw SynthesisError("make_dynamics: A must be n x n and B must be n x m");
  }
  return {a, b, static_cast<int>(a.rows()), static_cast<int>(b.cols())};
}

bool is_stabilizable(const AgentDynamics& dyn) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(dyn.a, false);
  const double scale = 1.0 + dyn.a.norm();
  for (Eigen::Index k = 0; k < dyn.n; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (lam.real() < -1e-12) continue;
    Eigen::MatrixXcd pbh(dyn.n, dyn.n + dyn.m);
    pbh.leftCols(dyn.n) =
        lam * Eigen::MatrixXcd::Identity(dyn.n, dyn.n) - dyn.a.cast<std::complex<double>>();
    pbh.rightCols(dyn.m) = dyn.b.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    if (svd.singularValues()(dyn.n - 1) <= 1e-9 * scale) {
      return false;
    }
  }
  return true;
}

std::pair<Eigen::MatrixXd, double> solve_riccati(const AgentDynamics& dyn,
                                                 double varrho) {
  if (varrho <= 0.0) {
    throw SynthesisError("solve_riccati: varrho must be positive");
  }
  if (!is_stabilizable(dyn)) {
    throw SynthesisError("solve_riccati: (A, B) is not stabilizable");
  }
  const Eigen::Index n = dyn.n;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd g = dyn.b * dyn.b.transpose() / varrho;

  // Matrix sign function of the Hamiltonian with determinant scaling.
  Eigen::MatrixXd z(2 * n, 2 * n);
  z << dyn.a, g, id, -dyn.a.transpose();
  Eigen::MatrixXd z_old;
  const double tol = 1e-12;
  double rel = std::numeric_limits<double>::max();
  const double p = static_cast<double>(2 * n);
  for (int it = 0; it < 200 && rel > tol; ++it) {
    z_old = z;
    const double det = std::abs(z.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw SynthesisError("solve_riccati: sign iteration became singular "
                           "(no stabilizing solution)");
    }
    const double ck = std::pow(det, -1.0 / p);
    z *= ck;
    z = z - 0.5 * (z - z.inverse());
    rel = (z - z_old).norm();
  }
  if (!(rel <= 1e-6)) {
    throw SynthesisError("solve_riccati: sign iteration did not converge "
                         "(Hamiltonian has imaginary-axis eigenvalues?)");
  }
  const Eigen::MatrixXd w11 = z.topLeftCorner(n, n);
  const Eigen::MatrixXd w12 = z.topRightCorner(n, n);
  const Eigen::MatrixXd w21 = z.bottomLeftCorner(n, n);
  const Eigen::MatrixXd w22 = z.bottomRightCorner(n, n);
  Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
  lhs << w12, w22 + id;
  rhs << w11 + id, w21;
  Eigen::MatrixXd pmat =
      Eigen::JacobiSVD<Eigen::MatrixXd>(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV)
          .solve(rhs);
  pmat = 0.5 * (pmat + pmat.transpose());

  auto residual = [&](const Eigen::MatrixXd& pm) {
    return (dyn.a.transpose() * pm + pm * dyn.a - pm * g * pm + id).norm();
  };
  // Newton-Kleinman polish.
  for (int it = 0; it < 5 && residual(pmat) > 1e-11; ++it) {
    const Eigen::MatrixXd acl = dyn.a - g * pmat;
    const Eigen::MatrixXd c = -(id + pmat * g * pmat);
    pmat = solve_lyapunov(acl, c);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sa(pmat);
  if (sa.eigenvalues().minCoeff() <= 0.0) {
    throw SynthesisError("solve_riccati: solution is not positive definite");
  }
  const double res = residual(pmat);
  if (res > 1e-8) {
    throw SynthesisError("solve_riccati: residual " + std::to_string(res) +
                         " exceeds 1e-8");
  }
  // Strict Riccati inequality A^T P + P A - P B B^T P / varrho < 0.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ineq(
      dyn.a.transpose() * pmat + pmat * dyn.a - pmat * g * pmat);
  if (ineq.eigenvalues().maxCoeff() >= -1e-10) {
    throw SynthesisError("solve_riccati: strict Riccati inequality not satisfied");
  }
  return {pmat, res};
}

GainDesign design_gain(const AgentDynamics& dyn, const Eigen::MatrixXd& p,
                       const graph::Spectrum& spectrum, double varrho) {
  if (spectrum.eigenvalues.size() > 1) {
    const double re2 = spectrum.eigenvalues(1).real();
    if (varrho < 1.0 / (2.0 * re2) - 1e-12) {
      throw SynthesisError("design_gain: varrho=" + std::to_string(varrho) +
                           " violates varrho >= 1/(2 Re lambda_2) = " +
                           std::to_string(1.0 / (2.0 * re2)));
    }
  }
  GainDesign gd{dyn.b.transpose() * p, p, varrho};
  const auto margins = verify_hurwitz(dyn, gd.f, spectrum);
  for (size_t i = 0; i < margins.size(); ++i) {
    if (margins[i] >= 0.0) {
      throw SynthesisError("design_gain: A - lambda_" + std::to_string(i + 2) +
                           " B F is not Hurwitz (max Re = " +
                           std::to_string(margins[i]) + ")");
    }
  }
  return gd;
}

std::vector<double> verify_hurwitz(const AgentDynamics& dyn, const Eigen::MatrixXd& f,
                                   const graph::Spectrum& spectrum) {
  std::vector<double> out;
  const Eigen::MatrixXcd bf = (dyn.b * f).cast<std::complex<double>>();
  const Eigen::MatrixXcd ac = dyn.a.cast<std::complex<double>>();
  for (Eigen::Index k = 1; k < spectrum.eigenvalues.size(); ++k) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(ac - spectrum.eigenvalues(k) * bf,
                                                   false);
    out.push_back(es.eigenvalues().real().maxCoeff());
  }
  return out;
}

Eigen::MatrixXcd build_acheck(const AgentDynamics& dyn, const Eigen::MatrixXd& f,
                              const graph::Spectrum& spectrum) {
  const Eigen::Index r = spectrum.l_check.rows();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(r, r);
  return kron_c(eye, dyn.a.cast<std::complex<double>>()) -
         kron_c(spectrum.l_check, (dyn.b * f).cast<std::complex<double>>());
}

ExpBoundCert exp_bound(const Eigen::MatrixXd& m, double t_val, double grid_step) {
  if (!m.allFinite()) {
    throw SynthesisError("exp_bound: matrix has non-finite entries");
  }
  const BoundCore core = exp_bound_core(m, t_val, grid_step);
  validate_on_grid(m, core.kappa, core.rate, t_val, grid_step, "exp_bound");
  return {core.kappa, core.rate, "plant"};
}

ExpBoundCert contraction_bound(const Eigen::MatrixXcd& acheck, double t_val,
                               double grid_step) {
  if (acheck.rows() == 0) {
    return {1.0, -1.0, "acheck"};
  }
  const Eigen::MatrixXd m = to_real_embedding(acheck);
  if (spectral_abscissa(m) >= 0.0) {
    throw SynthesisError("contraction_bound: reduced closed loop is not Hurwitz");
  }
  const BoundCore core = exp_bound_core(m, t_val, grid_step);
  validate_on_grid(m, core.kappa, core.rate, t_val, grid_step, "contraction_bound");
  return {core.kappa, core.rate, "acheck"};
}

double compute_bprime_norm(const graph::Spectrum& spectrum, const AgentDynamics& dyn) {
  const Eigen::Index n_agents = spectrum.phi.size();
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::Identity(n_agents, n_agents) -
      Eigen::VectorXd::Ones(n_agents) * spectrum.phi.transpose();
  // ||(I - 1 phi^T) (x) B|| = ||I - 1 phi^T|| ||B||
  return spectral_norm(proj) * spectral_norm(dyn.b);
}

Eigen::VectorXd beta_norms(const graph::Spectrum& spectrum, const Eigen::MatrixXd& f) {
  const Eigen::Index n_agents = spectrum.laplacian.rows();
  const Eigen::MatrixXd lf = kron(spectrum.laplacian, f);
  const Eigen::Index rows_per_agent = f.rows();
  Eigen::VectorXd beta(n_agents);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    beta(i) = spectral_norm(lf.middleRows(i * rows_per_agent, rows_per_agent));
  }
  return beta;
}

std::pair<numerics::ExpSum, double> eta_envelope(double kappa, double lambda,
                                                 int n_agents, double b_prime_norm,
                                                 const Threshold& thr, double eta0) {
  if (std::abs(lambda - thr.lambda_s) < 1e-9) {
    throw SynthesisError(
        "eta_envelope: lambda == lambda_s makes the eta(t) closed form "
        "degenerate; perturb lambda_s");
  }
  const double w = kappa * std::sqrt(static_cast<double>(n_agents)) * b_prime_norm;
  numerics::ExpSum eta;
  eta.offset_time = 0.0;
  const double c_s = w * thr.s_inf / lambda;
  const double c_ls = w * (thr.s0 - thr.s_inf) / (lambda - thr.lambda_s);
  eta.terms.push_back({c_s, 0.0});
  eta.terms.push_back({kappa * eta0 - c_s - c_ls, lambda});
  eta.terms.push_back({c_ls, thr.lambda_s});

  const double rate_min = std::min(lambda, thr.lambda_s);
  const double step = 1e-3 / rate_min;
  const double t_end = 40.0 / rate_min;
  double peak = std::max(numerics::eval_expsum(eta, 0.0), c_s);
  for (double t = step; t <= t_end; t += step) {
    peak = std::max(peak, numerics::eval_expsum(eta, t));
  }
  return {eta, 1.001 * peak};
}

Eigen::VectorXd gamma_constants(const graph::AccessibilityGraph& g,
                                const AgentDynamics& dyn, const Eigen::MatrixXd& f,
                                const Eigen::VectorXd& beta, double kappa_theta,
                                double eta_bar, double s0) {
  const double nb = spectral_norm(dyn.b);
  const double nf = spectral_norm(f);
  const double na = spectral_norm(dyn.a);
  Eigen::VectorXd gamma(g.n_agents);
  for (int i = 1; i <= g.n_agents; ++i) {
    double sum = 0.0;
    for (int j : g.neighbors(i)) {
      sum += (beta(i - 1) + 2.0 * beta(j - 1)) * eta_bar + 3.0 * s0;
    }
    gamma(i - 1) = nb * nf * kappa_theta * sum + kappa_theta * beta(i - 1) * eta_bar * na;
  }
  return gamma;
}

double tau_star(double gamma_i, double theta, double s_inf) {
  if (gamma_i < 0.0) {
    throw SynthesisError("tau_star: gamma must be nonnegative");
  }
  if (gamma_i == 0.0) {
    return kInf;
  }
  if (theta == 0.0) {
    return s_inf / gamma_i;
  }
  const double arg = 1.0 + theta * s_inf / gamma_i;
  if (arg <= 0.0) {
    return kInf;  // theta < 0 and theta s_inf <= -gamma_i: no finite root
  }
  return std::log(arg) / theta;
}

double tolerance_epsilon(double kappa, int n_agents, double b_prime_norm,
                         double s_inf, double lambda) {
  if (lambda <= 0.0) {
    throw SynthesisError("tolerance_epsilon: lambda must be positive");
  }
  return kappa * std::sqrt(static_cast<double>(n_agents)) * b_prime_norm * s_inf /
         lambda;
}

DesignCertificate design_pipeline(const AgentDynamics& dyn,
                                  const graph::AccessibilityGraph& g,
                                  const Threshold& threshold, double eta0,
                                  double varrho, const DesignOptions& options) {
  if (!(threshold.s0 >= threshold.s_inf && threshold.s_inf > 0.0 &&
        threshold.lambda_s > 0.0)) {
    throw SynthesisError("design_pipeline: threshold requires s0 >= s_inf > 0 and "
                         "lambda_s > 0");
  }
  if (!(eta0 > 0.0)) {
    throw SynthesisError("design_pipeline: eta0 must be positive");
  }
  if (!is_stabilizable(dyn)) {
    throw SynthesisError("design_pipeline: (A, B) is not stabilizable");
  }
  if (!graph::has_spanning_tree(g)) {
    throw SynthesisError("design_pipeline: accessibility graph violates Assumption 1 "
                         "(no directed spanning tree)");
  }
  const graph::Spectrum spectrum = graph::spectral(g);

  DesignCertificate cert;
  cert.n_agents = g.n_agents;
  cert.threshold = threshold;
  cert.eta0 = eta0;

  const auto [pmat, riccati_residual] = solve_riccati(dyn, varrho);
  (void)riccati_residual;
  cert.gain = design_gain(dyn, pmat, spectrum, varrho);

  if (options.plant_pair) {
    const auto [kth, th] = *options.plant_pair;
    if (kth < 1.0) {
      throw SynthesisError("design_pipeline: specified kappa_theta must be >= 1");
    }
    validate_on_grid(dyn.a, kth, th, options.t_val, options.grid_step,
                     "design_pipeline(plant pair)");
    cert.plant_bound = {kth, th, "plant"};
  } else {
    cert.plant_bound = exp_bound(dyn.a, options.t_val, options.grid_step);
  }

  if (g.n_agents > 1) {
    const Eigen::MatrixXcd acheck = build_acheck(dyn, cert.gain.f, spectrum);
    if (options.contraction_pair) {
      const auto [kap, lam] = *options.contraction_pair;
      if (kap < 1.0 || lam <= 0.0) {
        throw SynthesisError(
            "design_pipeline: specified contraction pair needs kappa >= 1 and "
            "lambda > 0");
      }
      validate_on_grid(to_real_embedding(acheck), kap, -lam, options.t_val,
                       options.grid_step, "design_pipeline(contraction pair)");
      cert.contraction = {kap, -lam, "acheck"};
    } else {
      cert.contraction = contraction_bound(acheck, options.t_val, options.grid_step);
    }
  } else {
    cert.contraction = {1.0, -1.0, "acheck"};
  }
  const double lambda = cert.lambda();

  cert.b_prime_norm = compute_bprime_norm(spectrum, dyn);
  cert.beta = beta_norms(spectrum, cert.gain.f);

  auto [eta, eta_bar] = eta_envelope(cert.contraction.kappa, lambda, g.n_agents,
                                     cert.b_prime_norm, threshold, eta0);
  cert.eta = std::move(eta);
  cert.eta_bar = eta_bar;

  cert.epsilon = tolerance_epsilon(cert.contraction.kappa, g.n_agents,
                                   cert.b_prime_norm, threshold.s_inf, lambda);
  if (options.epsilon_request) {
    const double s_inf_max = lambda * (*options.epsilon_request) /
                             (cert.contraction.kappa *
                              std::sqrt(static_cast<double>(g.n_agents)) *
                              cert.b_prime_norm);
    if (threshold.s_inf > s_inf_max + 1e-12) {
      throw SynthesisError("design_pipeline: s_inf=" + std::to_string(threshold.s_inf) +
                           " is inconsistent with requested epsilon (needs s_inf <= " +
                           std::to_string(s_inf_max) + ")");
    }
  }

  cert.gamma = gamma_constants(g, dyn, cert.gain.f, cert.beta,
                               cert.plant_bound.kappa, cert.eta_bar, threshold.s0);
  cert.tau_star.resize(g.n_agents);
  for (int i = 0; i < g.n_agents; ++i) {
    cert.tau_star(i) = tau_star(cert.gamma(i), cert.plant_bound.rate, threshold.s_inf);
    if (std::isfinite(cert.tau_star(i)) && !(cert.tau_star(i) > 0.0)) {
      throw SynthesisError("design_pipeline: tau_star for agent " +
                           std::to_string(i + 1) + " is not positive");
    }
  }
  return cert;
}

}  // namespace stsync::synthesis
