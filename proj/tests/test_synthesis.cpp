#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stsync/errors.hpp"
#include "stsync/numerics.hpp"
#include "stsync/synthesis.hpp"

using namespace stsync;
using namespace stsync::synthesis;

namespace {

double norm2(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

AgentDynamics scalar_dyn(double a, double b) {
  Eigen::MatrixXd am(1, 1), bm(1, 1);
  am << a;
  bm << b;
  return make_dynamics(am, bm);
}

}  // namespace

TEST_SUITE_BEGIN("synthesis");

TEST_CASE("solve_riccati reproduces the oscillator solution sqrt(0.6) I") {
  const auto dyn = fixtures::osc_dynamics();
  const auto [p, resid] = solve_riccati(dyn, 0.6);
  CHECK(resid <= 1e-8);
  CHECK(p(0, 0) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-10));
  CHECK(p(1, 1) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-10));
  CHECK(std::abs(p(0, 1)) < 1e-10);
  CHECK(p(0, 0) == doctest::Approx(0.7746).epsilon(1e-4));
}

TEST_CASE("solve_riccati on scalar plants") {
  {
    const auto [p, resid] = solve_riccati(scalar_dyn(0.0, 1.0), 1.0);
    CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(resid <= 1e-8);
  }
  {
    // -2P - 2P^2 + 1 = 0, positive root (sqrt(3) - 1) / 2
    const auto [p, resid] = solve_riccati(scalar_dyn(-1.0, 1.0), 0.5);
    CHECK(p(0, 0) == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.0).epsilon(1e-10));
    CHECK(resid <= 1e-8);
  }
}

TEST_CASE("solve_riccati rejects unstabilizable plants") {
  // x1 unstable and disconnected from the input
  Eigen::MatrixXd a(2, 2), b(2, 1);
  a << 1.0, 0.0, 0.0, -1.0;
  b << 0.0, 1.0;
  CHECK_THROWS_AS(solve_riccati(make_dynamics(a, b), 1.0), SynthesisError);
}

TEST_CASE("riccati solutions satisfy the equation and positivity on random plants") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  int done = 0;
  while (done < 25) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 2);
    Eigen::MatrixXd a(n, n), b(n, m);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = 1.5 * dist(rng);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < m; ++c) b(r, c) = dist(rng);
    const auto dyn = make_dynamics(a, b);
    if (!is_stabilizable(dyn)) continue;
    ++done;
    const double varrho = 0.3 + std::abs(dist(rng));
    const auto [p, resid] = solve_riccati(dyn, varrho);
    CHECK(resid <= 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    const Eigen::MatrixXd lhs = a.transpose() * p + p * a -
                                p * b * b.transpose() * p / varrho +
                                Eigen::MatrixXd::Identity(n, n);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lhs).eigenvalues()
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
  }
}

TEST_CASE("design_gain reproduces F = B^T P on the reference setup") {
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(fixtures::ref_graph());
  const auto [p, resid] = solve_riccati(dyn, 0.6);
  (void)resid;
  // varrho = 0.6 satisfies 1 / (2 Re lambda_2) = 0.5
  const auto gd = design_gain(dyn, p, sp, 0.6);
  CHECK(gd.f(0, 0) == doctest::Approx(0.7746).epsilon(1e-4));
  CHECK(gd.f(1, 1) == doctest::Approx(0.7746).epsilon(1e-4));
  CHECK(std::abs(gd.f(0, 1)) < 1e-10);
  // violating the spectral condition is rejected
  CHECK_THROWS_AS(design_gain(dyn, p, sp, 0.4), SynthesisError);
}

TEST_CASE("design_gain rejects gains that fail the Hurwitz check") {
  // F = B^T P with P = 0 leaves the double integrator unstabilized
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 0, 0;
  b << 1, 0, 0, 1;
  const auto dyn = make_dynamics(a, b);
  const auto sp = graph::spectral(graph::build_graph(2, {{1, 2}}));
  CHECK_THROWS_AS(design_gain(dyn, Eigen::MatrixXd::Zero(2, 2), sp, 1.0),
                  SynthesisError);
}

TEST_CASE("verify_hurwitz matches the hand-computed mode real parts") {
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(fixtures::ref_graph());
  const Eigen::MatrixXd f = std::sqrt(0.6) * Eigen::MatrixXd::Identity(2, 2);
  const auto margins = verify_hurwitz(dyn, f, sp);
  REQUIRE(margins.size() == 3);
  // lambda_2 = 1: eig(A - BF) = -0.7746 +- 0.4j
  CHECK(margins[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-9));
  // lambda = 2 -+ j: real part -1.5492
  CHECK(margins[1] == doctest::Approx(-2.0 * std::sqrt(0.6)).epsilon(1e-9));
  CHECK(margins[2] == doctest::Approx(-2.0 * std::sqrt(0.6)).epsilon(1e-9));
  // zero gain leaves the oscillator marginally stable
  const auto zero_margins = verify_hurwitz(dyn, Eigen::MatrixXd::Zero(2, 2), sp);
  for (double v : zero_margins) {
    CHECK(v == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("build_acheck on the two-agent chain is A - BF") {
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(graph::build_graph(2, {{1, 2}}));
  const Eigen::MatrixXd f = std::sqrt(0.6) * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXcd acheck = build_acheck(dyn, f, sp);
  const Eigen::MatrixXd want = dyn.a - dyn.b * f;
  CHECK((acheck.real() - want).norm() < 1e-9);
  CHECK(acheck.imag().norm() < 1e-9);
}

TEST_CASE("build_acheck spectrum equals the union of the closed-loop modes") {
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(fixtures::ref_graph());
  const Eigen::MatrixXd f = std::sqrt(0.6) * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXcd acheck = build_acheck(dyn, f, sp);
  REQUIRE(acheck.rows() == 6);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(acheck, false);
  std::vector<std::complex<double>> got(es.eigenvalues().data(),
                                        es.eigenvalues().data() + 6);
  std::vector<std::complex<double>> want;
  for (Eigen::Index k = 1; k < sp.eigenvalues.size(); ++k) {
    const Eigen::MatrixXcd mode =
        dyn.a.cast<std::complex<double>>() -
        sp.eigenvalues(k) * (dyn.b * f).cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> mes(mode, false);
    want.push_back(mes.eigenvalues()(0));
    want.push_back(mes.eigenvalues()(1));
  }
  auto by_re_im = [](std::complex<double> x, std::complex<double> y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  };
  std::sort(got.begin(), got.end(), by_re_im);
  std::sort(want.begin(), want.end(), by_re_im);
  for (size_t k = 0; k < got.size(); ++k) {
    CHECK(std::abs(got[k] - want[k]) < 1e-6);
  }
  const double max_re =
      std::max_element(got.begin(), got.end(), [](auto x, auto y) {
        return x.real() < y.real();
      })->real();
  CHECK(max_re == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-9));

  // decoupled case
  const Eigen::MatrixXcd dec = build_acheck(dyn, Eigen::MatrixXd::Zero(2, 2), sp);
  Eigen::MatrixXcd want_dec = Eigen::MatrixXcd::Zero(6, 6);
  for (int k = 0; k < 3; ++k) {
    want_dec.block(2 * k, 2 * k, 2, 2) = dyn.a.cast<std::complex<double>>();
  }
  CHECK((dec - want_dec).norm() < 1e-12);
}

TEST_CASE("exp_bound certifies the skew-symmetric oscillator with (1, 0)") {
  const auto cert = exp_bound(fixtures::osc_dynamics().a, 20.0, 0.01);
  CHECK(std::abs(cert.kappa - 1.0) <= 1e-9);
  CHECK(std::abs(cert.rate) <= 1e-9);
}

TEST_CASE("exp_bound of -I is (1, -1)") {
  const auto cert = exp_bound(-Eigen::MatrixXd::Identity(3, 3), 20.0, 0.01);
  CHECK(cert.kappa == doctest::Approx(1.0));
  CHECK(cert.rate == doctest::Approx(-1.0));
}

TEST_CASE("exp_bound on a Jordan block uses the margin and the grid supremum") {
  Eigen::MatrixXd m(2, 2);
  m << -1.0, 1.0, 0.0, -1.0;
  const auto cert = exp_bound(m, 50.0, 0.01);
  CHECK(cert.rate == doctest::Approx(-1.0 + 1e-6).epsilon(1e-9));
  // sampling oracle over the same validation grid
  double sup = 0.0;
  for (double t = 0.0; t <= 50.0 + 1e-12; t += 0.01) {
    const double nrm = norm2(numerics::matexp(m, t));
    sup = std::max(sup, nrm * std::exp(-cert.rate * t));
  }
  CHECK(cert.kappa == doctest::Approx(sup).epsilon(1e-9));
  // and the certificate is valid on the grid by construction
  for (double t = 0.0; t <= 50.0 + 1e-12; t += 0.37) {
    CHECK(norm2(numerics::matexp(m, t)) <= cert.kappa * std::exp(cert.rate * t) + 1e-9);
  }
}

TEST_CASE("contraction_bound of -I is (1, 1)") {
  const Eigen::MatrixXcd m = -Eigen::MatrixXcd::Identity(4, 4);
  const auto cert = contraction_bound(m);
  CHECK(cert.kappa == doctest::Approx(1.0));
  CHECK(-cert.rate == doctest::Approx(1.0));
}

TEST_CASE("contraction_bound rejects non-Hurwitz input") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = 0.1;
  m(1, 1) = -1.0;
  CHECK_THROWS_AS(contraction_bound(m), SynthesisError);
}

TEST_CASE("contraction_bound on the reference closed loop is sound and tight") {
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(fixtures::ref_graph());
  const Eigen::MatrixXd f = std::sqrt(0.6) * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXcd acheck = build_acheck(dyn, f, sp);
  const auto cert = contraction_bound(acheck);
  CHECK(cert.rate < 0.0);
  // lambda cannot exceed the spectral abscissa of the slowest mode
  CHECK(-cert.rate <= std::sqrt(0.6) + 1e-9);
  CHECK(cert.kappa >= 1.0);
  const Eigen::MatrixXd ar = acheck.real();
  for (double t = 0.0; t <= 20.0; t += 0.25) {
    CHECK(norm2(numerics::matexp(ar, t)) <=
          cert.kappa * std::exp(cert.rate * t) + 1e-9);
  }
}

TEST_CASE("contraction_bound on the two-agent chain stays below the abscissa") {
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(graph::build_graph(2, {{1, 2}}));
  const Eigen::MatrixXd f = std::sqrt(0.6) * Eigen::MatrixXd::Identity(2, 2);
  const auto cert = contraction_bound(build_acheck(dyn, f, sp));
  CHECK(-cert.rate <= std::sqrt(0.6) + 1e-9);
}

TEST_CASE("compute_bprime_norm special cases") {
  const auto dyn = fixtures::osc_dynamics();
  {
    // phi = 1/N makes I - 1 phi^T an orthogonal projector
    const auto sp = graph::spectral(
        graph::build_graph(3, {{1, 2}, {2, 3}, {3, 1}}));
    CHECK((sp.phi - Eigen::VectorXd::Constant(3, 1.0 / 3.0)).norm() < 1e-9);
    CHECK(compute_bprime_norm(sp, dyn) == doctest::Approx(1.0).epsilon(1e-10));
  }
  {
    const auto sp = graph::spectral(fixtures::ref_graph());
    const double got = compute_bprime_norm(sp, dyn);
    // cross-check against the explicit Kronecker matrix
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(4, 4) -
                                 Eigen::VectorXd::Ones(4) * sp.phi.transpose();
    Eigen::MatrixXd full(8, 8);
    full.setZero();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        full.block(2 * r, 2 * c, 2, 2) = proj(r, c) * dyn.b;
    CHECK(got == doctest::Approx(norm2(full)).epsilon(1e-10));
    CHECK(got == doctest::Approx(1.06).epsilon(0.01));
  }
  {
    const auto sp = graph::spectral(graph::build_graph(1, {}));
    CHECK(compute_bprime_norm(sp, dyn) == doctest::Approx(0.0));
  }
}

TEST_CASE("beta_norms on the chain and the zero gain") {
  Eigen::MatrixXd a1(1, 1), b1(1, 1), f1(1, 1);
  a1 << 0.0;
  b1 << 1.0;
  f1 << 1.0;
  const auto sp = graph::spectral(graph::build_graph(2, {{1, 2}}));
  const Eigen::VectorXd beta = beta_norms(sp, f1);
  CHECK(beta(0) == doctest::Approx(0.0));
  CHECK(beta(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  const Eigen::VectorXd zero = beta_norms(sp, Eigen::MatrixXd::Zero(1, 1));
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
  const auto sp4 = graph::spectral(fixtures::ref_graph());
  const Eigen::VectorXd beta4 =
      beta_norms(sp4, std::sqrt(0.6) * Eigen::MatrixXd::Identity(2, 2));
  CHECK(beta4.minCoeff() > 0.0);
}

TEST_CASE("eta_envelope endpoints and quadrature cross-check") {
  const double kappa = fixtures::kKappaRef, lambda = fixtures::kLambdaRef;
  const double bpn = 1.0583005244258363;
  const auto thr = fixtures::ref_threshold();
  const auto [eta, eta_bar] = eta_envelope(kappa, lambda, 4, bpn, thr,
                                           fixtures::kEta0);
  CHECK(numerics::eval_expsum(eta, 0.0) ==
        doctest::Approx(kappa * fixtures::kEta0).epsilon(1e-12));
  const double eps = tolerance_epsilon(kappa, 4, bpn, thr.s_inf, lambda);
  CHECK(numerics::eval_expsum(eta, 500.0) == doctest::Approx(eps).epsilon(1e-9));
  CHECK(eta_bar >= kappa * fixtures::kEta0);
  CHECK(eta_bar <= 1.01 * kappa * fixtures::kEta0);

  // eta(1) against quadrature of the defining integral form
  const double w = kappa * 2.0 * bpn;
  const double direct =
      kappa * std::exp(-lambda) * fixtures::kEta0 +
      w * oracles::adaptive_simpson(
              [&](double tau) {
                return std::exp(-lambda * (1.0 - tau)) *
                       (thr.s_inf + (thr.s0 - thr.s_inf) * std::exp(-thr.lambda_s * tau));
              },
              0.0, 1.0);
  CHECK(numerics::eval_expsum(eta, 1.0) == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("eta_envelope rejects the lambda == lambda_s degeneracy") {
  Threshold thr{1.0, 0.01, 0.7736};
  CHECK_THROWS_WITH_AS(eta_envelope(2.0, 0.7736, 4, 1.0, thr, 1.0).second > 0.0,
                       doctest::Contains("closed form"), SynthesisError);
}

TEST_CASE("gamma_constants on hand-computable cases") {
  {
    // isolated agent: empty neighbor sum and beta = 0
    Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(1, 1);
    Eigen::MatrixXd b0 = Eigen::MatrixXd::Identity(1, 1);
    const auto g = graph::build_graph(1, {});
    const auto gam = gamma_constants(g, make_dynamics(a0, b0),
                                     Eigen::MatrixXd::Zero(1, 1),
                                     Eigen::VectorXd::Zero(1), 1.0, 1.0, 1.0);
    CHECK(gam(0) == 0.0);
  }
  {
    // two-agent chain with unit scalars: gamma_2 = (sqrt 2 + 3) + sqrt 2
    Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
    const auto g = graph::build_graph(2, {{1, 2}});
    Eigen::VectorXd beta(2);
    beta << 0.0, std::sqrt(2.0);
    const auto gam = gamma_constants(g, make_dynamics(one, one), one, beta, 1.0,
                                     1.0, 1.0);
    CHECK(gam(0) == 0.0);
    CHECK(gam(1) == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("tau_star covers all three branches") {
  CHECK(tau_star(2.0, 0.0, 0.01) == doctest::Approx(0.005));
  CHECK(std::isinf(tau_star(1.0, -1.0, 10.0)));
  CHECK(std::isinf(tau_star(0.0, 0.5, 0.01)));
  const double t_pos = tau_star(3.0, 0.8, 0.01);
  CHECK(t_pos == doctest::Approx(std::log(1.0 + 0.8 * 0.01 / 3.0) / 0.8));
  CHECK_THROWS_AS(tau_star(-1.0, 0.0, 0.01), SynthesisError);
}

TEST_CASE("tau_star never decreases when s_inf grows") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double gamma = 0.1 + 5.0 * dist(rng);
    const double theta = -1.5 + 3.0 * dist(rng);
    const double s1 = 0.01 + dist(rng);
    const double s2 = s1 + dist(rng);
    const double t1 = tau_star(gamma, theta, s1);
    const double t2 = tau_star(gamma, theta, s2);
    CHECK(t2 >= t1 * (1.0 - 1e-12));
  }
  // the theta = 0 branch as the limit of both signs
  CHECK(tau_star(2.0, 1e-12, 0.01) == doctest::Approx(0.005).epsilon(1e-6));
  CHECK(tau_star(2.0, -1e-12, 0.01) == doctest::Approx(0.005).epsilon(1e-6));
}

TEST_CASE("tolerance_epsilon formula and limits") {
  CHECK(tolerance_epsilon(1.0, 4, 1.0, 0.5, 1.0) == doctest::Approx(1.0));
  CHECK(tolerance_epsilon(2.0, 4, 1.5, 0.0, 0.5) == doctest::Approx(0.0));
  CHECK_THROWS_AS(tolerance_epsilon(1.0, 4, 1.0, 0.5, 0.0), SynthesisError);
  // reference values
  const double eps = tolerance_epsilon(fixtures::kKappaRef, 4, 1.0583005244258363,
                                       0.01, fixtures::kLambdaRef);
  CHECK(eps == doctest::Approx(0.0637).epsilon(0.016));
  CHECK(std::abs(eps - 0.0637) < 1e-3);
}

TEST_CASE("design_pipeline produces the reference certificate") {
  const auto cert = fixtures::design_reference();
  CHECK(cert.n_agents == 4);
  CHECK(cert.gain.f(0, 0) == doctest::Approx(0.7746).epsilon(1e-4));
  CHECK(cert.plant_bound.kappa == doctest::Approx(1.0));
  CHECK(std::abs(cert.plant_bound.rate) <= 1e-9);
  CHECK(cert.contraction.kappa == doctest::Approx(fixtures::kKappaRef));
  CHECK(cert.lambda() == doctest::Approx(fixtures::kLambdaRef));
  CHECK(std::abs(cert.epsilon - 0.0637) < 2e-3);
  CHECK(cert.eta_bar >= cert.eta_of(0.0));
  for (int i = 0; i < 4; ++i) {
    CHECK(cert.gamma(i) > 0.0);
    CHECK(cert.tau_star(i) > 0.0);
    CHECK(std::isfinite(cert.tau_star(i)));
  }
  // the agent whose in-degree-1 chain structure the paper's table pins
  // (agent 2 reads the degree-1 agent 3): tau_2^* within 20%
  CHECK(cert.tau_star(1) == doctest::Approx(9.3436e-5).epsilon(0.2));
}

TEST_CASE("design_pipeline sampled certificate soundness") {
  const auto cert = fixtures::design_reference();
  const auto dyn = fixtures::osc_dynamics();
  const auto sp = graph::spectral(fixtures::ref_graph());
  const Eigen::MatrixXd acheck = build_acheck(dyn, cert.gain.f, sp).real();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(0.0, 20.0);
  for (int k = 0; k < 50; ++k) {
    const double t = dist(rng);
    CHECK(norm2(numerics::matexp(dyn.a, t)) <=
          cert.plant_bound.kappa * std::exp(cert.plant_bound.rate * t) *
              (1.0 + 1e-9));
    CHECK(norm2(numerics::matexp(acheck, t)) <=
          cert.contraction.kappa * std::exp(cert.contraction.rate * t) *
              (1.0 + 1e-9));
  }
}

TEST_CASE("design_pipeline degenerate and failure cases") {
  {
    // single agent: epsilon = 0, tau = inf
    Eigen::MatrixXd a(1, 1), b(1, 1);
    a << -0.5;
    b << 1.0;
    const auto cert = design_pipeline(make_dynamics(a, b),
                                      graph::build_graph(1, {}), {1.0, 0.1, 0.4},
                                      1.0, 1.0);
    CHECK(cert.epsilon == doctest::Approx(0.0));
    CHECK(std::isinf(cert.tau_star(0)));
  }
  {
    // unstable uncontrollable plant
    Eigen::MatrixXd a(2, 2), b(2, 1);
    a << 1.0, 0.0, 0.0, -1.0;
    b << 0.0, 1.0;
    CHECK_THROWS_AS(design_pipeline(make_dynamics(a, b),
                                    graph::build_graph(2, {{1, 2}}),
                                    {1.0, 0.01, 0.3}, 1.0, 1.0),
                    SynthesisError);
  }
  {
    // disconnected graph violates Assumption 1
    CHECK_THROWS_WITH_AS(design_pipeline(fixtures::osc_dynamics(),
                                         graph::build_graph(4, {{1, 2}, {3, 4}}),
                                         fixtures::ref_threshold(), 1.0, 0.6),
                         doctest::Contains("Assumption 1"), SynthesisError);
  }
  {
    // an unsound designer-specified pair is rejected
    synthesis::DesignOptions opt;
    opt.contraction_pair = {{1.0, 5.0}};  // decays far faster than the loop
    CHECK_THROWS_AS(design_pipeline(fixtures::osc_dynamics(), fixtures::ref_graph(),
                                    fixtures::ref_threshold(), fixtures::kEta0,
                                    0.6, opt),
                    SynthesisError);
  }
  {
    // requested epsilon inconsistent with s_inf
    synthesis::DesignOptions opt = fixtures::ref_options();
    opt.epsilon_request = 1e-4;
    CHECK_THROWS_AS(design_pipeline(fixtures::osc_dynamics(), fixtures::ref_graph(),
                                    fixtures::ref_threshold(), fixtures::kEta0,
                                    0.6, opt),
                    SynthesisError);
  }
}

TEST_SUITE_END();
