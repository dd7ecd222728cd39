#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "stsync/cloud.hpp"
#include "stsync/synthesis.hpp"

namespace stsync::controller {

/// Everything agent i knows right after its atomic access at `now`:
/// the records fetched from its neighbors, its own exact state, and the
/// freshly computed ZOH input.
struct PlanContext {
  const synthesis::AgentDynamics* dyn = nullptr;
  const synthesis::DesignCertificate* cert = nullptr;
  int agent = 0;
  double now = 0.0;
  Eigen::VectorXd own_state;
  Eigen::VectorXd input;
  std::vector<cloud::CloudRecord> views;
};

/// Two-branch prediction of a neighbor's state from its record: exact ZOH
/// flow on [t_j, t_j^{next}], zero-input continuation afterwards.
Eigen::VectorXd predict_neighbor(const cloud::CloudRecord& view_j,
                                 const synthesis::AgentDynamics& dyn, double t);

/// u_i = F sum_j (x_j(now) - x_i(now)); the fetched records reconstruct the
/// neighbors' states at `now` exactly.
Eigen::VectorXd compute_input(const std::vector<cloud::CloudRecord>& views,
                              const Eigen::VectorXd& own_state,
                              const Eigen::MatrixXd& f,
                              const synthesis::AgentDynamics& dyn, double now);

/// ZOH-drift estimate ||F sum_j (xhat_j(t) - x_i(t)) - u_i||.
double trigger_f(const PlanContext& ctx, double t);

/// Unknown-future-input estimate
/// ||B|| ||F|| kappa_theta sum_{j : t > t_j^{next}} int e^{theta (t-tau)} mu_j(tau) dtau.
double trigger_g(const PlanContext& ctx, double t);

double sigma(const PlanContext& ctx, double t);

struct SigmaSample {
  double t = 0.0;
  double sigma = 0.0;
  double s = 0.0;
};

/// Smallest root of sigma_i(t) = s(t) on ]now, horizon]: marches over the
/// breakpoints where sigma changes analytic form, samples densely inside each
/// piece (step max(tau_i^*/4, tol_t)), then bisects to tol_t. Left-biased:
/// the returned time still satisfies sigma <= s. Returns +inf when no
/// crossing occurs before the horizon.
double next_access_time(const PlanContext& ctx, double horizon, double tol_t,
                        std::vector<SigmaSample>* trace = nullptr);

/// Monitor-only input error ||u_i - F sum_j (x_j(t) - x_i(t))|| from true states.
double input_error(const Eigen::VectorXd& input, const Eigen::VectorXd& own_true,
                   const std::vector<Eigen::VectorXd>& neighbor_true,
                   const Eigen::MatrixXd& f);

}  // namespace stsync::controller
