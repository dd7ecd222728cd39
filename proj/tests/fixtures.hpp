// Shared reference setup for tests: the bundled four-oscillator scenario.
#pragma once

#include <Eigen/Dense>

#include "stsync/graph.hpp"
#include "stsync/synthesis.hpp"

namespace fixtures {

inline stsync::synthesis::AgentDynamics osc_dynamics() {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0.0, -0.4, 0.4, 0.0;
  b << 1.0, 0.0, 0.0, 1.0;
  return stsync::synthesis::make_dynamics(a, b);
}

inline std::vector<std::pair<int, int>> ref_edges() {
  return {{1, 3}, {2, 1}, {3, 2}, {3, 4}, {4, 1}};
}

inline stsync::graph::AccessibilityGraph ref_graph() {
  return stsync::graph::build_graph(4, ref_edges());
}

inline stsync::synthesis::Threshold ref_threshold() {
  return {1.0, 0.01, 0.3};
}

constexpr double kVarrho = 0.6;
constexpr double kEta0 = 15.12;
constexpr double kKappaRef = 2.3268;   // designer-chosen contraction pair
constexpr double kLambdaRef = 0.7736;

inline stsync::synthesis::DesignOptions ref_options() {
  stsync::synthesis::DesignOptions opt;
  opt.contraction_pair = {{kKappaRef, kLambdaRef}};
  return opt;
}

inline stsync::synthesis::DesignCertificate design_reference() {
  return stsync::synthesis::design_pipeline(osc_dynamics(), ref_graph(),
                                            ref_threshold(), kEta0, kVarrho,
                                            ref_options());
}

inline Eigen::VectorXd ref_x0() {
  Eigen::VectorXd x0(8);
  x0 << 4, 4, -4, 2, 2, -5, -3, -3;
  return x0;
}

}  // namespace fixtures
