#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace stsync::graph {

/// Directed accessibility graph. An edge (j, i) authorizes agent i to read
/// agent j's cloud record. Topology is frozen after construction.
struct AccessibilityGraph {
  int n_agents = 0;
  std::vector<std::pair<int, int>> edges;          // (j, i), 1-based
  std::vector<std::vector<int>> neighbor_sets;     // neighbor_sets[i-1] = sorted N_i

  const std::vector<int>& neighbors(int agent) const {
    return neighbor_sets.at(static_cast<size_t>(agent - 1));
  }
};

/// Spectral data of the graph Laplacian used by the synthesis pipeline.
struct Spectrum {
  Eigen::MatrixXd laplacian;        // L, N x N
  Eigen::VectorXcd eigenvalues;     // sorted ascending by (Re, Im)
  Eigen::VectorXd phi;              // left null vector of L, phi^T 1 = 1
  Eigen::MatrixXd x1;               // N x (N-1), orthonormal basis of ker(phi^T)
  Eigen::MatrixXcd l_check;         // (N-1) x (N-1), solves X1 Lc = L X1
};

AccessibilityGraph build_graph(int n_agents,
                               const std::vector<std::pair<int, int>>& edges);

/// l_ii = |N_i|, l_ij = -1 if (j, i) is an edge, 0 otherwise.
Eigen::MatrixXd laplacian(const AccessibilityGraph& g);

/// True iff some root reaches every vertex along the edge direction j -> i.
bool has_spanning_tree(const AccessibilityGraph& g);

Spectrum spectral(const AccessibilityGraph& g);

}  // namespace stsync::graph
