#include "stsync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "stsync/errors.hpp"

namespace stsync::graph {

AccessibilityGraph build_graph(int n_agents,
                               const std::vector<std::pair<int, int>>& edges) {
  if (n_agents < 1) {
    throw SynthesisError("build_graph: need at least one agent");
  }
  AccessibilityGraph g;
  g.n_agents = n_agents;
  std::set<std::pair<int, int>> seen;
  for (const auto& [j, i] : edges) {
    if (j < 1 || j > n_agents || i < 1 || i > n_agents) {
      throw SynthesisError("build_graph: edge (" + std::to_string(j) + "," +
                           std::to_string(i) + ") out of range");
    }
    if (j == i) {
      throw SynthesisError("build_graph: self-loop at agent " + std::to_string(i));
    }
    if (!seen.insert({j, i}).second) {
      throw SynthesisError("build_graph: duplicate edge (" + std::to_string(j) +
                           "," + std::to_string(i) + ")");
    }
  }
  g.edges.assign(seen.begin(), seen.end());
  g.neighbor_sets.assign(static_cast<size_t>(n_agents), {});
  for (const auto& [j, i] : g.edges) {
    g.neighbor_sets[static_cast<size_t>(i - 1)].push_back(j);
  }
  for (auto& ns : g.neighbor_sets) {
    std::sort(ns.begin(), ns.end());
  }
  return g;
}

Eigen::MatrixXd laplacian(const AccessibilityGraph& g) {
  const int n = g.n_agents;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [j, i] : g.edges) {
    l(i - 1, j - 1) -= 1.0;
    l(i - 1, i - 1) += 1.0;
  }
  return l;
}

bool has_spanning_tree(const AccessibilityGraph& g) {
  const int n = g.n_agents;
  // out[j] = vertices reachable from j in one hop along j -> i.
  std::vector<std::vector<int>> out(static_cast<size_t>(n));
  for (const auto& [j, i] : g.edges) {
    out[static_cast<size_t>(j - 1)].push_back(i - 1);
  }
  for (int root = 0; root < n; ++root) {
    std::vector<bool> seen(static_cast<size_t>(n), false);
    std::vector<int> stack{root};
    seen[static_cast<size_t>(root)] = true;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : out[static_cast<size_t>(v)]) {
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = true;
          ++count;
          stack.push_back(w);
        }
      }
    }
    if (count == n) {
      return true;
    }
  }
  return false;
}

Spectrum spectral(const AccessibilityGraph& g) {
  const int n = g.n_agents;
  Spectrum s;
  s.laplacian = laplacian(g);

  Eigen::EigenSolver<Eigen::MatrixXd> es(s.laplacian);
  if (es.info() != Eigen::Success) {
    throw SynthesisError("spectral: eigen decomposition of L failed");
  }
  s.eigenvalues = es.eigenvalues();
  std::vector<int> order(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) order[static_cast<size_t>(k)] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto za = s.eigenvalues(a), zb = s.eigenvalues(b);
    if (za.real() != zb.real()) return za.real() < zb.real();
    return za.imag() < zb.imag();
  });
  Eigen::VectorXcd sorted(n);
  for (int k = 0; k < n; ++k) sorted(k) = s.eigenvalues(order[static_cast<size_t>(k)]);
  s.eigenvalues = sorted;

  int n_zero = 0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(s.eigenvalues(k)) < 1e-8) ++n_zero;
  }
  if (n_zero != 1) {
    throw SynthesisError(
        "spectral: Laplacian zero eigenvalue multiplicity is " +
        std::to_string(n_zero) + "; the graph violates Assumption 1 "
        "(directed spanning tree required)");
  }

  // Left null vector of L from the SVD of L; normalize phi^T 1 = 1.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.laplacian, Eigen::ComputeFullU);
  Eigen::VectorXd phi = svd.matrixU().col(n - 1);
  const double dot = phi.sum();
  if (std::abs(dot) < 1e-12) {
    throw SynthesisError("spectral: left null vector cannot be normalized, phi^T 1 ~ 0");
  }
  s.phi = phi / dot;

  // Orthonormal basis of ker(phi^T) from the Householder reflector that maps
  // phi/|phi| onto e1.
  if (n > 1) {
    Eigen::VectorXd v = s.phi / s.phi.norm();
    Eigen::VectorXd w = v;
    w(0) += (v(0) >= 0.0) ? 1.0 : -1.0;
    const Eigen::MatrixXd h =
        Eigen::MatrixXd::Identity(n, n) - (2.0 / w.squaredNorm()) * (w * w.transpose());
    s.x1 = h.rightCols(n - 1);

    // Least-squares solve of X1 * Lc = L * X1; with orthonormal X1 this is
    // X1^T L X1 and the residual must vanish because ker(phi^T) is L-invariant.
    const Eigen::MatrixXd rhs = s.laplacian * s.x1;
    const Eigen::MatrixXd lc =
        s.x1.colPivHouseholderQr().solve(rhs);
    const double resid = (s.x1 * lc - rhs).norm();
    if (resid > 1e-10 * (1.0 + s.laplacian.norm())) {
      throw SynthesisError("spectral: reduced Laplacian residual too large: " +
                           std::to_string(resid));
    }
    s.l_check = lc.cast<std::complex<double>>();
  } else {
    s.x1.resize(1, 0);
    s.l_check.resize(0, 0);
  }
  return s;
}

}  // namespace stsync::graph
