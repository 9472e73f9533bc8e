#include "adsim/mixing.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "adsim/types.hpp"

namespace adsim {

namespace {

void validate(const Eigen::MatrixXd& w, const Topology* sparsity) {
  const int n = static_cast<int>(w.rows());
  if (w.cols() != n) throw ConfigError("mixing matrix must be square");
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (w(i, j) != w(j, i)) throw ConfigError("mixing matrix must be symmetric");
      if (w(i, j) < 0.0) throw ConfigError("mixing matrix must be nonnegative");
      if (sparsity && i != j && w(i, j) > 0.0 && !sparsity->has_edge(i, j))
        throw ConfigError("positive weight off the communication graph");
      row += w(i, j);
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw ConfigError("mixing matrix rows must sum to 1");
  }
}

}  // namespace

MixingMatrix make_mixing_matrix(Eigen::MatrixXd w, const Topology* sparsity) {
  validate(w, sparsity);
  auto [l2, lmin] = spectral_quantities(w);
  return MixingMatrix{std::move(w), l2, lmin};
}

MixingMatrix metropolis_weights(const Topology& topology) {
  const int n = topology.n();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : topology.edges()) {
    const double wij = 1.0 / (1.0 + std::max(topology.degree(i), topology.degree(j)));
    w(i, j) = wij;
    w(j, i) = wij;  // assign both sides once so symmetry is exact
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j : topology.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return make_mixing_matrix(std::move(w), &topology);
}

std::pair<double, double> spectral_quantities(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  if (w.cols() != n) throw ConfigError("mixing matrix must be square");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (w(i, j) != w(j, i))
        throw ConfigError("spectral_quantities requires a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  const auto& ev = solver.eigenvalues();  // ascending
  const double lambda_min = ev(0);
  const double lambda2 = n >= 2 ? ev(n - 2) : ev(0);
  return {lambda2, lambda_min};
}

MixingMatrix double_step_transform(const MixingMatrix& w, double alpha, double beta) {
  if (!(beta > 0.0) || !(alpha > 0.0))
    throw ConfigError("step sizes must be positive");
  if (beta > alpha)
    throw ConfigError(
        "beta > alpha rejected: the reweighted diagonal (1-beta/alpha)+"
        "(beta/alpha)w_ii would go negative for small w_ii");
  const double r = beta / alpha;
  const int n = w.n();
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) = (i == j) ? (1.0 - r) + r * w.w(i, j) : r * w.w(i, j);
  return make_mixing_matrix(std::move(out));
}

}  // namespace adsim
