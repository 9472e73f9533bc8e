#pragma once

#include <Eigen/Dense>

#include "adsim/topology.hpp"

namespace adsim {

// Symmetric stochastic mixing matrix supported on the communication graph,
// together with the spectral quantities the step-size rules need.
struct MixingMatrix {
  Eigen::MatrixXd w;
  double lambda2 = 0.0;     // second-largest eigenvalue
  double lambda_min = 0.0;  // smallest eigenvalue

  int n() const { return static_cast<int>(w.rows()); }
  double operator()(int i, int j) const { return w(i, j); }
};

// Metropolis-Hastings weights: w_ij = 1/(1 + max(deg_i, deg_j)) on edges,
// diagonal takes the slack. Valid on any connected graph without global
// coordination.
MixingMatrix metropolis_weights(const Topology& topology);

// (lambda2, lambda_min) by dense symmetric eigendecomposition. Throws on a
// non-symmetric input.
std::pair<double, double> spectral_quantities(const Eigen::MatrixXd& w);

// Reweighting used by the two-step-size scheme:
//   out_ii = (1 - beta/alpha) + (beta/alpha) w_ii,  out_ij = (beta/alpha) w_ij.
// Requires 0 < beta <= alpha; beta > alpha could make a diagonal entry
// negative.
MixingMatrix double_step_transform(const MixingMatrix& w, double alpha, double beta);

// Rebuilds the spectral fields from an explicit weight matrix, validating
// symmetry, row sums, nonnegativity, and (optionally) graph sparsity.
MixingMatrix make_mixing_matrix(Eigen::MatrixXd w, const Topology* sparsity = nullptr);

}  // namespace adsim
