#pragma once

#include <functional>
#include <vector>

#include "adsim/dataset.hpp"
#include "adsim/rng.hpp"
#include "adsim/types.hpp"

namespace adsim {

// One agent's local objective with exact and stochastic first-order oracles.
// Pure functions over immutable captured data; callers own the RNG stream.
struct LocalProblem {
  int agent_id = 0;
  int dim = 0;
  std::function<double(const ModelVector&)> loss;
  std::function<ModelVector(const ModelVector&)> full_gradient;
  std::function<ModelVector(const ModelVector&, RngStream&)> stochastic_gradient;
  double lower_bound = 0.0;     // f_i^*
  double smoothness = 0.0;      // L_i
  double variance_bound = 0.0;  // sigma^2
};

// Block-structured objective over the stacked variable; block i owns
// block_dims[i] coordinates.
struct BlockProblem {
  std::vector<int> block_dims;
  int total_dim = 0;
  std::function<double(const ModelVector&)> loss;
  std::function<ModelVector(int, const ModelVector&)> block_gradient;
  std::function<ModelVector(int, const ModelVector&, RngStream&)> block_stochastic_gradient;
  double smoothness = 0.0;
  double lower_bound = 0.0;

  int block_offset(int i) const;
};

// Least-squares family f_i(x) = 0.5 |A_i x - b_i|^2 with A_i^T A_i spectrum
// spanning [1, condition] and b_i = A_i x_i^*, so each local minimum is 0 and
// every constant is known in closed form. shared_minimizer makes all agents
// agree on x^*, which removes the consensus bias floor.
struct QuadraticFamily {
  std::vector<LocalProblem> problems;
  std::vector<Eigen::MatrixXd> a;
  std::vector<ModelVector> b;
  std::vector<ModelVector> minimizer;  // per-agent x_i^*
};

QuadraticFamily make_quadratic(int n, int d, std::uint64_t seed, double condition,
                               double noise_sigma2 = 0.0, bool shared_minimizer = false);

// f_i(x) = mean logistic loss over the shard + reg_weight * sum_j x_j^2/(1+x_j^2).
// Stochastic gradients are minibatches drawn uniformly with replacement.
struct LogRegParams {
  double reg_weight = 0.0;
  int batch_size = 32;
};

std::vector<LocalProblem> make_nonconvex_logreg(const Dataset& dataset,
                                                const std::vector<std::vector<int>>& shards,
                                                const LogRegParams& params);

// Separable quadratic over blocks, for coordinate-descent style runs:
// f(x) = sum_i 0.5 |A_i x_i - b_i|^2.
BlockProblem make_quadratic_block(const std::vector<int>& block_dims, std::uint64_t seed,
                                  double condition, double noise_sigma2 = 0.0);

// max over sampled pairs of |grad f(x) - grad f(y)| / |x - y|. A step-size
// aid, not a proof of smoothness.
double estimate_smoothness(const LocalProblem& problem, int trials, RngStream& rng);

double global_loss(const std::vector<LocalProblem>& problems, const ModelVector& x);
ModelVector global_gradient(const std::vector<LocalProblem>& problems, const ModelVector& x);
double max_smoothness(const std::vector<LocalProblem>& problems);
double sum_lower_bound_gap(const std::vector<LocalProblem>& problems, const ModelVector& x0);

}  // namespace adsim
