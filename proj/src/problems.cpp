#include "adsim/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace adsim {

int BlockProblem::block_offset(int i) const {
  int off = 0;
  for (int b = 0; b < i; ++b) off += block_dims[b];
  return off;
}

namespace {

Eigen::MatrixXd random_orthogonal(int d, RngStream& rng) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

// A = U diag(sqrt(spectrum)) V^T with A^T A eigenvalues exactly `spectrum`.
Eigen::MatrixXd matrix_with_spectrum(int d, double condition, RngStream& rng) {
  Eigen::VectorXd spectrum(d);
  if (d == 1) {
    spectrum(0) = condition;
  } else {
    for (int j = 0; j < d; ++j)
      spectrum(j) = 1.0 + (condition - 1.0) * double(j) / double(d - 1);
  }
  Eigen::MatrixXd u = random_orthogonal(d, rng);
  Eigen::MatrixXd v = random_orthogonal(d, rng);
  return u * spectrum.cwiseSqrt().asDiagonal() * v.transpose();
}

// Zero-mean noise with E|noise|^2 = sigma2 and support truncated at four
// per-component standard deviations (symmetric truncation keeps it unbiased
// and the second moment below the untruncated one).
ModelVector bounded_noise(int d, double sigma2, RngStream& rng) {
  ModelVector noise = ModelVector::Zero(d);
  if (sigma2 <= 0.0) return noise;
  const double comp_sd = std::sqrt(sigma2 / d);
  for (int j = 0; j < d; ++j) {
    double z;
    do {
      z = rng.normal();
    } while (std::abs(z) > 4.0);
    noise(j) = comp_sd * z;
  }
  return noise;
}

}  // namespace

QuadraticFamily make_quadratic(int n, int d, std::uint64_t seed, double condition,
                               double noise_sigma2, bool shared_minimizer) {
  if (n < 1) throw ConfigError("make_quadratic: n must be >= 1");
  if (d < 1) throw ConfigError("make_quadratic: d must be >= 1");
  if (condition < 1.0) throw ConfigError("make_quadratic: condition must be >= 1");

  QuadraticFamily fam;
  RngStream build = derive_stream(seed, "quadratic-build");
  ModelVector shared_xstar(d);
  for (int j = 0; j < d; ++j) shared_xstar(j) = build.normal();

  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd a = matrix_with_spectrum(d, condition, build);
    ModelVector xstar = shared_xstar;
    if (!shared_minimizer)
      for (int j = 0; j < d; ++j) xstar(j) = build.normal();
    ModelVector b = a * xstar;

    auto a_ptr = std::make_shared<Eigen::MatrixXd>(a);
    auto b_ptr = std::make_shared<ModelVector>(b);
    LocalProblem p;
    p.agent_id = i;
    p.dim = d;
    p.loss = [a_ptr, b_ptr](const ModelVector& x) {
      return 0.5 * (*a_ptr * x - *b_ptr).squaredNorm();
    };
    p.full_gradient = [a_ptr, b_ptr](const ModelVector& x) -> ModelVector {
      return a_ptr->transpose() * (*a_ptr * x - *b_ptr);
    };
    p.stochastic_gradient = [a_ptr, b_ptr, noise_sigma2, d](const ModelVector& x,
                                                            RngStream& rng) -> ModelVector {
      ModelVector g = a_ptr->transpose() * (*a_ptr * x - *b_ptr);
      if (noise_sigma2 > 0.0) g += bounded_noise(d, noise_sigma2, rng);
      return g;
    };
    p.lower_bound = 0.0;
    p.smoothness = condition;  // largest eigenvalue of A^T A by construction
    p.variance_bound = noise_sigma2;
    fam.problems.push_back(std::move(p));
    fam.a.push_back(std::move(a));
    fam.b.push_back(std::move(b));
    fam.minimizer.push_back(std::move(xstar));
  }
  return fam;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::vector<LocalProblem> make_nonconvex_logreg(const Dataset& dataset,
                                                const std::vector<std::vector<int>>& shards,
                                                const LogRegParams& params) {
  if (dataset.size() == 0) throw ConfigError("logreg: empty dataset");
  if (params.reg_weight < 0.0) throw ConfigError("logreg: reg_weight must be >= 0");
  if (params.batch_size < 1) throw ConfigError("logreg: batch_size must be >= 1");

  const int d = dataset.dim();
  auto data = std::make_shared<Dataset>(dataset);

  // Smoothness: logistic part is bounded by 0.25 * lambda_max(X^T X)/m on a
  // shard, the regularizer's curvature by 2 * reg_weight.
  auto shard_smoothness = [&](const std::vector<int>& shard) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    for (int s : shard) {
      const Eigen::VectorXd a = dataset.features.row(s).transpose();
      gram += a * a.transpose();
    }
    gram /= double(shard.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    return 0.25 * es.eigenvalues().maxCoeff() + 2.0 * params.reg_weight;
  };

  std::vector<LocalProblem> out;
  for (int i = 0; i < static_cast<int>(shards.size()); ++i) {
    if (shards[i].empty())
      throw ConfigError("logreg: agent " + std::to_string(i) + " has an empty shard");
    auto shard = std::make_shared<std::vector<int>>(shards[i]);
    const double reg = params.reg_weight;
    const int batch = params.batch_size;

    auto sample_loss = [data, reg](const ModelVector& x, int s) {
      const double z = data->features.row(s).dot(x);
      return softplus(z) - double(data->labels[s]) * z;
    };
    auto sample_gradient_into = [data](const ModelVector& x, int s, ModelVector& g,
                                       double scale) {
      const double z = data->features.row(s).dot(x);
      const double coeff = scale * (sigmoid(z) - double(data->labels[s]));
      g.noalias() += coeff * data->features.row(s).transpose();
    };
    auto reg_loss = [reg](const ModelVector& x) {
      double r = 0.0;
      for (int j = 0; j < x.size(); ++j) r += x(j) * x(j) / (1.0 + x(j) * x(j));
      return reg * r;
    };
    auto reg_gradient_into = [reg](const ModelVector& x, ModelVector& g) {
      for (int j = 0; j < x.size(); ++j) {
        const double denom = 1.0 + x(j) * x(j);
        g(j) += reg * 2.0 * x(j) / (denom * denom);
      }
    };

    LocalProblem p;
    p.agent_id = i;
    p.dim = d;
    p.loss = [shard, sample_loss, reg_loss](const ModelVector& x) {
      double total = 0.0;
      for (int s : *shard) total += sample_loss(x, s);
      return total / double(shard->size()) + reg_loss(x);
    };
    p.full_gradient = [shard, sample_gradient_into, reg_gradient_into, d](
                          const ModelVector& x) -> ModelVector {
      ModelVector g = ModelVector::Zero(d);
      const double scale = 1.0 / double(shard->size());
      for (int s : *shard) sample_gradient_into(x, s, g, scale);
      reg_gradient_into(x, g);
      return g;
    };
    p.stochastic_gradient = [shard, sample_gradient_into, reg_gradient_into, d, batch](
                                const ModelVector& x, RngStream& rng) -> ModelVector {
      ModelVector g = ModelVector::Zero(d);
      const double scale = 1.0 / double(batch);
      for (int t = 0; t < batch; ++t) {
        const int s = (*shard)[rng.uniform_below(shard->size())];
        sample_gradient_into(x, s, g, scale);
      }
      reg_gradient_into(x, g);
      return g;
    };
    p.lower_bound = 0.0;
    p.smoothness = shard_smoothness(shards[i]);

    // Minibatch variance at a few probe points, with headroom; the regularizer
    // is deterministic and cancels.
    RngStream probe = derive_stream(0xabcdef, "logreg-variance", i);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      ModelVector x = ModelVector::Zero(d);
      if (trial > 0)
        for (int j = 0; j < d; ++j) x(j) = probe.normal();
      ModelVector mean = p.full_gradient(x);
      double second = 0.0;
      const int draws = 200;
      for (int t = 0; t < draws; ++t)
        second += (p.stochastic_gradient(x, probe) - mean).squaredNorm();
      worst = std::max(worst, second / draws);
    }
    p.variance_bound = 2.0 * worst + 1e-12;
    out.push_back(std::move(p));
  }
  return out;
}

BlockProblem make_quadratic_block(const std::vector<int>& block_dims, std::uint64_t seed,
                                  double condition, double noise_sigma2) {
  if (block_dims.empty()) throw ConfigError("block problem needs blocks");
  const int n = static_cast<int>(block_dims.size());
  QuadraticFamily parts;
  RngStream build = derive_stream(seed, "block-quadratic");
  std::vector<Eigen::MatrixXd> a(n);
  std::vector<ModelVector> b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = matrix_with_spectrum(block_dims[i], condition, build);
    ModelVector xstar(block_dims[i]);
    for (int j = 0; j < block_dims[i]; ++j) xstar(j) = build.normal();
    b[i] = a[i] * xstar;
  }

  BlockProblem bp;
  bp.block_dims = block_dims;
  bp.total_dim = std::accumulate(block_dims.begin(), block_dims.end(), 0);
  std::vector<int> offsets(n);
  for (int i = 0, off = 0; i < n; off += block_dims[i], ++i) offsets[i] = off;

  auto a_ptr = std::make_shared<std::vector<Eigen::MatrixXd>>(std::move(a));
  auto b_ptr = std::make_shared<std::vector<ModelVector>>(std::move(b));
  auto dims = std::make_shared<std::vector<int>>(block_dims);
  auto offs = std::make_shared<std::vector<int>>(offsets);

  bp.loss = [a_ptr, b_ptr, dims, offs, n](const ModelVector& x) {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      total += 0.5 * ((*a_ptr)[i] * x.segment((*offs)[i], (*dims)[i]) - (*b_ptr)[i])
                         .squaredNorm();
    return total;
  };
  bp.block_gradient = [a_ptr, b_ptr, dims, offs](int i, const ModelVector& x) -> ModelVector {
    return (*a_ptr)[i].transpose() *
           ((*a_ptr)[i] * x.segment((*offs)[i], (*dims)[i]) - (*b_ptr)[i]);
  };
  bp.block_stochastic_gradient = [bp_grad = bp.block_gradient, dims, noise_sigma2](
                                     int i, const ModelVector& x,
                                     RngStream& rng) -> ModelVector {
    ModelVector g = bp_grad(i, x);
    if (noise_sigma2 > 0.0) g += bounded_noise((*dims)[i], noise_sigma2, rng);
    return g;
  };
  bp.smoothness = condition;
  bp.lower_bound = 0.0;
  return bp;
}

double estimate_smoothness(const LocalProblem& problem, int trials, RngStream& rng) {
  if (trials < 1) throw ConfigError("estimate_smoothness: trials must be >= 1");
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    ModelVector x(problem.dim), y(problem.dim);
    for (int j = 0; j < problem.dim; ++j) x(j) = rng.normal();
    for (int j = 0; j < problem.dim; ++j) y(j) = rng.normal();
    const double dist = (x - y).norm();
    if (dist < 1e-12) continue;  // degenerate pair
    const double ratio = (problem.full_gradient(x) - problem.full_gradient(y)).norm() / dist;
    best = std::max(best, ratio);
  }
  return best;
}

double global_loss(const std::vector<LocalProblem>& problems, const ModelVector& x) {
  double total = 0.0;
  for (const auto& p : problems) total += p.loss(x);
  return total;
}

ModelVector global_gradient(const std::vector<LocalProblem>& problems, const ModelVector& x) {
  ModelVector g = ModelVector::Zero(x.size());
  for (const auto& p : problems) g += p.full_gradient(x);
  return g;
}

double max_smoothness(const std::vector<LocalProblem>& problems) {
  double m = 0.0;
  for (const auto& p : problems) m = std::max(m, p.smoothness);
  return m;
}

double sum_lower_bound_gap(const std::vector<LocalProblem>& problems, const ModelVector& x0) {
  double gap = 0.0;
  for (const auto& p : problems) gap += p.loss(x0) - p.lower_bound;
  return gap;
}

}  // namespace adsim
