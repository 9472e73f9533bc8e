#include "adsim/machines.hpp"

#include <cmath>

namespace adsim {

AlgorithmKind algorithm_kind_from_string(const std::string& s) {
  if (s == "asbcd") return AlgorithmKind::Asbcd;
  if (s == "adsgd") return AlgorithmKind::Adsgd;
  if (s == "adsgd_memeff") return AlgorithmKind::AdsgdMemEff;
  if (s == "adsgd_double") return AlgorithmKind::AdsgdDoubleStep;
  if (s == "sync_dsgd") return AlgorithmKind::SyncDsgd;
  if (s == "parallel_sgd") return AlgorithmKind::ParallelSgd;
  throw ConfigError("unknown algorithm: " + s);
}

std::string to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::Asbcd: return "asbcd";
    case AlgorithmKind::Adsgd: return "adsgd";
    case AlgorithmKind::AdsgdMemEff: return "adsgd_memeff";
    case AlgorithmKind::AdsgdDoubleStep: return "adsgd_double";
    case AlgorithmKind::SyncDsgd: return "sync_dsgd";
    case AlgorithmKind::ParallelSgd: return "parallel_sgd";
  }
  return "?";
}

constexpr double kDivergenceNorm = 1e12;

void ensure_finite_iterate(const ModelVector& x, int agent, double step) {
  const double norm = x.norm();
  if (!std::isfinite(norm) || norm > kDivergenceNorm || !is_finite(x))
    throw DivergenceError(agent, step, norm);
}

ModelVector mix_with_row(const Eigen::VectorXd& w_row, int self_id, const ModelVector& x_self,
                         const std::map<int, ModelVector>& buffer) {
  ModelVector acc = w_row(self_id) * x_self;
  for (const auto& [j, xj] : buffer) acc.noalias() += w_row(j) * xj;
  return acc;
}

ModelVector adsgd_update(const AgentState& state, const Eigen::VectorXd& w_row,
                         const ModelVector& gradient) {
  ModelVector out = mix_with_row(w_row, state.agent_id, state.x, state.buffer);
  out.noalias() -= state.alpha * gradient;
  ensure_finite_iterate(out, state.agent_id, state.alpha);
  return out;
}

ModelVector double_step_update(const AgentState& state, const Eigen::VectorXd& w_tilde_row,
                               const ModelVector& gradient) {
  const double beta = state.beta.value();
  ModelVector out = mix_with_row(w_tilde_row, state.agent_id, state.x, state.buffer);
  out.noalias() -= beta * gradient;
  ensure_finite_iterate(out, state.agent_id, beta);
  return out;
}

std::pair<ModelVector, ModelVector> memeff_update(const MemEffState& state, double w_ii,
                                                  const ModelVector& gradient) {
  ModelVector z = (w_ii - 1.0) * state.x;
  z.noalias() += state.y;
  z.noalias() -= state.alpha * gradient;
  ModelVector new_x = state.x + z;
  ensure_finite_iterate(new_x, state.agent_id, state.alpha);
  return {std::move(z), std::move(new_x)};
}

ModelVector asbcd_update(const ModelVector& x_block, const ModelVector& gradient_at_snapshot,
                         double alpha, int agent) {
  ModelVector out = x_block - alpha * gradient_at_snapshot;
  ensure_finite_iterate(out, agent, alpha);
  return out;
}

std::vector<ModelVector> sync_dsgd_round(const std::vector<ModelVector>& states,
                                         const MixingMatrix& w, double alpha,
                                         const std::vector<ModelVector>& gradients) {
  const int n = static_cast<int>(states.size());
  std::vector<ModelVector> out(n);
  for (int i = 0; i < n; ++i) {
    // Same kernel and association order as the asynchronous update.
    std::map<int, ModelVector> others;
    for (int j = 0; j < n; ++j)
      if (j != i && w.w(i, j) != 0.0) others.emplace(j, states[j]);
    ModelVector v = mix_with_row(w.w.row(i), i, states[i], others);
    v.noalias() -= alpha * gradients[i];
    ensure_finite_iterate(v, i, alpha);
    out[i] = std::move(v);
  }
  return out;
}

ModelVector ring_allreduce_sum(const std::vector<ModelVector>& gradients) {
  const int n = static_cast<int>(gradients.size());
  if (n == 0) throw ConfigError("allreduce over zero agents");
  const int d = static_cast<int>(gradients[0].size());
  if (n == 1) return gradients[0];

  // chunk c covers [offset[c], offset[c] + len[c])
  std::vector<int> len(n, d / n), offset(n, 0);
  for (int c = 0; c < d % n; ++c) ++len[c];
  for (int c = 1; c < n; ++c) offset[c] = offset[c - 1] + len[c - 1];

  std::vector<ModelVector> work = gradients;
  for (int phase = 0; phase < n - 1; ++phase) {
    std::vector<ModelVector> next = work;
    for (int a = 0; a < n; ++a) {
      const int c = ((a - phase) % n + n) % n;
      const int recv = (a + 1) % n;
      if (len[c] > 0)
        next[recv].segment(offset[c], len[c]) =
            work[recv].segment(offset[c], len[c]) + work[a].segment(offset[c], len[c]);
    }
    work = std::move(next);
  }
  // chunk c is complete at agent (c + n - 1) mod n
  ModelVector sum(d);
  for (int c = 0; c < n; ++c)
    if (len[c] > 0) sum.segment(offset[c], len[c]) = work[(c + n - 1) % n].segment(offset[c], len[c]);
  return sum;
}

// ----- AdsgdMachine ---------------------------------------------------------

AdsgdMachine::AdsgdMachine(std::vector<LocalProblem> problems, const Topology& topology,
                           MixingMatrix w, double step, const ModelVector& x0,
                           std::uint64_t seed)
    : problems_(std::move(problems)), w_(std::move(w)), x0_(x0) {
  const int n = topology.n();
  if (static_cast<int>(problems_.size()) != n)
    throw ConfigError("problem count must match agent count");
  states_.resize(n);
  for (int i = 0; i < n; ++i) {
    states_[i].agent_id = i;
    states_[i].x = x0;
    states_[i].alpha = step;
    for (int j : topology.neighbors(i)) states_[i].buffer.emplace(j, x0);
    grad_rng_.push_back(derive_stream(seed, "gradient", i));
  }
}

void AdsgdMachine::gradient_begin(int agent) {
  auto& s = states_[agent];
  s.pending_gradient = problems_[agent].stochastic_gradient(s.x, grad_rng_[agent]);
}

void AdsgdMachine::on_arrival(int agent, int src, std::uint64_t /*version*/,
                              const ModelVector& payload) {
  states_[agent].buffer.at(src) = payload;
}

const ModelVector& AdsgdMachine::commit(int agent) {
  auto& s = states_[agent];
  s.x = adsgd_update(s, w_.w.row(agent), s.pending_gradient.value());
  s.pending_gradient.reset();
  ++s.update_count;
  return s.x;
}

ModelVector AdsgdMachine::initial_payload(int /*agent*/) const { return x0_; }

std::unique_ptr<AdsgdMachine> make_double_step_machine(std::vector<LocalProblem> problems,
                                                       const Topology& topology,
                                                       const MixingMatrix& w, double alpha,
                                                       double beta, const ModelVector& x0,
                                                       std::uint64_t seed) {
  MixingMatrix wt = double_step_transform(w, alpha, beta);
  auto machine = std::make_unique<AdsgdMachine>(std::move(problems), topology, std::move(wt),
                                                beta, x0, seed);
  return machine;
}

// ----- MemEffAdsgdMachine ---------------------------------------------------

MemEffAdsgdMachine::MemEffAdsgdMachine(std::vector<LocalProblem> problems,
                                       const Topology& topology, MixingMatrix w, double step,
                                       const ModelVector& x0, std::uint64_t seed)
    : problems_(std::move(problems)), w_(std::move(w)), x0_(x0) {
  const int n = topology.n();
  if (static_cast<int>(problems_.size()) != n)
    throw ConfigError("problem count must match agent count");
  states_.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& s = states_[i];
    s.agent_id = i;
    s.x = x0;
    s.alpha = step;
    s.z = ModelVector::Zero(x0.size());
    s.y = ModelVector::Zero(x0.size());
    for (int j : topology.neighbors(i)) s.y.noalias() += w_.w(i, j) * x0;
    grad_rng_.push_back(derive_stream(seed, "gradient", i));
  }
}

void MemEffAdsgdMachine::gradient_begin(int agent) {
  auto& s = states_[agent];
  s.pending_gradient = problems_[agent].stochastic_gradient(s.x, grad_rng_[agent]);
}

void MemEffAdsgdMachine::on_arrival(int agent, int src, std::uint64_t version,
                                    const ModelVector& payload) {
  // Version 0 is the initial full-model broadcast, already folded into y at
  // construction; later payloads are deltas.
  if (version == 0) return;
  states_[agent].y.noalias() += w_.w(agent, src) * payload;
}

const ModelVector& MemEffAdsgdMachine::commit(int agent) {
  auto& s = states_[agent];
  auto [z, nx] = memeff_update(s, w_.w(agent, agent), s.pending_gradient.value());
  s.z = std::move(z);
  s.x = std::move(nx);
  s.pending_gradient.reset();
  ++s.update_count;
  return s.x;
}

ModelVector MemEffAdsgdMachine::initial_payload(int /*agent*/) const { return x0_; }

// ----- AsbcdPenaltyMachine --------------------------------------------------

AsbcdPenaltyMachine::AsbcdPenaltyMachine(std::vector<LocalProblem> problems,
                                         const Topology& topology, MixingMatrix w, double step,
                                         const ModelVector& x0, std::uint64_t seed)
    : problems_(std::move(problems)), w_(std::move(w)), x0_(x0) {
  const int n = topology.n();
  states_.resize(n);
  for (int i = 0; i < n; ++i) {
    states_[i].agent_id = i;
    states_[i].x = x0;
    states_[i].alpha = step;
    for (int j : topology.neighbors(i)) states_[i].buffer.emplace(j, x0);
    grad_rng_.push_back(derive_stream(seed, "gradient", i));
  }
}

void AsbcdPenaltyMachine::gradient_begin(int agent) {
  auto& s = states_[agent];
  // Block gradient of the smooth part at the block's own coordinates; the
  // penalty part enters at commit through the buffered global model.
  s.pending_gradient = problems_[agent].stochastic_gradient(s.x, grad_rng_[agent]);
}

void AsbcdPenaltyMachine::on_arrival(int agent, int src, std::uint64_t /*version*/,
                                     const ModelVector& payload) {
  states_[agent].buffer.at(src) = payload;
}

const ModelVector& AsbcdPenaltyMachine::commit(int agent) {
  auto& s = states_[agent];
  // Block step x - alpha * (g_F + (x - [Wx]_i)/alpha), written in its exact
  // cancelled form [Wx]_i - alpha g_F.
  ModelVector out = mix_with_row(w_.w.row(agent), agent, s.x, s.buffer);
  out.noalias() -= s.alpha * s.pending_gradient.value();
  ensure_finite_iterate(out, agent, s.alpha);
  s.x = std::move(out);
  s.pending_gradient.reset();
  ++s.update_count;
  return s.x;
}

ModelVector AsbcdPenaltyMachine::initial_payload(int /*agent*/) const { return x0_; }

double AsbcdPenaltyMachine::penalized_loss(const std::vector<ModelVector>& stacked) const {
  const int n = static_cast<int>(stacked.size());
  double value = 0.0;
  for (int i = 0; i < n; ++i) value += problems_[i].loss(stacked[i]);
  double penalty = 0.0;  // x^T (I - W) x / (2 alpha)
  for (int i = 0; i < n; ++i) {
    penalty += stacked[i].squaredNorm();
    for (int j = 0; j < n; ++j) penalty -= w_.w(i, j) * stacked[i].dot(stacked[j]);
  }
  return value + penalty / (2.0 * states_[0].alpha);
}

// ----- AsbcdBlockMachine ----------------------------------------------------

AsbcdBlockMachine::AsbcdBlockMachine(BlockProblem problem, const std::vector<ModelVector>& x0,
                                     double step, std::uint64_t seed)
    : problem_(std::move(problem)), alpha_(step), x0_(x0) {
  const int n = static_cast<int>(problem_.block_dims.size());
  if (static_cast<int>(x0.size()) != n)
    throw ConfigError("block initializer count mismatch");
  blocks_ = x0;
  buffers_.resize(n);
  pending_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) buffers_[i].emplace(j, x0[j]);
    grad_rng_.push_back(derive_stream(seed, "block-gradient", i));
  }
}

ModelVector AsbcdBlockMachine::assemble(int agent) const {
  ModelVector full(problem_.total_dim);
  int off = 0;
  for (int j = 0; j < n_agents(); ++j) {
    const ModelVector& part = (j == agent) ? blocks_[j] : buffers_[agent].at(j);
    full.segment(off, problem_.block_dims[j]) = part;
    off += problem_.block_dims[j];
  }
  return full;
}

void AsbcdBlockMachine::gradient_begin(int agent) {
  const ModelVector snapshot = assemble(agent);
  pending_[agent] = problem_.block_stochastic_gradient(agent, snapshot, grad_rng_[agent]);
}

void AsbcdBlockMachine::on_arrival(int agent, int src, std::uint64_t /*version*/,
                                   const ModelVector& payload) {
  buffers_[agent].at(src) = payload;
}

const ModelVector& AsbcdBlockMachine::commit(int agent) {
  blocks_[agent] = asbcd_update(blocks_[agent], pending_[agent].value(), alpha_, agent);
  pending_[agent].reset();
  return blocks_[agent];
}

ModelVector AsbcdBlockMachine::stacked() const {
  ModelVector full(problem_.total_dim);
  int off = 0;
  for (int j = 0; j < n_agents(); ++j) {
    full.segment(off, problem_.block_dims[j]) = blocks_[j];
    off += problem_.block_dims[j];
  }
  return full;
}

}  // namespace adsim
