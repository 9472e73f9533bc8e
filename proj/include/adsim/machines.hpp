#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "adsim/mixing.hpp"
#include "adsim/problems.hpp"
#include "adsim/rng.hpp"
#include "adsim/topology.hpp"
#include "adsim/types.hpp"

namespace adsim {

enum class AlgorithmKind {
  Asbcd,            // block coordinate view of the decentralized objective
  Adsgd,
  AdsgdMemEff,
  AdsgdDoubleStep,
  SyncDsgd,
  ParallelSgd,
};

AlgorithmKind algorithm_kind_from_string(const std::string& s);
std::string to_string(AlgorithmKind k);

// One agent's view in the gossip algorithms: own model, the newest neighbor
// models, and the gradient whose computation is in flight.
struct AgentState {
  int agent_id = 0;
  ModelVector x;
  std::map<int, ModelVector> buffer;  // ordered keys = ascending send order
  std::optional<ModelVector> pending_gradient;
  double alpha = 0.0;
  std::optional<double> beta;
  std::uint64_t update_count = 0;
};

// State of the memory-efficient variant: y replaces the whole buffer with the
// weighted neighbor sum, z is the last outgoing model delta.
struct MemEffState {
  int agent_id = 0;
  ModelVector x;
  ModelVector y;
  ModelVector z;
  std::optional<ModelVector> pending_gradient;
  double alpha = 0.0;
  std::uint64_t update_count = 0;
};

// w_row(self)*x_self + sum_{j ascending} w_row(j)*buffer[j], accumulated in
// exactly that order. Every code path that must agree bitwise with another
// (gossip updates, the penalized block-descent route, the synchronous round)
// funnels through this kernel.
ModelVector mix_with_row(const Eigen::VectorXd& w_row, int self_id, const ModelVector& x_self,
                         const std::map<int, ModelVector>& buffer);

void ensure_finite_iterate(const ModelVector& x, int agent, double step);

// x_i <- w_ii x_i + sum_j w_ij x_ij - alpha g.  The gradient must have been
// evaluated at the x_i held when its computation began.
ModelVector adsgd_update(const AgentState& state, const Eigen::VectorXd& w_row,
                         const ModelVector& gradient);

// Two-step-size update [W~ x]_i - beta g, where w_tilde_row comes from
// double_step_transform(W, alpha, beta).
ModelVector double_step_update(const AgentState& state, const Eigen::VectorXd& w_tilde_row,
                               const ModelVector& gradient);

// z_i = (w_ii - 1) x_i + y_i - alpha g;  new x = x + z.  Receivers fold the
// delta in with y_j += w_ji z_i.
std::pair<ModelVector, ModelVector> memeff_update(const MemEffState& state, double w_ii,
                                                  const ModelVector& gradient);

// Plain block step x_i - alpha g, with g evaluated on the snapshot read
// before the computation began.
ModelVector asbcd_update(const ModelVector& x_block, const ModelVector& gradient_at_snapshot,
                         double alpha, int agent);

// Simultaneous synchronous round x_i <- sum_j w_ij x_j - alpha g_i.
std::vector<ModelVector> sync_dsgd_round(const std::vector<ModelVector>& states,
                                         const MixingMatrix& w, double alpha,
                                         const std::vector<ModelVector>& gradients);

// Ring reduce-scatter + allgather over agent-id order; returns the reduced
// sum (associated along the ring) shared bitwise by every replica.
ModelVector ring_allreduce_sum(const std::vector<ModelVector>& gradients);

// ----- engine-driven state machines ---------------------------------------

// The event loop drives algorithms through this interface. Arrivals carry the
// sender's model (or delta) and its version; commit applies the pending
// gradient and returns the new local model.
class AsyncAlgorithm {
 public:
  virtual ~AsyncAlgorithm() = default;
  virtual int n_agents() const = 0;
  virtual void gradient_begin(int agent) = 0;
  virtual void on_arrival(int agent, int src, std::uint64_t version,
                          const ModelVector& payload) = 0;
  virtual const ModelVector& commit(int agent) = 0;
  virtual ModelVector outgoing_payload(int agent) const = 0;
  virtual ModelVector initial_payload(int agent) const = 0;
  virtual const ModelVector& model(int agent) const = 0;
};

class AdsgdMachine : public AsyncAlgorithm {
 public:
  AdsgdMachine(std::vector<LocalProblem> problems, const Topology& topology,
               MixingMatrix w, double step, const ModelVector& x0, std::uint64_t seed);

  int n_agents() const override { return static_cast<int>(states_.size()); }
  void gradient_begin(int agent) override;
  void on_arrival(int agent, int src, std::uint64_t version, const ModelVector& payload) override;
  const ModelVector& commit(int agent) override;
  ModelVector outgoing_payload(int agent) const override { return states_[agent].x; }
  ModelVector initial_payload(int agent) const override;
  const ModelVector& model(int agent) const override { return states_[agent].x; }

  const AgentState& state(int agent) const { return states_[agent]; }

 protected:
  std::vector<LocalProblem> problems_;
  MixingMatrix w_;
  std::vector<AgentState> states_;
  std::vector<RngStream> grad_rng_;
  ModelVector x0_;
};

// ADSGD with step sizes (alpha, beta): literally AdsgdMachine on the
// reweighted matrix with step beta.
std::unique_ptr<AdsgdMachine> make_double_step_machine(std::vector<LocalProblem> problems,
                                                       const Topology& topology,
                                                       const MixingMatrix& w, double alpha,
                                                       double beta, const ModelVector& x0,
                                                       std::uint64_t seed);

class MemEffAdsgdMachine : public AsyncAlgorithm {
 public:
  MemEffAdsgdMachine(std::vector<LocalProblem> problems, const Topology& topology,
                     MixingMatrix w, double step, const ModelVector& x0, std::uint64_t seed);

  int n_agents() const override { return static_cast<int>(states_.size()); }
  void gradient_begin(int agent) override;
  void on_arrival(int agent, int src, std::uint64_t version, const ModelVector& payload) override;
  const ModelVector& commit(int agent) override;
  ModelVector outgoing_payload(int agent) const override { return states_[agent].z; }
  ModelVector initial_payload(int agent) const override;
  const ModelVector& model(int agent) const override { return states_[agent].x; }

  const MemEffState& state(int agent) const { return states_[agent]; }

 private:
  std::vector<LocalProblem> problems_;
  MixingMatrix w_;
  std::vector<MemEffState> states_;
  std::vector<RngStream> grad_rng_;
  ModelVector x0_;
};

// Block coordinate descent over the decentralized objective plus the mixing
// penalty. The neighbor models are read at commit time (the buffered global
// model is only consumed after the gradient is available), and the step is
// the exactly rewritten mixing form, so trajectories coincide bitwise with
// AdsgdMachine on the same schedule.
class AsbcdPenaltyMachine : public AsyncAlgorithm {
 public:
  AsbcdPenaltyMachine(std::vector<LocalProblem> problems, const Topology& topology,
                      MixingMatrix w, double step, const ModelVector& x0, std::uint64_t seed);

  int n_agents() const override { return static_cast<int>(states_.size()); }
  void gradient_begin(int agent) override;
  void on_arrival(int agent, int src, std::uint64_t version, const ModelVector& payload) override;
  const ModelVector& commit(int agent) override;
  ModelVector outgoing_payload(int agent) const override { return states_[agent].x; }
  ModelVector initial_payload(int agent) const override;
  const ModelVector& model(int agent) const override { return states_[agent].x; }

  // Penalized objective value at a stacked iterate, for diagnostics.
  double penalized_loss(const std::vector<ModelVector>& stacked) const;

 private:
  std::vector<LocalProblem> problems_;
  MixingMatrix w_;
  std::vector<AgentState> states_;
  std::vector<RngStream> grad_rng_;
  ModelVector x0_;
};

// Generic asynchronous block coordinate descent on a BlockProblem over a
// complete exchange graph. The full snapshot is assembled when the gradient
// computation starts; that is the defining timing contrast with the gossip
// machines above.
class AsbcdBlockMachine : public AsyncAlgorithm {
 public:
  AsbcdBlockMachine(BlockProblem problem, const std::vector<ModelVector>& x0,
                    double step, std::uint64_t seed);

  int n_agents() const override { return static_cast<int>(blocks_.size()); }
  void gradient_begin(int agent) override;
  void on_arrival(int agent, int src, std::uint64_t version, const ModelVector& payload) override;
  const ModelVector& commit(int agent) override;
  ModelVector outgoing_payload(int agent) const override { return blocks_[agent]; }
  ModelVector initial_payload(int agent) const override { return x0_[agent]; }
  const ModelVector& model(int agent) const override { return blocks_[agent]; }

  ModelVector stacked() const;

 private:
  ModelVector assemble(int agent) const;

  BlockProblem problem_;
  double alpha_;
  std::vector<ModelVector> blocks_;                  // own block per agent
  std::vector<std::map<int, ModelVector>> buffers_;  // other blocks, per agent
  std::vector<std::optional<ModelVector>> pending_;
  std::vector<RngStream> grad_rng_;
  std::vector<ModelVector> x0_;
};

}  // namespace adsim
