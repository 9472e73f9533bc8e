#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adsim/topology.hpp"
#include "adsim/trace.hpp"

namespace adsim {

// Analysis-only global counter: k increments by one per committed update,
// ordered by (time, seq). Agents never see it.
struct VirtualIndexEntry {
  std::uint64_t k = 0;
  int agent = -1;  // i_k
  double sim_time = 0.0;
  std::uint64_t seq = 0;
};

// Order-independent: the input is sorted internally before indices are
// assigned.
std::vector<VirtualIndexEntry> reconstruct_virtual_index(std::vector<TraceEvent> events);

enum class StalenessSemantics {
  SnapshotAtGradStart,  // buffered global model read before the computation
  SnapshotAtCommit,     // neighbor models mixed in after the gradient is ready
};

struct StalenessRecord {
  std::uint64_t k = 0;
  int i = -1;
  int j = -1;
  std::int64_t s_grad_start = 0;  // block-coordinate semantics
  std::int64_t s_commit = 0;      // gossip semantics
  std::uint64_t v_grad_start = 0;  // version of x_j behind s_grad_start
  std::uint64_t v_commit = 0;      // version of x_j behind s_commit
};

struct DelayBounds {
  std::int64_t b_measured = 0;
  std::int64_t d_grad_start = 0;  // max staleness with the earlier snapshot
  std::int64_t d_commit = 0;      // max staleness at commit
};

// Reconstructs both staleness semantics for every committed update from the
// raw event stream. The gradient producing an agent's update is taken to have
// started at the agent's previous commit (or at the trace start), matching
// the engine's commit -> broadcast -> next-gradient cycle.
class StalenessAnalysis {
 public:
  StalenessAnalysis(const EventTrace& trace, const Topology& topology);

  const std::vector<VirtualIndexEntry>& virtual_index() const { return index_; }
  const std::vector<StalenessRecord>& records() const { return records_; }

  // s_ij^k under either snapshot rule; errors if k is not an update of i or
  // j is neither i nor one of its neighbors.
  std::int64_t staleness(std::uint64_t k, int i, int j, StalenessSemantics sem) const;

  // B from per-agent update gaps, D from the recorded staleness values.
  // Errors if some agent never updates (B undefined).
  DelayBounds measure_bounds() const;

  // Virtual index of the update that produced `version` of agent j's model,
  // or -1 for the initial version.
  std::int64_t production_index(int j, std::uint64_t version) const;
  // Virtual index at which agent j first updates after holding `version`;
  // clamps to the final k at end of trace.
  std::int64_t next_update_index(int j, std::uint64_t version) const;

 private:
  int n_;
  std::vector<VirtualIndexEntry> index_;
  std::vector<StalenessRecord> records_;
  std::vector<std::vector<std::uint64_t>> update_ks_;  // per agent, ascending
  std::vector<std::pair<std::size_t, std::size_t>> record_span_;  // per k in records_
  std::uint64_t final_k_ = 0;
};

// Check of the staleness-error inequality
//   |x^k - xhat^k| <= sum_{t=(k-D)+}^{k-1} |x^{t+1} - x^t|  (+ tolerance)
// against the recorded iterates, with D measured from the same trace.
struct StalenessErrorReport {
  std::uint64_t checked = 0;
  std::uint64_t skipped = 0;  // updates without stored iterates
  std::uint64_t violations = 0;
  double max_lhs_minus_rhs = -std::numeric_limits<double>::infinity();
};

StalenessErrorReport check_staleness_error_bound(const EventTrace& trace,
                                                 const Topology& topology,
                                                 StalenessSemantics sem,
                                                 double tolerance = 1e-9);

// ----- convergence-bound evaluators -----------------------------------------

struct BoundInputs {
  std::int64_t b = 1;     // update-frequency bound B
  std::int64_t d = 0;     // staleness bound D
  double smoothness = 1.0;        // L of the block objective
  double smoothness_f = 1.0;      // L_F = max_i L_i
  double smoothness_penalized = 1.0;  // L_L = L_F + (1 - lambda_n)/alpha
  double lambda2 = 0.0;           // second-largest eigenvalue of W
  int n = 1;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t horizon = 1;  // K
  double sigma2 = 0.0;
  double f_gap = 0.0;  // f(x^0) - f^*, summed over agents where applicable
};

struct BoundReport {
  double c0 = 0.0;
  double c1 = 0.0;
  std::optional<double> c2;  // needs D >= 1
  bool block_rate_admissible = false;       // alpha < 1/((D+1/2)L)
  std::optional<double> block_rate_rhs;     // fixed-step block-descent bound
  std::optional<double> block_sqrtk_rhs;    // tuned-step O(1/sqrt(K)) bound, needs D >= 1
  bool gossip_rate_admissible = false;      // beta < 1/((D+1/2)L_L)
  std::optional<double> gossip_rate_rhs;    // two-step-size gossip bound
  std::optional<double> gossip_k13_rhs;     // scheduled-step O(1/K^(1/3)) bound, needs D >= 1
};

// C0 = D^2 + 3B^2(D + 2D^3),  C1 = 6B^2D^2 + 3B^2 + 3BD + 3B + D,
// C2 = 6B^2D + 3B^2/D + 1.  Inadmissible step sizes are flagged and the
// corresponding right-hand side left empty rather than evaluated.
BoundReport evaluate_bounds(const BoundInputs& in);

// L_L as a function of the gossip step size.
double penalized_smoothness(double smoothness_f, double lambda_min, double alpha);

}  // namespace adsim
