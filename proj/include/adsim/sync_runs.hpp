#pragma once

#include "adsim/delay.hpp"
#include "adsim/engine.hpp"
#include "adsim/mixing.hpp"
#include "adsim/problems.hpp"
#include "adsim/topology.hpp"
#include "adsim/trace.hpp"

namespace adsim {

// Synchronous gossip baseline. Round timing: every agent finishes its
// gradient (barrier at the slowest compute sample), then all round-start
// models are exchanged over the serial ports; commits land when the last
// exchange completes. x_i <- sum_j w_ij x_j - alpha g_i simultaneously.
EventTrace run_sync_dsgd(const std::vector<LocalProblem>& problems, const Topology& topology,
                         const MixingMatrix& w, double alpha, const DelayModel& delays,
                         const ModelVector& x0, const EngineOptions& options,
                         const CommitHook& on_commit = {});

// Data-parallel baseline: every replica holds the same model; per round the
// gradients are summed by a ring allreduce (2(n-1) phases over agent-id
// order, each phase costing the slowest active link's per-chunk time) and all
// replicas step together: x <- x - (alpha/n) sum_i g_i.
EventTrace run_ring_allreduce(const std::vector<LocalProblem>& problems, double alpha,
                              const DelayModel& delays, const ModelVector& x0,
                              const EngineOptions& options, const CommitHook& on_commit = {});

}  // namespace adsim
