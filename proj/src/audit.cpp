#include "adsim/audit.hpp"

#include <algorithm>
#include <cmath>

namespace adsim {

std::vector<VirtualIndexEntry> reconstruct_virtual_index(std::vector<TraceEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.seq < b.seq;
  });
  std::vector<VirtualIndexEntry> out;
  std::uint64_t k = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::Update) continue;
    if (e.agent < 0) throw std::runtime_error("malformed trace: update without agent");
    out.push_back(VirtualIndexEntry{k++, e.agent, e.time, e.seq});
  }
  return out;
}

StalenessAnalysis::StalenessAnalysis(const EventTrace& trace, const Topology& topology)
    : n_(topology.n()) {
  std::vector<TraceEvent> events = trace.events;
  std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.seq < b.seq;
  });

  update_ks_.assign(n_, {});
  std::uint64_t k = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::Update) continue;
    if (e.agent < 0 || e.agent >= n_)
      throw std::runtime_error("malformed trace: update agent out of range");
    index_.push_back(VirtualIndexEntry{k, e.agent, e.time, e.seq});
    update_ks_[e.agent].push_back(k);
    ++k;
  }
  final_k_ = k == 0 ? 0 : k - 1;

  std::vector<std::vector<std::uint64_t>> latest(n_, std::vector<std::uint64_t>(n_, 0));
  std::vector<std::vector<std::uint64_t>> frozen = latest;  // view at gradient start
  record_span_.assign(index_.size(), {0, 0});

  auto staleness_of = [this](std::uint64_t at_k, int j, std::uint64_t version) {
    const std::int64_t next = next_update_index(j, version);
    return std::min<std::int64_t>(static_cast<std::int64_t>(at_k), next);
  };

  std::uint64_t cursor = 0;
  for (const auto& e : events) {
    if (e.kind == EventKind::Arrival) {
      if (e.src >= 0 && e.dst >= 0) latest[e.dst][e.src] = e.version;
      continue;
    }
    if (e.kind != EventKind::Update) continue;
    const int i = e.agent;
    const std::uint64_t this_k = cursor++;
    const std::size_t begin = records_.size();
    records_.push_back(StalenessRecord{this_k, i, i, static_cast<std::int64_t>(this_k),
                                       static_cast<std::int64_t>(this_k), e.version,
                                       e.version});
    for (int j : topology.neighbors(i)) {
      StalenessRecord r;
      r.k = this_k;
      r.i = i;
      r.j = j;
      r.v_grad_start = frozen[i][j];
      r.v_commit = latest[i][j];
      r.s_grad_start = staleness_of(this_k, j, r.v_grad_start);
      r.s_commit = staleness_of(this_k, j, r.v_commit);
      records_.push_back(r);
    }
    record_span_[this_k] = {begin, records_.size()};
    // The agent's next gradient starts now; freeze its current view.
    frozen[i] = latest[i];
  }
}

std::int64_t StalenessAnalysis::production_index(int j, std::uint64_t version) const {
  if (version == 0) return -1;
  const auto& ks = update_ks_[j];
  if (version > ks.size()) throw std::runtime_error("version beyond trace");
  return static_cast<std::int64_t>(ks[version - 1]);
}

std::int64_t StalenessAnalysis::next_update_index(int j, std::uint64_t version) const {
  const auto& ks = update_ks_[j];
  if (version < ks.size()) return static_cast<std::int64_t>(ks[version]);
  // End of trace: the agent holding this version never updates again within
  // the recorded horizon; clamp so s = min(k, .) = k.
  return std::numeric_limits<std::int64_t>::max();
}

std::int64_t StalenessAnalysis::staleness(std::uint64_t k, int i, int j,
                                          StalenessSemantics sem) const {
  if (k >= index_.size()) throw std::invalid_argument("k beyond trace");
  if (index_[k].agent != i)
    throw std::invalid_argument("k is not an update of the requested agent");
  const auto [begin, end] = record_span_[k];
  for (std::size_t r = begin; r < end; ++r) {
    if (records_[r].j != j) continue;
    return sem == StalenessSemantics::SnapshotAtGradStart ? records_[r].s_grad_start
                                                          : records_[r].s_commit;
  }
  throw std::invalid_argument("agent j is not in the closed neighborhood of i");
}

DelayBounds StalenessAnalysis::measure_bounds() const {
  DelayBounds out;
  for (int i = 0; i < n_; ++i) {
    const auto& ks = update_ks_[i];
    if (ks.empty())
      throw std::runtime_error("agent " + std::to_string(i) +
                               " never updates; B is undefined");
    out.b_measured = std::max(out.b_measured, static_cast<std::int64_t>(ks.front() + 1));
    for (std::size_t t = 1; t < ks.size(); ++t)
      out.b_measured =
          std::max(out.b_measured, static_cast<std::int64_t>(ks[t] - ks[t - 1]));
  }
  for (const auto& r : records_) {
    const auto k = static_cast<std::int64_t>(r.k);
    out.d_grad_start = std::max(out.d_grad_start, k - r.s_grad_start);
    out.d_commit = std::max(out.d_commit, k - r.s_commit);
  }
  return out;
}

StalenessErrorReport check_staleness_error_bound(const EventTrace& trace,
                                                 const Topology& topology,
                                                 StalenessSemantics sem, double tolerance) {
  if (trace.initial_models.empty())
    throw std::runtime_error("staleness-error audit needs initial models");
  StalenessAnalysis analysis(trace, topology);
  const auto bounds = analysis.measure_bounds();
  const std::int64_t d =
      sem == StalenessSemantics::SnapshotAtGradStart ? bounds.d_grad_start : bounds.d_commit;

  const auto& updates = trace.updates;
  const std::uint64_t total = updates.size();

  // Iterate values by version, per agent; delta norms per virtual index.
  std::vector<const ModelVector*> current(topology.n());
  for (int j = 0; j < topology.n(); ++j) current[j] = &trace.initial_models[j];
  std::vector<double> delta_norm(total, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> prefix(total + 1, 0.0);

  auto value_of_version = [&](int j, std::uint64_t version) -> const ModelVector* {
    if (version == 0) return &trace.initial_models[j];
    const std::int64_t prod = analysis.production_index(j, version);
    const auto& u = updates[static_cast<std::size_t>(prod)];
    return u.has_iterate ? &u.iterate_after : nullptr;
  };

  StalenessErrorReport report;
  const auto& records = analysis.records();
  std::size_t rec_cursor = 0;
  for (std::uint64_t k = 0; k < total; ++k) {
    const auto& u = updates[k];
    bool usable = u.has_iterate;

    // lhs over the committer's closed neighborhood; own block contributes 0.
    double lhs_sq = 0.0;
    while (rec_cursor < records.size() && records[rec_cursor].k < k) ++rec_cursor;
    std::size_t r = rec_cursor;
    for (; r < records.size() && records[r].k == k; ++r) {
      const auto& rec = records[r];
      if (rec.j == rec.i) continue;
      const std::uint64_t v =
          sem == StalenessSemantics::SnapshotAtGradStart ? rec.v_grad_start : rec.v_commit;
      const ModelVector* stale = value_of_version(rec.j, v);
      if (stale == nullptr || current[rec.j] == nullptr) {
        usable = false;
        break;
      }
      lhs_sq += (*current[rec.j] - *stale).squaredNorm();
    }

    const std::int64_t lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(k) - d);
    bool window_known = true;
    for (std::int64_t t = lo; t < static_cast<std::int64_t>(k); ++t)
      if (std::isnan(delta_norm[t])) window_known = false;

    if (usable && window_known) {
      const double rhs = prefix[k] - prefix[lo];
      const double lhs = std::sqrt(lhs_sq);
      report.checked += 1;
      report.max_lhs_minus_rhs = std::max(report.max_lhs_minus_rhs, lhs - rhs);
      if (lhs > rhs + tolerance) report.violations += 1;
    } else {
      report.skipped += 1;
    }

    // Advance the iterate timeline past update k.
    if (u.has_iterate) {
      delta_norm[k] = (u.iterate_after - *current[u.agent]).norm();
      current[u.agent] = &u.iterate_after;
    } else {
      delta_norm[k] = std::numeric_limits<double>::quiet_NaN();
      current[u.agent] = nullptr;  // unknown from here on
    }
    prefix[k + 1] = prefix[k] + (std::isnan(delta_norm[k]) ? 0.0 : delta_norm[k]);
  }
  return report;
}

double penalized_smoothness(double smoothness_f, double lambda_min, double alpha) {
  return smoothness_f + (1.0 - lambda_min) / alpha;
}

BoundReport evaluate_bounds(const BoundInputs& in) {
  const double b = static_cast<double>(in.b);
  const double d = static_cast<double>(in.d);
  const double k = static_cast<double>(in.horizon);
  const double n = static_cast<double>(in.n);

  BoundReport out;
  out.c0 = d * d + 3.0 * b * b * (d + 2.0 * d * d * d);
  out.c1 = 6.0 * b * b * d * d + 3.0 * b * b + 3.0 * b * d + 3.0 * b + d;
  if (in.d >= 1) out.c2 = 6.0 * b * b * d + 3.0 * b * b / d + 1.0;

  const double half_shift = d + 0.5;

  // Fixed-step bound for the block method, valid for alpha < 1/((D+1/2)L).
  const double l = in.smoothness;
  out.block_rate_admissible = in.alpha > 0.0 && in.alpha * half_shift * l < 1.0;
  if (out.block_rate_admissible) {
    const double denom = 1.0 - half_shift * l * in.alpha;
    const double term1 =
        3.0 * n * (b + out.c0 * l * l * in.alpha * in.alpha) / (in.alpha * denom) * in.f_gap / k;
    const double term2 =
        in.alpha *
        (3.0 * n * out.c0 * l * l * in.alpha + l * (d + 1.0) / (2.0 * denom)) * in.sigma2;
    out.block_rate_rhs = term1 + term2;
  }

  // Tuned-step block bound at alpha = 1/(2(D+1/2)L sqrt(K)); needs D >= 1.
  if (in.d >= 1) {
    out.block_sqrtk_rhs = n * l * out.c1 * in.f_gap / std::sqrt(k) +
                          (1.0 / std::sqrt(k) + 3.0 * n * out.c2.value() / (4.0 * k)) * in.sigma2;
  }

  // Two-step-size gossip bound, valid for beta < 1/((D+1/2)L_L).
  const double ll = in.smoothness_penalized;
  const double lf = in.smoothness_f;
  out.gossip_rate_admissible = in.beta > 0.0 && in.alpha > 0.0 &&
                               in.beta * half_shift * ll < 1.0 && in.lambda2 < 1.0;
  if (out.gossip_rate_admissible) {
    const double denom = 1.0 - half_shift * ll * in.beta;
    const double term1 = 6.0 * n * n * (b + out.c0 * ll * ll * in.beta * in.beta) /
                         (in.beta * denom) * in.f_gap / k;
    const double term2 =
        ll * in.beta * (6.0 * n * n * out.c0 * ll * in.beta + n * (d + 1.0) / denom) * in.sigma2;
    const double term3 = 4.0 * n * lf * lf * in.alpha / (1.0 - in.lambda2) *
                         (in.f_gap + 0.5 * (d + 1.0) * k * ll * in.beta * in.beta * in.sigma2);
    out.gossip_rate_rhs = term1 + term2 + term3;
  }

  // Scheduled-step gossip bound at alpha = 2/(L_F K^(1/3)),
  // beta = 1/(4 L_F (D+1/2) K^(2/3)); needs D >= 1.
  if (in.d >= 1 && in.lambda2 < 1.0) {
    const double k13 = std::cbrt(k);
    const double k23 = k13 * k13;
    out.gossip_k13_rhs =
        (16.0 * n * n * out.c1 + 8.0 * n / (1.0 - in.lambda2)) * lf * in.f_gap / k13 +
        (n / (d * (1.0 - in.lambda2)) + 2.0 * n) * in.sigma2 / k13 +
        1.5 * n * n * out.c0 / d * in.sigma2 / k23;
  }
  return out;
}

}  // namespace adsim
