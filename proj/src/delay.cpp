#include "adsim/delay.hpp"

#include <cmath>

namespace adsim {

void DelaySampler::validate() const {
  if (hi < lo) throw ConfigError("delay sampler: hi < lo");
  if (lo < 0.0) throw ConfigError("delay sampler: negative support");
  if (mean <= 0.0 && lo != hi) throw ConfigError("delay sampler: mean must be positive");
}

double DelaySampler::sample(RngStream& rng) const {
  if (hi <= lo) return lo;  // point mass
  if (cv <= 0.0) {
    const double v = mean;
    return v < lo ? lo : (v > hi ? hi : v);
  }
  // exp(mu + s Z) has mean `mean` when mu = log(mean) - s^2/2.
  const double s2 = std::log1p(cv * cv);
  const double mu = std::log(mean) - 0.5 * s2;
  const double s = std::sqrt(s2);
  for (int attempt = 0; attempt < 4096; ++attempt) {
    const double v = std::exp(mu + s * rng.normal());
    if (v >= lo && v <= hi) return v;
  }
  throw std::runtime_error("delay sampler: support rejects nearly all mass");
}

DelaySampler make_delay_sampler(double mean, double cv, double support_lo_factor,
                                double support_hi_factor) {
  DelaySampler s;
  s.mean = mean;
  s.cv = cv;
  s.lo = mean * support_lo_factor;
  s.hi = mean * support_hi_factor;
  s.validate();
  return s;
}

void DelayModel::validate() const {
  const int count = n();
  if (static_cast<int>(transmit.size()) != count)
    throw ConfigError("delay model: transmit matrix size mismatch");
  for (const auto& s : compute) s.validate();
  for (const auto& row : transmit) {
    if (static_cast<int>(row.size()) != count)
      throw ConfigError("delay model: transmit matrix must be square");
    for (const auto& s : row) s.validate();
  }
}

DelayModel uniform_delay_model(int n, double compute_mean, double comm_mean,
                               std::uint64_t seed) {
  DelayModel m;
  m.seed = seed;
  m.compute.assign(n, make_delay_sampler(compute_mean, kComputeCv));
  m.transmit.assign(n, std::vector<DelaySampler>(n, make_delay_sampler(comm_mean, kCommCv)));
  m.validate();
  return m;
}

}  // namespace adsim
