#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "adsim/rng.hpp"
#include "adsim/types.hpp"

namespace adsim {

// Log-normal shape rescaled to a target mean and truncated (by rejection) to
// [lo, hi]. Finite positive support is what keeps the asynchrony bounds B and
// D finite. lo == hi yields a point mass.
struct DelaySampler {
  double mean = 1.0;
  double cv = 0.0;  // coefficient of variation of the untruncated shape
  double lo = 1.0;
  double hi = 1.0;

  double sample(RngStream& rng) const;
  void validate() const;
};

DelaySampler make_delay_sampler(double mean, double cv,
                                double support_lo_factor = 0.125,
                                double support_hi_factor = 8.0);

// Per-agent compute samplers plus a dense matrix of per-directed-link
// transmit samplers (dense so ring collectives have link costs on any
// topology). The sampled link delay is the serial port occupancy time;
// `propagation` is an optional constant added on top of the departure
// completion, kept constant so per-link FIFO delivery is preserved.
struct DelayModel {
  std::vector<DelaySampler> compute;              // size n
  std::vector<std::vector<DelaySampler>> transmit;  // n x n, diagonal unused
  double propagation = 0.0;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(compute.size()); }
  void validate() const;
};

// Default shape parameters: communication has four times the variance of
// computation at equal means.
inline constexpr double kComputeCv = 0.25;
inline constexpr double kCommCv = 0.5;

DelayModel uniform_delay_model(int n, double compute_mean, double comm_mean,
                               std::uint64_t seed);

}  // namespace adsim
