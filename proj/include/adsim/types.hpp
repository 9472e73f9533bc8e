#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace adsim {

// Dense model parameters; the unit of agent state, message payload and
// gradient. One experiment fixes the dimension for all vectors.
using ModelVector = Eigen::VectorXd;

inline bool is_finite(const ModelVector& v) { return v.allFinite(); }

// Thrown by an algorithm when an iterate stops being finite or its norm
// explodes; the runner flags the run instead of aborting the suite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int agent, double step, double norm)
      : std::runtime_error("divergent iterate at agent " + std::to_string(agent) +
                           " (step=" + std::to_string(step) +
                           ", |x|=" + std::to_string(norm) + ")"),
        agent(agent),
        step_size(step),
        iterate_norm(norm) {}
  int agent;
  double step_size;
  double iterate_norm;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adsim
