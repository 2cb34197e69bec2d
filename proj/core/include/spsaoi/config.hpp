#ifndef SPSAOI_CONFIG_HPP
#define SPSAOI_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <variant>

namespace spsaoi {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Reservation ends each frame with probability ending_prob (memoryless).
struct GeometricCounter {};

/// Counter drawn uniformly from [lo, hi]; it decrements after every
/// transmission. When it reaches zero the node keeps its slot with
/// probability p_keep (counter redrawn) and otherwise reselects.
struct UniformCounter {
  int lo = 5;
  int hi = 15;
  double p_keep = 0.0;
};

using CounterModel = std::variant<GeometricCounter, UniformCounter>;

/// Run parameters shared by the simulator and the analytic engine.
struct SystemConfig {
  int num_nodes = 0;    // V
  int frame_size = 0;   // m, slots per frame
  double ending_prob = 0.0;  // p_E
  std::uint64_t rng_seed = 1;
  std::int64_t warmup_frames = 50000;
  std::int64_t measured_frames = 500000;
  CounterModel counter_model = GeometricCounter{};

  double load() const {
    return static_cast<double>(num_nodes) / static_cast<double>(frame_size);
  }

  /// Throws ConfigError on any violated invariant (V < m, p_E in (0,1], ...).
  void validate() const;
};

}  // namespace spsaoi

#endif  // SPSAOI_CONFIG_HPP
