#include "spsaoi/config.hpp"

#include <string>

namespace spsaoi {

void SystemConfig::validate() const {
  if (num_nodes < 1) throw ConfigError("config: num_nodes must be >= 1");
  if (frame_size < 2) throw ConfigError("config: frame_size must be >= 2");
  if (num_nodes >= frame_size) {
    throw ConfigError("config: requires num_nodes < frame_size, got V=" +
                      std::to_string(num_nodes) +
                      " m=" + std::to_string(frame_size));
  }
  if (!(ending_prob > 0.0 && ending_prob <= 1.0)) {
    throw ConfigError("config: ending_prob must be in (0, 1]");
  }
  if (warmup_frames < 0) throw ConfigError("config: warmup_frames < 0");
  if (measured_frames < 1) throw ConfigError("config: measured_frames < 1");
  if (const auto* uc = std::get_if<UniformCounter>(&counter_model)) {
    if (uc->lo < 1 || uc->hi < uc->lo) {
      throw ConfigError("config: uniform counter needs 1 <= lo <= hi");
    }
    if (!(uc->p_keep >= 0.0 && uc->p_keep < 1.0)) {
      throw ConfigError("config: uniform counter needs 0 <= p_keep < 1");
    }
  }
}

}  // namespace spsaoi
