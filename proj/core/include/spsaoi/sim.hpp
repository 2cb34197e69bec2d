#ifndef SPSAOI_SIM_HPP
#define SPSAOI_SIM_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "spsaoi/config.hpp"
#include "spsaoi/pmf.hpp"
#include "spsaoi/rng.hpp"

namespace spsaoi {

/// Per-frame state of the channel-access chain.
struct ChannelState {
  std::int64_t frame_index = 0;
  std::vector<std::uint16_t> slots;          // d_v, one per node
  std::vector<std::int64_t> reservation_age; // B_v, frames since last slot change
  std::vector<int> pending_counter;          // uniform counter model only
};

/// Collision-free start per the convention D(1) = (1, ..., V).
/// The rng is consumed only by the uniform counter model (initial counters).
ChannelState initial_state(const SystemConfig& cfg, CounterRng& rng);
ChannelState initial_state(const SystemConfig& cfg);

/// One frame transition. Reselecting nodes draw uniformly from the empty
/// set of the previous frame, computed once before any node moves, so two
/// movers may land on the same slot. Draws are consumed in node order.
ChannelState step_frame(const SystemConfig& cfg, ChannelState state,
                        CounterRng& rng);

/// Measured-window record of a run: per-frame slots and frame states for
/// every node, plus enough pre-window context (ages and collision
/// durations carried through warmup) that AoI analysis needs no censoring
/// at the window start.
class TraceSet {
 public:
  TraceSet() = default;

  const SystemConfig& config() const { return cfg_; }
  std::int64_t frames() const { return frames_; }
  int nodes() const { return nodes_; }
  int frame_size() const { return frame_size_; }

  std::uint16_t slot(std::int64_t x, int v) const {
    return slots_[static_cast<std::size_t>(x) * nodes_ + v];
  }
  /// Frame state Omega_v(x): nodes sharing v's slot in frame x, v included.
  int frame_state(std::int64_t x, int v) const {
    return omega_[static_cast<std::size_t>(x) * nodes_ + v];
  }
  int empty_count(std::int64_t x) const {
    return empty_[static_cast<std::size_t>(x)];
  }
  /// True when v's slot changed at the transition into frame x.
  bool reselected(std::int64_t x, int v) const {
    return slot(x, v) != (x == 0 ? prev_slots_[v] : slot(x - 1, v));
  }

  std::span<const std::uint16_t> frame_slots(std::int64_t x) const {
    return {slots_.data() + static_cast<std::size_t>(x) * nodes_,
            static_cast<std::size_t>(nodes_)};
  }

  /// B_v at the first measured frame (exact, carried through warmup).
  std::int64_t initial_age(int v) const { return init_age_[v]; }
  /// C_v at the last pre-window frame; -1 when undefined (only possible
  /// with warmup_frames == 0 and V >= 2, where the convention frame D(0)
  /// is a V-fold collision).
  std::int64_t prev_collision_duration(int v) const { return prev_c_[v]; }
  int prev_frame_state(int v) const { return prev_omega_[v]; }
  std::uint16_t prev_slot(int v) const { return prev_slots_[v]; }
  std::int64_t first_global_frame() const { return first_global_frame_; }

  /// Fixed-width binary dump, frame-major: frame_index u32, then per node
  /// slot u16, then per node frame_state u8. Little endian.
  void write_binary(std::ostream& out) const;

  /// Assemble a TraceSet from a raw slot matrix (frame-major, frames x V).
  /// Context defaults mirror run_simulation's convention frame.
  static TraceSet from_slots(const SystemConfig& cfg,
                             std::vector<std::uint16_t> slots,
                             std::vector<std::uint16_t> prev_slots,
                             std::vector<std::int64_t> init_age,
                             std::vector<std::int64_t> prev_c);

 private:
  friend TraceSet run_simulation(const SystemConfig&);
  void finalize_derived();

  SystemConfig cfg_;
  std::int64_t frames_ = 0;
  int nodes_ = 0;
  int frame_size_ = 0;
  std::int64_t first_global_frame_ = 1;
  std::vector<std::uint16_t> slots_;   // frames x nodes
  std::vector<std::uint8_t> omega_;    // frames x nodes
  std::vector<std::uint16_t> empty_;   // frames
  std::vector<std::uint16_t> prev_slots_;
  std::vector<std::uint8_t> prev_omega_;
  std::vector<std::int64_t> init_age_;
  std::vector<std::int64_t> prev_c_;
};

/// Runs warmup_frames + measured_frames transitions from the convention
/// start and records the measured window. Deterministic in cfg.rng_seed.
TraceSet run_simulation(const SystemConfig& cfg);

/// Occupied-slot frequency for a fixed node over the measured window.
Pmf empirical_slot_marginal(const TraceSet& traces, int v);
/// Same, pooled over all nodes (they are exchangeable).
Pmf empirical_slot_marginal_pooled(const TraceSet& traces);

}  // namespace spsaoi

#endif  // SPSAOI_SIM_HPP
