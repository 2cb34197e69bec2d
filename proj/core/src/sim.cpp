#include "spsaoi/sim.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <stdexcept>
#include <string>

namespace spsaoi {

namespace {

constexpr int kMaxTraceNodes = 255;  // omega stored as u8

// Occupancy bookkeeping for one frame: per-slot multiplicity and the list
// of empty slots.
struct FrameScratch {
  std::vector<std::uint16_t> count;
  std::vector<std::uint16_t> empty;

  explicit FrameScratch(int m) : count(m, 0) { empty.reserve(m); }

  void compute(std::span<const std::uint16_t> slots, int m) {
    std::fill(count.begin(), count.end(), 0);
    for (auto s : slots) ++count[s];
    empty.clear();
    for (int s = 0; s < m; ++s) {
      if (count[s] == 0) empty.push_back(static_cast<std::uint16_t>(s));
    }
  }
};

int draw_counter(const UniformCounter& uc, CounterRng& rng) {
  return uc.lo + static_cast<int>(rng.next_index(
                     static_cast<std::uint64_t>(uc.hi - uc.lo + 1)));
}

// Advances state by one frame. scratch must describe the current state.
void advance(const SystemConfig& cfg, ChannelState& state,
             const FrameScratch& scratch, CounterRng& rng) {
  const int V = cfg.num_nodes;
  const auto& empty = scratch.empty;
  const auto n_empty = static_cast<std::uint64_t>(empty.size());
  if (n_empty == 0) {
    throw std::logic_error("step_frame: empty set exhausted (V < m violated?)");
  }
  if (const auto* uc = std::get_if<UniformCounter>(&cfg.counter_model)) {
    for (int v = 0; v < V; ++v) {
      if (--state.pending_counter[v] == 0) {
        const bool keep = rng.next_double() < uc->p_keep;
        if (keep) {
          ++state.reservation_age[v];
        } else {
          state.slots[v] = empty[rng.next_index(n_empty)];
          state.reservation_age[v] = 1;
        }
        state.pending_counter[v] = draw_counter(*uc, rng);
      } else {
        ++state.reservation_age[v];
      }
    }
  } else {
    const double p_end = cfg.ending_prob;
    for (int v = 0; v < V; ++v) {
      if (rng.next_double() < p_end) {
        state.slots[v] = empty[rng.next_index(n_empty)];
        state.reservation_age[v] = 1;
      } else {
        ++state.reservation_age[v];
      }
    }
  }
  ++state.frame_index;
}

}  // namespace

ChannelState initial_state(const SystemConfig& cfg, CounterRng& rng) {
  cfg.validate();
  ChannelState st;
  st.frame_index = 1;
  st.slots.resize(cfg.num_nodes);
  st.reservation_age.assign(cfg.num_nodes, 1);
  for (int v = 0; v < cfg.num_nodes; ++v) {
    st.slots[v] = static_cast<std::uint16_t>(v + 1);
  }
  if (const auto* uc = std::get_if<UniformCounter>(&cfg.counter_model)) {
    st.pending_counter.resize(cfg.num_nodes);
    for (int v = 0; v < cfg.num_nodes; ++v) {
      st.pending_counter[v] = draw_counter(*uc, rng);
    }
  }
  return st;
}

ChannelState initial_state(const SystemConfig& cfg) {
  CounterRng rng(cfg.rng_seed);
  return initial_state(cfg, rng);
}

ChannelState step_frame(const SystemConfig& cfg, ChannelState state,
                        CounterRng& rng) {
  FrameScratch scratch(cfg.frame_size);
  scratch.compute(state.slots, cfg.frame_size);
  advance(cfg, state, scratch, rng);
  return state;
}

TraceSet run_simulation(const SystemConfig& cfg) {
  cfg.validate();
  if (cfg.num_nodes > kMaxTraceNodes) {
    throw ConfigError("run_simulation: trace storage supports up to " +
                      std::to_string(kMaxTraceNodes) + " nodes");
  }
  const int V = cfg.num_nodes;
  const int m = cfg.frame_size;
  const std::int64_t X = cfg.measured_frames;
  const std::int64_t first_measured = cfg.warmup_frames + 1;  // global index

  TraceSet tr;
  tr.cfg_ = cfg;
  tr.frames_ = X;
  tr.nodes_ = V;
  tr.frame_size_ = m;
  tr.first_global_frame_ = first_measured;
  tr.slots_.resize(static_cast<std::size_t>(X) * V);
  tr.omega_.resize(static_cast<std::size_t>(X) * V);
  tr.empty_.resize(static_cast<std::size_t>(X));

  CounterRng rng(cfg.rng_seed);
  ChannelState st = initial_state(cfg, rng);
  FrameScratch scratch(m);

  std::vector<std::int64_t> coll(V, 0);       // C_v of the current frame
  std::vector<std::uint8_t> omega_row(V);
  std::vector<std::uint8_t> omega_prev(V, 0);

  // Pre-window context for global frame 0 (the convention frame, all nodes
  // on slot 0). Overwritten whenever warmup frames exist.
  tr.prev_slots_.assign(V, 0);
  tr.prev_omega_.assign(V, static_cast<std::uint8_t>(std::min(V, 255)));
  tr.prev_c_.assign(V, V == 1 ? 0 : -1);
  tr.init_age_.assign(V, 1);

  for (std::int64_t frame = 1; frame <= cfg.warmup_frames + X; ++frame) {
    scratch.compute(st.slots, m);
    for (int v = 0; v < V; ++v) {
      const int om = scratch.count[st.slots[v]];
      omega_row[v] = static_cast<std::uint8_t>(om);
      // Within a reservation the frame state cannot grow: reselections
      // land only on previously empty slots.
      if (st.reservation_age[v] >= 2 && frame >= 2 &&
          omega_row[v] > omega_prev[v]) {
        throw std::logic_error("run_simulation: frame state grew mid-reservation");
      }
      // Frame 1 is collision-free by construction, so this recursion is
      // exact from the start of the run.
      coll[v] = (om == 1) ? 0 : coll[v] + 1;
    }

    if (frame == first_measured - 1) {
      std::copy(st.slots.begin(), st.slots.end(), tr.prev_slots_.begin());
      std::copy(omega_row.begin(), omega_row.end(), tr.prev_omega_.begin());
      tr.prev_c_.assign(coll.begin(), coll.end());
    }
    if (frame >= first_measured) {
      const std::int64_t x = frame - first_measured;
      if (x == 0) {
        tr.init_age_.assign(st.reservation_age.begin(),
                            st.reservation_age.end());
      }
      auto* srow = tr.slots_.data() + static_cast<std::size_t>(x) * V;
      auto* orow = tr.omega_.data() + static_cast<std::size_t>(x) * V;
      std::copy(st.slots.begin(), st.slots.end(), srow);
      std::copy(omega_row.begin(), omega_row.end(), orow);
      tr.empty_[static_cast<std::size_t>(x)] =
          static_cast<std::uint16_t>(scratch.empty.size());
    }

    omega_prev.swap(omega_row);
    if (frame < cfg.warmup_frames + X) {
      advance(cfg, st, scratch, rng);
    }
  }
  return tr;
}

void TraceSet::finalize_derived() {
  omega_.resize(slots_.size());
  empty_.resize(static_cast<std::size_t>(frames_));
  std::vector<std::uint16_t> count(static_cast<std::size_t>(frame_size_));
  for (std::int64_t x = 0; x < frames_; ++x) {
    std::fill(count.begin(), count.end(), 0);
    auto row = frame_slots(x);
    for (auto s : row) {
      if (s >= frame_size_) {
        throw ConfigError("TraceSet: slot index out of range");
      }
      ++count[s];
    }
    int occupied = 0;
    for (int s = 0; s < frame_size_; ++s) occupied += count[s] > 0;
    empty_[static_cast<std::size_t>(x)] =
        static_cast<std::uint16_t>(frame_size_ - occupied);
    for (int v = 0; v < nodes_; ++v) {
      omega_[static_cast<std::size_t>(x) * nodes_ + v] =
          static_cast<std::uint8_t>(count[row[v]]);
    }
  }
  prev_omega_.assign(static_cast<std::size_t>(nodes_), 0);
  std::fill(count.begin(), count.end(), 0);
  for (auto s : prev_slots_) ++count[s];
  for (int v = 0; v < nodes_; ++v) {
    prev_omega_[static_cast<std::size_t>(v)] =
        static_cast<std::uint8_t>(count[prev_slots_[v]]);
  }
}

TraceSet TraceSet::from_slots(const SystemConfig& cfg,
                              std::vector<std::uint16_t> slots,
                              std::vector<std::uint16_t> prev_slots,
                              std::vector<std::int64_t> init_age,
                              std::vector<std::int64_t> prev_c) {
  const int V = cfg.num_nodes;
  if (V > kMaxTraceNodes) throw ConfigError("from_slots: too many nodes");
  if (slots.size() % static_cast<std::size_t>(V) != 0 || slots.empty()) {
    throw ConfigError("from_slots: slot matrix size not a multiple of V");
  }
  if (prev_slots.size() != static_cast<std::size_t>(V) ||
      init_age.size() != static_cast<std::size_t>(V) ||
      prev_c.size() != static_cast<std::size_t>(V)) {
    throw ConfigError("from_slots: context vectors must have V entries");
  }
  TraceSet tr;
  tr.cfg_ = cfg;
  tr.nodes_ = V;
  tr.frame_size_ = cfg.frame_size;
  tr.frames_ = static_cast<std::int64_t>(slots.size() / V);
  tr.slots_ = std::move(slots);
  tr.prev_slots_ = std::move(prev_slots);
  tr.init_age_ = std::move(init_age);
  tr.prev_c_ = std::move(prev_c);
  tr.finalize_derived();
  return tr;
}

void TraceSet::write_binary(std::ostream& out) const {
  const auto put_u32 = [&out](std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.write(b, 4);
  };
  for (std::int64_t x = 0; x < frames_; ++x) {
    put_u32(static_cast<std::uint32_t>(first_global_frame_ + x));
    out.write(reinterpret_cast<const char*>(slots_.data() +
                                            static_cast<std::size_t>(x) * nodes_),
              static_cast<std::streamsize>(2 * nodes_));
    out.write(reinterpret_cast<const char*>(omega_.data() +
                                            static_cast<std::size_t>(x) * nodes_),
              static_cast<std::streamsize>(nodes_));
  }
}

Pmf empirical_slot_marginal(const TraceSet& traces, int v) {
  if (traces.frames() == 0) throw std::invalid_argument("empty trace");
  std::vector<double> w(static_cast<std::size_t>(traces.frame_size()), 0.0);
  for (std::int64_t x = 0; x < traces.frames(); ++x) {
    w[traces.slot(x, v)] += 1.0;
  }
  const double n = static_cast<double>(traces.frames());
  for (double& c : w) c /= n;
  return Pmf(0, std::move(w));
}

Pmf empirical_slot_marginal_pooled(const TraceSet& traces) {
  if (traces.frames() == 0) throw std::invalid_argument("empty trace");
  std::vector<double> w(static_cast<std::size_t>(traces.frame_size()), 0.0);
  for (std::int64_t x = 0; x < traces.frames(); ++x) {
    for (auto s : traces.frame_slots(x)) w[s] += 1.0;
  }
  const double n =
      static_cast<double>(traces.frames()) * static_cast<double>(traces.nodes());
  for (double& c : w) c /= n;
  return Pmf(0, std::move(w));
}

}  // namespace spsaoi
