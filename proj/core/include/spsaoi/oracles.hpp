#ifndef SPSAOI_ORACLES_HPP
#define SPSAOI_ORACLES_HPP

#include <cstdint>
#include <vector>

#include "spsaoi/aoi.hpp"
#include "spsaoi/config.hpp"
#include "spsaoi/pmf.hpp"
#include "spsaoi/sim.hpp"

namespace spsaoi {

/// Exact stationary law of the occupancy chain over {0..m-1}^V, obtained
/// by power iteration on the enumerated transition kernel. Desk-scale
/// only: refuses state spaces beyond 1e5 states.
struct StationaryChain {
  int num_nodes = 0;
  int frame_size = 0;
  std::vector<double> pi;  // mixed radix, node 0 least significant
  std::int64_t iterations = 0;
  double residual = 0.0;

  std::int64_t states() const {
    return static_cast<std::int64_t>(pi.size());
  }
  int slot_of(std::int64_t state, int v) const;
};

StationaryChain brute_force_stationary(const SystemConfig& cfg);

/// Stationary marginal of one node's slot (uniform by symmetry).
Pmf exact_slot_marginal(const StationaryChain& chain, int v);

/// Stationary law of the number of empty slots per frame (exact Q_N).
Pmf exact_empty_slot_pmf(const StationaryChain& chain);

/// Max |pi(sigma(state)) - pi(state)| for the slot transposition (a b)
/// applied to every coordinate. Zero for the exact stationary law.
double permutation_asymmetry(const StationaryChain& chain, int a, int b);

/// Empirical frequency over full occupancy states, comparable to
/// StationaryChain::pi. Same state-space guard.
std::vector<double> empirical_state_histogram(const TraceSet& traces);

struct ExactAoiResult {
  Pmf collision_duration;  // P(C = c), c < cap
  Pmf aoi_averaged;        // exact position-averaged AoI law
  std::int64_t cap = 0;
  double deficit_c = 0.0;    // stationary mass with C >= cap
  double deficit_aoi = 0.0;  // AoI mass lost to the cap
  bool cap_warning = false;  // deficit_c > 1e-6
};

/// Extends the occupancy chain with node 0's collision duration (capped)
/// and solves the joint stationary law exactly; maps it through the
/// two-case age definition with uniform positions. Guard:
/// m^V * cap <= 1e6. cap defaults to 100 * ceil(1/p_E).
ExactAoiResult exact_aoi_small(const SystemConfig& cfg, std::int64_t cap_c = -1);

struct ExactJointResult {
  Pmf joint;       // P(collision in the frame and B = b), b < b_cap
  Pmf marginal_b;  // P(B = b), b < b_cap
  double deficit = 0.0;
};

/// Joint law of (frame outcome, reservation duration) for node 0 from the
/// chain extended with B (capped at b_cap).
ExactJointResult exact_joint_collision_b(const SystemConfig& cfg,
                                         std::int64_t b_cap);

struct AssumptionDistances {
  double d_collision = 0.0;  // TV(start state | prev end collided, start state)
  double d_singleton = 0.0;  // TV(start state | prev end singleton, start state)
  std::int64_t n_collision = 0;
  std::int64_t n_singleton = 0;
  bool low_confidence = false;
};

/// Variational distances quantifying the reservation-to-reservation
/// independence assumption, measured over reservation-start events.
AssumptionDistances assumption_distance(const TraceSet& traces, int v,
                                        bool pool_all_nodes = false,
                                        std::int64_t min_samples = 10000);

struct EmptySlotReport {
  Pmf empirical;          // law of N over measured frames
  double mean_empirical = 0.0;
  double e_n_fixed_point = 0.0;
  double tv_vs_delta = 0.0;  // TV(empirical, delta at round(E[N]))
};

EmptySlotReport empty_slot_report(const TraceSet& traces);

}  // namespace spsaoi

#endif  // SPSAOI_ORACLES_HPP
