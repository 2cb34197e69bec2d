#ifndef SPSAOI_AOI_HPP
#define SPSAOI_AOI_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "spsaoi/pmf.hpp"
#include "spsaoi/sim.hpp"

namespace spsaoi {

/// Per-node view of a trace: collision durations per frame and O(1) AoI
/// evaluation at any measured slot. Slot times t are local to the measured
/// window, t in [0, frames * m).
class AoiTrajectory {
 public:
  AoiTrajectory(const TraceSet& traces, int v);

  /// C_v(x); nullopt when the history needed is censored (possible only
  /// without warmup context).
  std::optional<std::int64_t> collision_duration(std::int64_t x) const;

  /// AoI in slots at local slot time t, per the two-case definition:
  /// before this frame's transmission the age reaches back through the
  /// previous frame's collision run, afterwards through the current one.
  std::optional<std::int64_t> aoi_at(std::int64_t t) const;

  /// Reservation duration B_v(x), exact via ages carried through warmup.
  std::int64_t reservation_age(std::int64_t x) const { return age_[x]; }

  const TraceSet& traces() const { return *traces_; }
  int node() const { return v_; }

 private:
  const TraceSet* traces_;
  int v_;
  std::vector<std::int64_t> coll_;  // C per measured frame, -1 censored
  std::int64_t prev_c_;             // C at x = -1, -1 censored
  std::vector<std::int64_t> age_;   // B per measured frame
};

std::optional<std::int64_t> collision_duration(const TraceSet& traces, int v,
                                               std::int64_t x);
std::optional<std::int64_t> aoi_at(const TraceSet& traces, int v,
                                   std::int64_t t);

struct SegmentationReport {
  std::int64_t violations = 0;
  std::int64_t checked_slots = 0;
  std::int64_t censored_slots = 0;
  std::int64_t spot_checks = 0;  // direct slot-level comparisons performed
};

/// Replays every measured slot of node v against the reservation-segment
/// decomposition of the AoI: the collision duration must equal the sum of
/// the reservation durations at the ends xi_w(x) back to the last
/// singleton. Returns the number of mismatching slots (0 when the
/// identity holds).
SegmentationReport verify_segmentation(const TraceSet& traces, int v);

struct AoiDistribution {
  Pmf averaged;  // position-averaged law of the AoI, in slots
  /// per_position[pos][k] = P(AoI = m*k + pos | position == pos)
  std::vector<std::vector<double>> per_position;
  double censored_fraction = 0.0;
  std::int64_t samples = 0;
  bool pooled = false;
};

/// Histogram of the AoI over every measured slot. Position weights are the
/// exact 1/m (positions are deterministic within a frame). With
/// pool_all_nodes the exchangeable per-node histograms are merged.
AoiDistribution empirical_aoi_pmf(const TraceSet& traces, int v,
                                  bool pool_all_nodes = false);

struct ReservationStats {
  Pmf duration_at_end;    // B over completed reservations
  Pmf state_at_start;     // Omega at reservation starts
  Pmf state_at_start_given_prev_collision;
  Pmf state_at_start_given_prev_singleton;
  std::int64_t n_completed = 0;
  std::int64_t n_prev_collision = 0;
  std::int64_t n_prev_singleton = 0;
};

/// Statistics over completed reservations (the in-progress final
/// reservation is excluded).
ReservationStats reservation_statistics(const TraceSet& traces, int v,
                                        bool pool_all_nodes = false);

}  // namespace spsaoi

#endif  // SPSAOI_AOI_HPP
