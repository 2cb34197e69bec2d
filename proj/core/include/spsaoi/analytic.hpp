#ifndef SPSAOI_ANALYTIC_HPP
#define SPSAOI_ANALYTIC_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "spsaoi/config.hpp"
#include "spsaoi/pmf.hpp"

namespace spsaoi {

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double last_iterate,
                   double last_residual)
      : std::runtime_error(what), last(last_iterate), residual(last_residual) {}
  double last;
  double residual;
};

struct EmptySlotSolution {
  double e_n = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> trajectory;  // iterates including the seed
};

/// Iterates E[N]_{i+1} = m / (1 + w_i (I - A)^{-1} e) to a fixed point.
/// w_i is the binomial law of the number of reselecting nodes given a
/// per-node reselection-collision probability p_E / (1 + E[N]_i); the
/// lower-triangular A propagates a collision cluster to the number of
/// nodes still colliding a frame later, so (I - A)^{-1} e holds expected
/// dissolution times. Seeds from m/V unless given. Throws ConvergenceError.
EmptySlotSolution expected_empty_slots(int num_nodes, int frame_size,
                                       double ending_prob, double tol = 1e-9,
                                       int max_iter = 500,
                                       std::optional<double> seed = {});

/// Which printing of the reservation-duration law to use. The normalized
/// form p(1-p)^(b-1) sums to one over b >= 1 and is the one the duration
/// definition implies; the literal form p(1-p)^b is kept selectable so the
/// two can be compared against simulated histograms.
enum class GeometricForm { normalized, literal };

struct FixedPointEmptySlots {};                  // Q_N -> point mass at E[N]
struct ExplicitEmptySlots {
  Pmf q_n;                 // support within {1..m}, unit mass
  bool from_traces = false;
};
using EmptySlotModel = std::variant<FixedPointEmptySlots, ExplicitEmptySlots>;

struct AnalyticParams {
  int num_nodes = 0;
  int frame_size = 0;
  double ending_prob = 0.0;
  int w_bar = 50;    // max collided reservations kept
  int b_bar = 1000;  // max reservation length kept
  EmptySlotModel empty_slot_model = FixedPointEmptySlots{};
  GeometricForm geometric_form = GeometricForm::normalized;

  static AnalyticParams from_config(const SystemConfig& cfg, int w_bar = 50,
                                    int b_bar = 1000);
  void validate() const;
};

/// P(state at reservation start = lambda), lambda in {1..V}:
/// sum_n Q_N(n) Binom(V-1, p_E/n, lambda-1). The fixed-point model
/// evaluates at the single (real-valued) point E[N].
Pmf start_state_pmf(const AnalyticParams& params);
Pmf start_state_pmf(const AnalyticParams& params, const Pmf& q_n);

/// P(collision at reservation end | duration b):
/// 1 - sum_{lambda=1..V} P_start(lambda) (1-(1-p_E)^(b-1))^(lambda-1).
/// Non-increasing in b; zero identically for V = 1.
double collision_given_duration(const Pmf& start_pmf, double ending_prob,
                                std::int64_t b);

/// Reservation-duration law P(B = b) for b >= 1 under the chosen form.
double reservation_duration_pmf(double ending_prob, std::int64_t b,
                                GeometricForm form = GeometricForm::normalized);

/// Engine caching the full Theorem-style pipeline: start-state law,
/// joint f_P, collision-duration law Q, and the AoI distribution.
class AnalyticModel {
 public:
  explicit AnalyticModel(AnalyticParams params);

  const AnalyticParams& params() const { return params_; }

  /// Resolved number of empty slots feeding the start-state law (the
  /// fixed point, or the mean of an explicit Q_N).
  double empty_slots() const { return empty_slots_; }
  const std::optional<EmptySlotSolution>& fixed_point() const {
    return fixed_point_;
  }

  const Pmf& start_state() const { return start_state_; }

  /// f_P(b) = P(collision at end, duration b), materialized on 1..b_bar.
  double joint_collision_duration(std::int64_t b) const;

  /// Per-reselection weights: s = P(singleton end) summed over durations,
  /// r = P(collided end) summed over durations (both truncated at b_bar).
  double singleton_weight() const { return s_; }
  double collision_weight() const { return r_; }

  /// Q: law of the collision duration, support c >= 0, truncated at
  /// w_bar collided reservations of length <= b_bar each. Deficient.
  const Pmf& collision_duration() const { return q_; }
  double truncation_deficit() const { return 1.0 - q_.mass(); }

  /// AoI law observed at a fixed frame position; support restricted to
  /// ages delta with delta mod m == pos. Mass equals mass(Q).
  Pmf aoi_pmf(int pos) const;
  /// Uniform mixture of the per-position laws.
  const Pmf& aoi_pmf_averaged() const;

  /// E[AoI] under the averaged law, renormalized by its mass.
  double average_aoi() const;
  /// P(AoI > theta) under the averaged law, renormalized by its mass.
  double violation_probability(std::int64_t theta) const;

 private:
  AnalyticParams params_;
  double empty_slots_ = 0.0;
  std::optional<EmptySlotSolution> fixed_point_;
  Pmf start_state_;
  std::vector<double> f_p_;  // index b, [0] unused
  double s_ = 0.0;
  double r_ = 0.0;
  Pmf q_;
  mutable std::optional<Pmf> averaged_;
};

/// Convenience wrappers with the spec operation shapes.
Pmf collision_duration_pmf(const AnalyticParams& params);
Pmf aoi_pmf_averaged(const AnalyticParams& params);
double average_aoi(const AnalyticParams& params);
double violation_probability(const AnalyticParams& params, std::int64_t theta);

/// p_E = (1 - p_RC)(1 - p_keep), mapping the 3GPP-style counter and keep
/// parameters onto the per-frame ending probability.
double p_e_from_3gpp(double p_rc, double p_keep);

}  // namespace spsaoi

#endif  // SPSAOI_ANALYTIC_HPP
