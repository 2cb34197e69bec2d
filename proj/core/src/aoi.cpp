#include "spsaoi/aoi.hpp"

#include <algorithm>
#include <stdexcept>

namespace spsaoi {

namespace {

std::vector<std::int64_t> build_ages(const TraceSet& tr, int v) {
  const std::int64_t X = tr.frames();
  std::vector<std::int64_t> age(static_cast<std::size_t>(X));
  age[0] = tr.initial_age(v);
  for (std::int64_t x = 1; x < X; ++x) {
    age[static_cast<std::size_t>(x)] =
        tr.reselected(x, v) ? 1 : age[static_cast<std::size_t>(x - 1)] + 1;
  }
  return age;
}

}  // namespace

AoiTrajectory::AoiTrajectory(const TraceSet& traces, int v)
    : traces_(&traces), v_(v) {
  if (v < 0 || v >= traces.nodes()) {
    throw std::invalid_argument("AoiTrajectory: node index out of range");
  }
  const std::int64_t X = traces.frames();
  coll_.resize(static_cast<std::size_t>(X));
  prev_c_ = traces.prev_collision_duration(v);
  std::int64_t c = prev_c_;
  for (std::int64_t x = 0; x < X; ++x) {
    if (traces.frame_state(x, v) == 1) {
      c = 0;
    } else {
      c = (c < 0) ? -1 : c + 1;
    }
    coll_[static_cast<std::size_t>(x)] = c;
  }
  age_ = build_ages(traces, v);
}

std::optional<std::int64_t> AoiTrajectory::collision_duration(
    std::int64_t x) const {
  if (x < 0 || x >= traces_->frames()) {
    throw std::out_of_range("collision_duration: frame outside window");
  }
  const std::int64_t c = coll_[static_cast<std::size_t>(x)];
  if (c < 0) return std::nullopt;
  return c;
}

std::optional<std::int64_t> AoiTrajectory::aoi_at(std::int64_t t) const {
  const int m = traces_->frame_size();
  const std::int64_t x = t / m;
  const std::int64_t pos = t % m;
  if (t < 0 || x >= traces_->frames()) {
    throw std::out_of_range("aoi_at: slot time outside window");
  }
  const auto d = static_cast<std::int64_t>(traces_->slot(x, v_));
  if (pos < d) {
    const std::int64_t cprev =
        (x == 0) ? prev_c_ : coll_[static_cast<std::size_t>(x - 1)];
    if (cprev < 0) return std::nullopt;
    return m * cprev + m + pos;
  }
  const std::int64_t c = coll_[static_cast<std::size_t>(x)];
  if (c < 0) return std::nullopt;
  return m * c + pos;
}

std::optional<std::int64_t> collision_duration(const TraceSet& traces, int v,
                                               std::int64_t x) {
  return AoiTrajectory(traces, v).collision_duration(x);
}

std::optional<std::int64_t> aoi_at(const TraceSet& traces, int v,
                                   std::int64_t t) {
  return AoiTrajectory(traces, v).aoi_at(t);
}

SegmentationReport verify_segmentation(const TraceSet& traces, int v) {
  const std::int64_t X = traces.frames();
  const int m = traces.frame_size();
  AoiTrajectory traj(traces, v);

  // Segment sum per frame: walk the reservation ends xi_0 = x,
  // xi_{w+1} = xi_w - B(xi_w) until a singleton end; the collision
  // duration must equal the accumulated reservation durations.
  // ok[x]: 1 identity holds, 0 mismatch, -1 walk left the window.
  std::vector<std::int8_t> ok(static_cast<std::size_t>(X));
  std::vector<std::int64_t> segsum(static_cast<std::size_t>(X), -1);
  for (std::int64_t x = 0; x < X; ++x) {
    std::int64_t xi = x;
    std::int64_t sum = 0;
    std::int8_t status = 1;
    while (true) {
      if (traces.frame_state(xi, v) == 1) break;
      sum += traj.reservation_age(xi);
      xi -= traj.reservation_age(xi);
      if (xi < 0) {
        status = -1;
        break;
      }
    }
    if (status == 1) {
      const auto c = traj.collision_duration(x);
      if (!c.has_value()) {
        status = -1;
      } else {
        segsum[static_cast<std::size_t>(x)] = sum;
        status = (*c == sum) ? 1 : 0;
      }
    }
    ok[static_cast<std::size_t>(x)] = status;
  }

  SegmentationReport rep;
  for (std::int64_t x = 0; x < X; ++x) {
    const auto d = static_cast<std::int64_t>(traces.slot(x, v));
    // pos < d uses frame x-1's decomposition, pos >= d this frame's.
    const std::int8_t a = (x == 0) ? std::int8_t{-1}
                                   : ok[static_cast<std::size_t>(x - 1)];
    const std::int8_t b = ok[static_cast<std::size_t>(x)];
    if (a < 0) {
      rep.censored_slots += d;
    } else {
      rep.checked_slots += d;
      if (a == 0) rep.violations += d;
    }
    if (b < 0) {
      rep.censored_slots += m - d;
    } else {
      rep.checked_slots += m - d;
      if (b == 0) rep.violations += m - d;
    }
  }

  // Spot checks: evaluate both sides of the slot-level statement directly
  // on a deterministic subsample.
  const std::int64_t stride = 9973;
  for (std::int64_t t = 0; t < X * m; t += stride) {
    const std::int64_t x = t / m;
    const std::int64_t pos = t % m;
    const auto d = static_cast<std::int64_t>(traces.slot(x, v));
    std::optional<std::int64_t> rhs;
    if (pos < d) {
      if (x >= 1 && ok[static_cast<std::size_t>(x - 1)] >= 0 &&
          segsum[static_cast<std::size_t>(x - 1)] >= 0) {
        rhs = pos + m * (1 + segsum[static_cast<std::size_t>(x - 1)]);
      }
    } else if (ok[static_cast<std::size_t>(x)] >= 0 &&
               segsum[static_cast<std::size_t>(x)] >= 0) {
      rhs = pos + m * segsum[static_cast<std::size_t>(x)];
    }
    if (!rhs.has_value()) continue;
    const auto lhs = traj.aoi_at(t);
    ++rep.spot_checks;
    if (!lhs.has_value() || *lhs != *rhs) ++rep.violations;
  }
  return rep;
}

AoiDistribution empirical_aoi_pmf(const TraceSet& traces, int v,
                                  bool pool_all_nodes) {
  const std::int64_t X = traces.frames();
  const int m = traces.frame_size();
  if (X == 0) throw std::invalid_argument("empirical_aoi_pmf: empty trace");

  // H[k][pos] counts AoI samples with value m*k + pos, accumulated as
  // per-row difference arrays (each frame contributes one contiguous
  // position range per case).
  std::vector<std::vector<double>> H;
  auto row = [&H, m](std::int64_t k) -> std::vector<double>& {
    const auto idx = static_cast<std::size_t>(k);
    if (H.size() <= idx) H.resize(idx + 1);
    if (H[idx].empty()) H[idx].assign(static_cast<std::size_t>(m) + 1, 0.0);
    return H[idx];
  };

  std::int64_t censored = 0;
  const int v_begin = pool_all_nodes ? 0 : v;
  const int v_end = pool_all_nodes ? traces.nodes() : v + 1;
  for (int node = v_begin; node < v_end; ++node) {
    std::int64_t cprev = traces.prev_collision_duration(node);
    std::int64_t c = -2;
    for (std::int64_t x = 0; x < X; ++x) {
      c = (traces.frame_state(x, node) == 1) ? 0 : (cprev < 0 ? -1 : cprev + 1);
      const auto d = static_cast<std::int64_t>(traces.slot(x, node));
      if (d > 0) {
        if (cprev >= 0) {
          auto& r = row(cprev + 1);
          r[0] += 1.0;
          r[static_cast<std::size_t>(d)] -= 1.0;
        } else {
          censored += d;
        }
      }
      if (d < m) {
        if (c >= 0) {
          auto& r = row(c);
          r[static_cast<std::size_t>(d)] += 1.0;
          r[static_cast<std::size_t>(m)] -= 1.0;
        } else {
          censored += m - d;
        }
      }
      cprev = c;
    }
  }

  AoiDistribution out;
  out.pooled = pool_all_nodes;
  out.samples = X * m * (v_end - v_begin);
  out.censored_fraction =
      static_cast<double>(censored) / static_cast<double>(out.samples);

  const auto kmax = static_cast<std::int64_t>(H.size());
  out.per_position.assign(static_cast<std::size_t>(m),
                          std::vector<double>(static_cast<std::size_t>(kmax), 0.0));
  std::vector<double> w(static_cast<std::size_t>(kmax) * m, 0.0);
  const double per_pos_n =
      static_cast<double>(X) * static_cast<double>(v_end - v_begin);
  for (std::int64_t k = 0; k < kmax; ++k) {
    auto& r = H[static_cast<std::size_t>(k)];
    if (r.empty()) continue;
    double run = 0.0;
    for (int pos = 0; pos < m; ++pos) {
      run += r[static_cast<std::size_t>(pos)];
      out.per_position[static_cast<std::size_t>(pos)]
                      [static_cast<std::size_t>(k)] = run / per_pos_n;
      w[static_cast<std::size_t>(k * m + pos)] = run / (per_pos_n * m);
    }
  }
  out.averaged = Pmf(0, std::move(w)).trimmed();
  return out;
}

ReservationStats reservation_statistics(const TraceSet& traces, int v,
                                        bool pool_all_nodes) {
  const std::int64_t X = traces.frames();
  const int V = traces.nodes();
  if (X < 2) throw std::invalid_argument("reservation_statistics: trace too short");

  std::vector<double> dur;          // counts over b = 1..
  std::vector<double> start(static_cast<std::size_t>(V), 0.0);
  std::vector<double> start_coll(static_cast<std::size_t>(V), 0.0);
  std::vector<double> start_sing(static_cast<std::size_t>(V), 0.0);
  std::int64_t n_completed = 0, n_coll = 0, n_sing = 0;

  const int v_begin = pool_all_nodes ? 0 : v;
  const int v_end = pool_all_nodes ? V : v + 1;
  for (int node = v_begin; node < v_end; ++node) {
    std::int64_t age = traces.initial_age(node);
    for (std::int64_t x = 1; x < X; ++x) {
      if (traces.reselected(x, node)) {
        // reservation completed at x-1 with duration age
        if (dur.size() < static_cast<std::size_t>(age)) {
          dur.resize(static_cast<std::size_t>(age), 0.0);
        }
        dur[static_cast<std::size_t>(age - 1)] += 1.0;
        ++n_completed;
        const int om_start = traces.frame_state(x, node);
        start[static_cast<std::size_t>(om_start - 1)] += 1.0;
        const int om_prev_end = traces.frame_state(x - 1, node);
        if (om_prev_end >= 2) {
          start_coll[static_cast<std::size_t>(om_start - 1)] += 1.0;
          ++n_coll;
        } else {
          start_sing[static_cast<std::size_t>(om_start - 1)] += 1.0;
          ++n_sing;
        }
        age = 1;
      } else {
        ++age;
      }
    }
  }

  auto normalize = [](std::int64_t offset, std::vector<double> counts,
                      std::int64_t n) {
    if (n > 0) {
      for (double& c : counts) c /= static_cast<double>(n);
    }
    return Pmf(offset, std::move(counts)).trimmed();
  };

  ReservationStats st;
  st.n_completed = n_completed;
  st.n_prev_collision = n_coll;
  st.n_prev_singleton = n_sing;
  st.duration_at_end = normalize(1, std::move(dur), n_completed);
  st.state_at_start = normalize(1, std::move(start), n_completed);
  st.state_at_start_given_prev_collision =
      normalize(1, std::move(start_coll), n_coll);
  st.state_at_start_given_prev_singleton =
      normalize(1, std::move(start_sing), n_sing);
  return st;
}

}  // namespace spsaoi
