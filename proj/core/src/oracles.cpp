#include "spsaoi/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spsaoi/analytic.hpp"

namespace spsaoi {

namespace {

constexpr std::int64_t kMaxStates = 100000;
constexpr std::int64_t kMaxEdges = 50000000;

struct ChainEdge {
  std::int32_t from;
  std::int32_t to;
  double prob;
  bool node0_moved;
};

std::int64_t pow_ll(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > kMaxStates) return kMaxStates + 1;
    r *= base;
  }
  return r;
}

struct SmallChain {
  int V = 0;
  int m = 0;
  std::int64_t S = 0;
  std::vector<ChainEdge> edges;
  std::vector<std::uint8_t> omega0;  // frame state of node 0 per state

  int slot_of(std::int64_t state, int v) const {
    for (int i = 0; i < v; ++i) state /= m;
    return static_cast<int>(state % m);
  }
};

// All transitions of the occupancy chain, enumerated per the transmission
// rules: every node independently keeps its slot w.p. 1-p_E or moves to a
// uniformly chosen slot that was empty before any node moved.
SmallChain enumerate_chain(const SystemConfig& cfg) {
  cfg.validate();
  if (!std::holds_alternative<GeometricCounter>(cfg.counter_model)) {
    throw std::invalid_argument("exact chain requires the geometric model");
  }
  const int V = cfg.num_nodes;
  const int m = cfg.frame_size;
  SmallChain ch;
  ch.V = V;
  ch.m = m;
  ch.S = pow_ll(m, V);
  if (ch.S > kMaxStates) {
    throw std::invalid_argument("exact chain: state space m^V exceeds 1e5");
  }
  const double p = cfg.ending_prob;

  ch.omega0.resize(static_cast<std::size_t>(ch.S));
  std::vector<int> slots(static_cast<std::size_t>(V));
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(m));
  std::vector<int> empty;
  empty.reserve(m);

  for (std::int64_t s = 0; s < ch.S; ++s) {
    std::int64_t t = s;
    for (int v = 0; v < V; ++v) {
      slots[static_cast<std::size_t>(v)] = static_cast<int>(t % m);
      t /= m;
    }
    int om0 = 0;
    for (int v = 0; v < V; ++v) om0 += slots[static_cast<std::size_t>(v)] == slots[0];
    ch.omega0[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(om0);

    std::fill(occupied.begin(), occupied.end(), 0);
    for (int v = 0; v < V; ++v) occupied[static_cast<std::size_t>(slots[static_cast<std::size_t>(v)])] = 1;
    empty.clear();
    for (int e = 0; e < m; ++e) {
      if (!occupied[static_cast<std::size_t>(e)]) empty.push_back(e);
    }
    const double pmove = p / static_cast<double>(empty.size());

    // Depth-first expansion over per-node choices.
    struct Item {
      std::int64_t to;
      double prob;
      int v;
      bool moved0;
    };
    std::vector<Item> stack{{0, 1.0, 0, false}};
    std::int64_t radix = 1;
    std::vector<std::int64_t> radix_of(static_cast<std::size_t>(V));
    for (int v = 0; v < V; ++v) {
      radix_of[static_cast<std::size_t>(v)] = radix;
      radix *= m;
    }
    while (!stack.empty()) {
      const Item it = stack.back();
      stack.pop_back();
      if (it.v == V) {
        ch.edges.push_back({static_cast<std::int32_t>(s),
                            static_cast<std::int32_t>(it.to), it.prob,
                            it.moved0});
        if (static_cast<std::int64_t>(ch.edges.size()) > kMaxEdges) {
          throw std::invalid_argument("exact chain: transition list too large");
        }
        continue;
      }
      const auto r = radix_of[static_cast<std::size_t>(it.v)];
      if (p < 1.0) {
        stack.push_back({it.to + r * slots[static_cast<std::size_t>(it.v)],
                         it.prob * (1.0 - p), it.v + 1, it.moved0});
      }
      if (p > 0.0) {
        for (int e : empty) {
          stack.push_back({it.to + r * e, it.prob * pmove, it.v + 1,
                           it.moved0 || it.v == 0});
        }
      }
    }
  }

  // Row-sum check against the kernel construction.
  std::vector<double> rowsum(static_cast<std::size_t>(ch.S), 0.0);
  for (const auto& e : ch.edges) rowsum[static_cast<std::size_t>(e.from)] += e.prob;
  for (double rs : rowsum) {
    if (std::abs(rs - 1.0) > 1e-12) {
      throw std::logic_error("exact chain: row sum deviates from 1");
    }
  }
  return ch;
}

std::vector<double> power_iterate(const SmallChain& ch, double tol,
                                  std::int64_t max_iter, std::int64_t* iters,
                                  double* residual) {
  std::vector<double> pi(static_cast<std::size_t>(ch.S),
                         1.0 / static_cast<double>(ch.S));
  std::vector<double> next(static_cast<std::size_t>(ch.S));
  double res = 1.0;
  std::int64_t it = 0;
  while (it < max_iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& e : ch.edges) {
      next[static_cast<std::size_t>(e.to)] +=
          pi[static_cast<std::size_t>(e.from)] * e.prob;
    }
    res = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
      res = std::max(res, std::abs(next[i] - pi[i]));
    }
    pi.swap(next);
    ++it;
    if (res < tol) break;
  }
  double total = 0.0;
  for (double x : pi) total += x;
  for (double& x : pi) x /= total;
  if (iters) *iters = it;
  if (residual) *residual = res;
  if (res >= tol) {
    throw ConvergenceError("power iteration did not reach tolerance", 0.0, res);
  }
  return pi;
}

}  // namespace

int StationaryChain::slot_of(std::int64_t state, int v) const {
  for (int i = 0; i < v; ++i) state /= frame_size;
  return static_cast<int>(state % frame_size);
}

StationaryChain brute_force_stationary(const SystemConfig& cfg) {
  const SmallChain ch = enumerate_chain(cfg);
  StationaryChain out;
  out.num_nodes = ch.V;
  out.frame_size = ch.m;
  out.pi = power_iterate(ch, 1e-12, 2000000, &out.iterations, &out.residual);
  return out;
}

Pmf exact_slot_marginal(const StationaryChain& chain, int v) {
  std::vector<double> w(static_cast<std::size_t>(chain.frame_size), 0.0);
  for (std::int64_t s = 0; s < chain.states(); ++s) {
    w[static_cast<std::size_t>(chain.slot_of(s, v))] +=
        chain.pi[static_cast<std::size_t>(s)];
  }
  return Pmf(0, std::move(w));
}

Pmf exact_empty_slot_pmf(const StationaryChain& chain) {
  const int m = chain.frame_size;
  std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(m));
  for (std::int64_t s = 0; s < chain.states(); ++s) {
    std::fill(occ.begin(), occ.end(), 0);
    for (int v = 0; v < chain.num_nodes; ++v) {
      occ[static_cast<std::size_t>(chain.slot_of(s, v))] = 1;
    }
    int n = 0;
    for (int e = 0; e < m; ++e) n += occ[static_cast<std::size_t>(e)] == 0;
    w[static_cast<std::size_t>(n)] += chain.pi[static_cast<std::size_t>(s)];
  }
  return Pmf(0, std::move(w)).trimmed();
}

double permutation_asymmetry(const StationaryChain& chain, int a, int b) {
  const int m = chain.frame_size;
  const int V = chain.num_nodes;
  double worst = 0.0;
  for (std::int64_t s = 0; s < chain.states(); ++s) {
    std::int64_t mapped = 0;
    std::int64_t radix = 1;
    std::int64_t t = s;
    for (int v = 0; v < V; ++v) {
      int slot = static_cast<int>(t % m);
      if (slot == a) slot = b;
      else if (slot == b) slot = a;
      mapped += radix * slot;
      radix *= m;
      t /= m;
    }
    worst = std::max(worst, std::abs(chain.pi[static_cast<std::size_t>(s)] -
                                     chain.pi[static_cast<std::size_t>(mapped)]));
  }
  return worst;
}

std::vector<double> empirical_state_histogram(const TraceSet& traces) {
  const int V = traces.nodes();
  const int m = traces.frame_size();
  const std::int64_t S = pow_ll(m, V);
  if (S > kMaxStates) {
    throw std::invalid_argument("state histogram: m^V exceeds 1e5");
  }
  std::vector<double> h(static_cast<std::size_t>(S), 0.0);
  for (std::int64_t x = 0; x < traces.frames(); ++x) {
    std::int64_t idx = 0;
    std::int64_t radix = 1;
    for (int v = 0; v < V; ++v) {
      idx += radix * traces.slot(x, v);
      radix *= m;
    }
    h[static_cast<std::size_t>(idx)] += 1.0;
  }
  for (double& c : h) c /= static_cast<double>(traces.frames());
  return h;
}

ExactAoiResult exact_aoi_small(const SystemConfig& cfg, std::int64_t cap_c) {
  const SmallChain ch = enumerate_chain(cfg);
  const int m = ch.m;
  if (cap_c <= 0) {
    cap_c = 100 * static_cast<std::int64_t>(std::ceil(1.0 / cfg.ending_prob));
  }
  if (ch.S * cap_c > 1000000) {
    throw std::invalid_argument("exact_aoi_small: m^V * cap exceeds 1e6");
  }
  const auto S = static_cast<std::size_t>(ch.S);
  const auto C = static_cast<std::size_t>(cap_c) + 1;  // bucket cap_c = "C >= cap"

  // Joint stationary law over (state, C of node 0).
  std::vector<double> pi(S * C, 1.0 / static_cast<double>(S * C));
  std::vector<double> next(S * C);
  std::vector<double> from_mass(S);
  double res = 1.0;
  for (std::int64_t it = 0; it < 500000 && res >= 1e-13; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < S; ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < C; ++c) sum += pi[i * C + c];
      from_mass[i] = sum;
    }
    for (const auto& e : ch.edges) {
      const auto i = static_cast<std::size_t>(e.from);
      const auto j = static_cast<std::size_t>(e.to);
      if (ch.omega0[j] == 1) {
        next[j * C] += e.prob * from_mass[i];
      } else {
        double* out = next.data() + j * C;
        const double* in = pi.data() + i * C;
        for (std::size_t c = 0; c + 1 < C; ++c) out[c + 1] += e.prob * in[c];
        out[C - 1] += e.prob * in[C - 1];
      }
    }
    res = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
      res = std::max(res, std::abs(next[k] - pi[k]));
    }
    pi.swap(next);
  }
  if (res >= 1e-13) {
    throw ConvergenceError("exact_aoi_small: joint iteration stalled", 0.0, res);
  }
  double total = 0.0;
  for (double x : pi) total += x;
  for (double& x : pi) x /= total;

  // Current-frame joint P(C = c, d0 = d) and the one-step-back variant
  // P(C of previous frame = c, d0 of current frame = d).
  std::vector<double> cur(C * static_cast<std::size_t>(m), 0.0);
  std::vector<double> prev(C * static_cast<std::size_t>(m), 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const auto d = static_cast<std::size_t>(
        ch.slot_of(static_cast<std::int64_t>(s), 0));
    for (std::size_t c = 0; c < C; ++c) {
      cur[c * static_cast<std::size_t>(m) + d] += pi[s * C + c];
    }
  }
  for (const auto& e : ch.edges) {
    const auto i = static_cast<std::size_t>(e.from);
    const auto d = static_cast<std::size_t>(
        ch.slot_of(static_cast<std::int64_t>(e.to), 0));
    for (std::size_t c = 0; c < C; ++c) {
      prev[c * static_cast<std::size_t>(m) + d] += e.prob * pi[i * C + c];
    }
  }

  ExactAoiResult outr;
  outr.cap = cap_c;

  std::vector<double> cw(static_cast<std::size_t>(cap_c), 0.0);
  for (std::size_t c = 0; c + 1 < C; ++c) {
    for (int d = 0; d < m; ++d) {
      cw[c] += cur[c * static_cast<std::size_t>(m) + static_cast<std::size_t>(d)];
    }
  }
  outr.collision_duration = Pmf(0, std::move(cw)).trimmed();
  outr.deficit_c = 1.0 - outr.collision_duration.mass();
  outr.cap_warning = outr.deficit_c > 1e-6;

  // Age delta = m*k + pos: before this frame's transmission the law of
  // the previous frame's C applies shifted one frame, afterwards the
  // current frame's C; slot d decides the case split per position.
  std::vector<double> w(static_cast<std::size_t>(cap_c) * m, 0.0);
  for (std::size_t k = 0; k + 1 < C; ++k) {
    for (int pos = 0; pos < m; ++pos) {
      double term_before = 0.0;
      if (k >= 1) {
        for (int d = pos + 1; d < m; ++d) {
          term_before += prev[(k - 1) * static_cast<std::size_t>(m) +
                              static_cast<std::size_t>(d)];
        }
      }
      double term_after = 0.0;
      for (int d = 0; d <= pos; ++d) {
        term_after += cur[k * static_cast<std::size_t>(m) +
                          static_cast<std::size_t>(d)];
      }
      w[k * static_cast<std::size_t>(m) + static_cast<std::size_t>(pos)] =
          (term_before + term_after) / static_cast<double>(m);
    }
  }
  outr.aoi_averaged = Pmf(0, std::move(w)).trimmed();
  outr.deficit_aoi = 1.0 - outr.aoi_averaged.mass();
  return outr;
}

ExactJointResult exact_joint_collision_b(const SystemConfig& cfg,
                                         std::int64_t b_cap) {
  const SmallChain ch = enumerate_chain(cfg);
  if (b_cap < 2) throw std::invalid_argument("exact_joint_collision_b: b_cap < 2");
  if (ch.S * b_cap > 1000000) {
    throw std::invalid_argument("exact_joint_collision_b: m^V * b_cap exceeds 1e6");
  }
  const auto S = static_cast<std::size_t>(ch.S);
  const auto B = static_cast<std::size_t>(b_cap) + 1;  // index b, [0] unused

  std::vector<double> pi(S * B, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t b = 1; b < B; ++b) {
      pi[s * B + b] = 1.0 / static_cast<double>(S * (B - 1));
    }
  }
  std::vector<double> next(S * B);
  std::vector<double> from_mass(S);
  double res = 1.0;
  for (std::int64_t it = 0; it < 500000 && res >= 1e-13; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < S; ++i) {
      double sum = 0.0;
      for (std::size_t b = 1; b < B; ++b) sum += pi[i * B + b];
      from_mass[i] = sum;
    }
    for (const auto& e : ch.edges) {
      const auto i = static_cast<std::size_t>(e.from);
      const auto j = static_cast<std::size_t>(e.to);
      if (e.node0_moved) {
        next[j * B + 1] += e.prob * from_mass[i];
      } else {
        double* out = next.data() + j * B;
        const double* in = pi.data() + i * B;
        for (std::size_t b = 1; b + 1 < B; ++b) out[b + 1] += e.prob * in[b];
        out[B - 1] += e.prob * in[B - 1];
      }
    }
    res = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
      res = std::max(res, std::abs(next[k] - pi[k]));
    }
    pi.swap(next);
  }
  if (res >= 1e-13) {
    throw ConvergenceError("exact_joint_collision_b: iteration stalled", 0.0, res);
  }
  double total = 0.0;
  for (double x : pi) total += x;
  for (double& x : pi) x /= total;

  std::vector<double> joint(static_cast<std::size_t>(b_cap) - 1, 0.0);
  std::vector<double> marg(static_cast<std::size_t>(b_cap) - 1, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t b = 1; b + 1 < B; ++b) {
      marg[b - 1] += pi[s * B + b];
      if (ch.omega0[s] >= 2) joint[b - 1] += pi[s * B + b];
    }
  }
  ExactJointResult out;
  out.joint = Pmf(1, std::move(joint));
  out.marginal_b = Pmf(1, std::move(marg));
  out.deficit = 1.0 - out.marginal_b.mass();
  return out;
}

AssumptionDistances assumption_distance(const TraceSet& traces, int v,
                                        bool pool_all_nodes,
                                        std::int64_t min_samples) {
  const ReservationStats st = reservation_statistics(traces, v, pool_all_nodes);
  AssumptionDistances out;
  out.n_collision = st.n_prev_collision;
  out.n_singleton = st.n_prev_singleton;
  out.d_collision =
      total_variation(st.state_at_start_given_prev_collision, st.state_at_start);
  out.d_singleton =
      total_variation(st.state_at_start_given_prev_singleton, st.state_at_start);
  out.low_confidence =
      st.n_prev_collision < min_samples || st.n_prev_singleton < min_samples;
  return out;
}

EmptySlotReport empty_slot_report(const TraceSet& traces) {
  const int m = traces.frame_size();
  std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
  for (std::int64_t x = 0; x < traces.frames(); ++x) {
    w[static_cast<std::size_t>(traces.empty_count(x))] += 1.0;
  }
  for (double& c : w) c /= static_cast<double>(traces.frames());

  EmptySlotReport rep;
  rep.empirical = Pmf(0, std::move(w)).trimmed();
  rep.mean_empirical = mean(rep.empirical);
  const auto& cfg = traces.config();
  rep.e_n_fixed_point =
      expected_empty_slots(cfg.num_nodes, cfg.frame_size, cfg.ending_prob).e_n;
  rep.tv_vs_delta = total_variation(
      rep.empirical, Pmf::delta(std::llround(rep.e_n_fixed_point)));
  return rep;
}

}  // namespace spsaoi
