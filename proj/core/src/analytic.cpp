#include "spsaoi/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spsaoi {

namespace {

// P(k of n nodes end their reservation this frame), log-space.
double binom_term(int n, double p, int k) {
  return binomial_pmf(n, p, k);
}

// Dissolution-time vector u = (I - A)^{-1} e, with
// A(m, n) = P(n of m colliding nodes still collide one frame later)
//         = C(m, n) (1-p)^n p^(m-n),  n <= m (lower triangular).
std::vector<double> dissolution_times(int V, double p_end) {
  std::vector<double> u(static_cast<std::size_t>(V) + 1, 0.0);
  for (int mm = 1; mm <= V; ++mm) {
    double acc = 1.0;
    for (int nn = 1; nn < mm; ++nn) {
      acc += binom_term(mm, 1.0 - p_end, nn) * u[static_cast<std::size_t>(nn)];
    }
    const double diag = binom_term(mm, 1.0 - p_end, mm);  // (1-p)^m
    u[static_cast<std::size_t>(mm)] = acc / (1.0 - diag);
  }
  return u;
}

}  // namespace

EmptySlotSolution expected_empty_slots(int num_nodes, int frame_size,
                                       double ending_prob, double tol,
                                       int max_iter,
                                       std::optional<double> seed) {
  if (num_nodes < 1 || num_nodes >= frame_size) {
    throw std::domain_error("expected_empty_slots: requires 1 <= V < m");
  }
  if (!(ending_prob > 0.0 && ending_prob <= 1.0)) {
    throw std::domain_error("expected_empty_slots: requires 0 < p_E <= 1");
  }
  const int V = num_nodes;
  const double m = static_cast<double>(frame_size);
  const std::vector<double> u = dissolution_times(V, ending_prob);

  EmptySlotSolution sol;
  double en = seed.value_or(m / static_cast<double>(V));
  sol.trajectory.push_back(en);
  for (int it = 1; it <= max_iter; ++it) {
    const double q = ending_prob / (1.0 + en);
    if (!(q > 0.0 && q < 1.0)) {
      throw ConvergenceError("expected_empty_slots: iterate left (0, m)", en,
                             sol.residual);
    }
    double wu = 0.0;
    for (int k = 1; k <= V; ++k) {
      wu += binomial_pmf(V, q, k) * u[static_cast<std::size_t>(k)];
    }
    const double next = m / (1.0 + wu);
    sol.residual = std::abs(next - en);
    en = next;
    sol.trajectory.push_back(en);
    sol.iterations = it;
    if (sol.residual < tol) {
      sol.e_n = en;
      if (!(en > 0.0 && en < m)) {
        throw ConvergenceError("expected_empty_slots: fixed point outside (0, m)",
                               en, sol.residual);
      }
      return sol;
    }
  }
  throw ConvergenceError("expected_empty_slots: no convergence after " +
                             std::to_string(max_iter) + " iterations",
                         en, sol.residual);
}

AnalyticParams AnalyticParams::from_config(const SystemConfig& cfg, int w_bar,
                                           int b_bar) {
  AnalyticParams p;
  p.num_nodes = cfg.num_nodes;
  p.frame_size = cfg.frame_size;
  p.ending_prob = cfg.ending_prob;
  p.w_bar = w_bar;
  p.b_bar = b_bar;
  return p;
}

void AnalyticParams::validate() const {
  if (num_nodes < 1 || num_nodes >= frame_size) {
    throw std::domain_error("analytic params: requires 1 <= V < m");
  }
  if (!(ending_prob > 0.0 && ending_prob <= 1.0)) {
    throw std::domain_error("analytic params: p_E outside (0, 1]");
  }
  if (w_bar < 1 || b_bar < 1) {
    throw std::domain_error("analytic params: w_bar and b_bar must be >= 1");
  }
  if (const auto* ex = std::get_if<ExplicitEmptySlots>(&empty_slot_model)) {
    const Pmf& q = ex->q_n;
    if (q.empty() || q.min_value() < 1 || q.max_value() > frame_size) {
      throw std::domain_error("analytic params: Q_N support must lie in {1..m}");
    }
    if (std::abs(q.mass() - 1.0) > 1e-9) {
      throw std::domain_error("analytic params: Q_N mass must be 1");
    }
  }
}

namespace {

Pmf start_state_from_point(int V, double p_end, double n_empty) {
  if (!(n_empty > 0.0)) {
    throw std::domain_error("start_state_pmf: empty-slot count must be positive");
  }
  const double q = p_end / n_empty;
  if (q > 1.0) {
    throw std::domain_error("start_state_pmf: p_E / n exceeds 1");
  }
  std::vector<double> w(static_cast<std::size_t>(V));
  for (int lam = 1; lam <= V; ++lam) {
    w[static_cast<std::size_t>(lam - 1)] = binomial_pmf(V - 1, q, lam - 1);
  }
  return Pmf(1, std::move(w));
}

}  // namespace

Pmf start_state_pmf(const AnalyticParams& params, const Pmf& q_n) {
  params.validate();
  const int V = params.num_nodes;
  std::vector<double> w(static_cast<std::size_t>(V), 0.0);
  for (std::int64_t n = q_n.min_value(); n <= q_n.max_value(); ++n) {
    const double qn = q_n.at(n);
    if (qn == 0.0) continue;
    if (n < 1) throw std::domain_error("start_state_pmf: Q_N support below 1");
    const Pmf part = start_state_from_point(V, params.ending_prob,
                                            static_cast<double>(n));
    for (int lam = 1; lam <= V; ++lam) {
      w[static_cast<std::size_t>(lam - 1)] += qn * part.at(lam);
    }
  }
  return Pmf(1, std::move(w));
}

Pmf start_state_pmf(const AnalyticParams& params) {
  params.validate();
  if (const auto* ex = std::get_if<ExplicitEmptySlots>(&params.empty_slot_model)) {
    return start_state_pmf(params, ex->q_n);
  }
  const EmptySlotSolution sol = expected_empty_slots(
      params.num_nodes, params.frame_size, params.ending_prob);
  return start_state_from_point(params.num_nodes, params.ending_prob, sol.e_n);
}

double collision_given_duration(const Pmf& start_pmf, double ending_prob,
                                std::int64_t b) {
  if (b < 1) throw std::domain_error("collision_given_duration: b < 1");
  // (1 - (1-p)^(b-1))^(lambda-1) with the 0^0 = 1 convention at b = 1.
  const double base = 1.0 - std::pow(1.0 - ending_prob, static_cast<double>(b - 1));
  double sum = 0.0;
  double basepow = 1.0;
  for (std::int64_t lam = start_pmf.min_value(); lam <= start_pmf.max_value();
       ++lam) {
    sum += start_pmf.at(lam) * basepow;
    basepow *= base;
  }
  return std::clamp(1.0 - sum, 0.0, 1.0);
}

double reservation_duration_pmf(double ending_prob, std::int64_t b,
                                GeometricForm form) {
  if (b < 1) throw std::domain_error("reservation_duration_pmf: b < 1");
  const double e = form == GeometricForm::normalized
                       ? static_cast<double>(b - 1)
                       : static_cast<double>(b);
  return ending_prob * std::pow(1.0 - ending_prob, e);
}

AnalyticModel::AnalyticModel(AnalyticParams params)
    : params_(std::move(params)) {
  params_.validate();
  if (std::holds_alternative<FixedPointEmptySlots>(params_.empty_slot_model)) {
    fixed_point_ = expected_empty_slots(params_.num_nodes, params_.frame_size,
                                        params_.ending_prob);
    empty_slots_ = fixed_point_->e_n;
    start_state_ = start_state_from_point(params_.num_nodes,
                                          params_.ending_prob, empty_slots_);
  } else {
    const auto& ex = std::get<ExplicitEmptySlots>(params_.empty_slot_model);
    empty_slots_ = mean(ex.q_n);
    start_state_ = start_state_pmf(params_, ex.q_n);
  }

  const std::int64_t bbar = params_.b_bar;
  f_p_.assign(static_cast<std::size_t>(bbar) + 1, 0.0);
  double s = 0.0, r = 0.0;
  for (std::int64_t b = 1; b <= bbar; ++b) {
    const double pb =
        reservation_duration_pmf(params_.ending_prob, b, params_.geometric_form);
    const double fp =
        pb * collision_given_duration(start_state_, params_.ending_prob, b);
    f_p_[static_cast<std::size_t>(b)] = fp;
    s += pb - fp;
    r += fp;
  }
  s_ = s;
  r_ = r;

  // Q(c) = s * sum_{w=0..w_bar} f_P^{conv w}(c). The running convolution
  // power is trimmed below kTailEps per point; the lost mass stays part
  // of the reported truncation deficit, nothing is renormalized.
  constexpr double kTailEps = 1e-18;
  std::vector<double> total{s_};
  std::vector<double> acc{1.0};  // f_P^{conv 0} = delta(0)
  for (int w = 1; w <= params_.w_bar; ++w) {
    std::vector<double> next(acc.size() + static_cast<std::size_t>(bbar), 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double a = acc[i];
      if (a < kTailEps) continue;
      for (std::int64_t b = 1; b <= bbar; ++b) {
        next[i + static_cast<std::size_t>(b)] +=
            a * f_p_[static_cast<std::size_t>(b)];
      }
    }
    while (!next.empty() && next.back() < kTailEps) next.pop_back();
    acc = std::move(next);
    if (acc.empty()) break;
    if (total.size() < acc.size()) total.resize(acc.size(), 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) total[i] += s_ * acc[i];
  }
  q_ = Pmf(0, std::move(total));
}

double AnalyticModel::joint_collision_duration(std::int64_t b) const {
  if (b < 1 || b > params_.b_bar) {
    throw std::domain_error("joint_collision_duration: b outside 1..b_bar");
  }
  return f_p_[static_cast<std::size_t>(b)];
}

Pmf AnalyticModel::aoi_pmf(int pos) const {
  const int m = params_.frame_size;
  if (pos < 0 || pos >= m) throw std::domain_error("aoi_pmf: bad position");
  // Age delta = m*k + pos. Before this frame's transmission (probability
  // (m-1-pos)/m for a uniform slot) the age reaches through the previous
  // frame: k = C + 1. At or after it (probability (pos+1)/m): k = C.
  const double c_before = static_cast<double>(m - 1 - pos) / m;
  const double c_after = static_cast<double>(pos + 1) / m;
  const auto K = static_cast<std::int64_t>(q_.size());
  std::vector<double> w(static_cast<std::size_t>((K + 1) * m), 0.0);
  for (std::int64_t k = 0; k <= K; ++k) {
    const double qa = (k >= 1) ? q_.at(k - 1) : 0.0;  // Q(-1) = 0
    const double qb = q_.at(k);
    const double val = c_before * qa + c_after * qb;
    if (val != 0.0) w[static_cast<std::size_t>(k * m + pos)] = val;
  }
  return Pmf(0, std::move(w)).trimmed();
}

const Pmf& AnalyticModel::aoi_pmf_averaged() const {
  if (averaged_.has_value()) return *averaged_;
  const int m = params_.frame_size;
  const auto K = static_cast<std::int64_t>(q_.size());
  std::vector<double> w(static_cast<std::size_t>((K + 1) * m), 0.0);
  for (std::int64_t k = 0; k <= K; ++k) {
    const double qa = (k >= 1) ? q_.at(k - 1) : 0.0;
    const double qb = q_.at(k);
    for (int pos = 0; pos < m; ++pos) {
      const double c_before = static_cast<double>(m - 1 - pos) / m;
      const double c_after = static_cast<double>(pos + 1) / m;
      w[static_cast<std::size_t>(k * m + pos)] =
          (c_before * qa + c_after * qb) / m;
    }
  }
  averaged_ = Pmf(0, std::move(w)).trimmed();
  return *averaged_;
}

double AnalyticModel::average_aoi() const {
  const Pmf& p = aoi_pmf_averaged();
  return mean(p) / p.mass();
}

double AnalyticModel::violation_probability(std::int64_t theta) const {
  const Pmf& p = aoi_pmf_averaged();
  return std::clamp(1.0 - p.cdf(theta) / p.mass(), 0.0, 1.0);
}

Pmf collision_duration_pmf(const AnalyticParams& params) {
  return AnalyticModel(params).collision_duration();
}

Pmf aoi_pmf_averaged(const AnalyticParams& params) {
  return AnalyticModel(params).aoi_pmf_averaged();
}

double average_aoi(const AnalyticParams& params) {
  return AnalyticModel(params).average_aoi();
}

double violation_probability(const AnalyticParams& params, std::int64_t theta) {
  return AnalyticModel(params).violation_probability(theta);
}

double p_e_from_3gpp(double p_rc, double p_keep) {
  if (!(p_rc >= 0.0 && p_rc < 1.0) || !(p_keep >= 0.0 && p_keep < 1.0)) {
    throw std::domain_error("p_e_from_3gpp: inputs must lie in [0, 1)");
  }
  return (1.0 - p_rc) * (1.0 - p_keep);
}

}  // namespace spsaoi
