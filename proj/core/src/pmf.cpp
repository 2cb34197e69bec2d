#include "spsaoi/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spsaoi {

namespace {

double kahan_sum(const std::vector<double>& v) {
  double sum = 0.0, c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

Pmf::Pmf(std::int64_t offset, std::vector<double> weights)
    : offset_(offset), weights_(std::move(weights)) {
  for (double w : weights_) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("Pmf: negative or NaN weight " +
                                  std::to_string(w));
    }
  }
  mass_ = kahan_sum(weights_);
}

Pmf Pmf::delta(std::int64_t value) { return Pmf(value, {1.0}); }

double Pmf::cdf(std::int64_t x) const {
  if (empty() || x < offset_) return 0.0;
  const std::int64_t last = std::min(x, max_value());
  double sum = 0.0;
  for (std::int64_t v = offset_; v <= last; ++v) {
    sum += weights_[static_cast<std::size_t>(v - offset_)];
  }
  return sum;
}

Pmf Pmf::trimmed() const {
  std::size_t lo = 0, hi = weights_.size();
  while (lo < hi && weights_[lo] == 0.0) ++lo;
  while (hi > lo && weights_[hi - 1] == 0.0) --hi;
  return Pmf(offset_ + static_cast<std::int64_t>(lo),
             std::vector<double>(weights_.begin() + lo, weights_.begin() + hi));
}

Pmf Pmf::renormalized() const {
  if (mass_ <= 0.0) throw std::domain_error("Pmf: cannot renormalize zero mass");
  std::vector<double> w(weights_);
  for (double& x : w) x /= mass_;
  return Pmf(offset_, std::move(w));
}

Pmf convolve(const Pmf& a, const Pmf& b) {
  if (a.empty() || b.empty()) return Pmf();
  const auto& wa = a.weights();
  const auto& wb = b.weights();
  std::vector<double> out(wa.size() + wb.size() - 1, 0.0);
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const double ai = wa[i];
    if (ai == 0.0) continue;
    for (std::size_t j = 0; j < wb.size(); ++j) {
      out[i + j] += ai * wb[j];
    }
  }
  return Pmf(a.offset() + b.offset(), std::move(out));
}

Pmf convolve_power(const Pmf& p, unsigned w) {
  Pmf result = Pmf::delta(0);
  Pmf base = p;
  while (w > 0) {
    if (w & 1u) result = convolve(result, base);
    w >>= 1u;
    if (w > 0) base = convolve(base, base);
  }
  return result;
}

double total_variation(const Pmf& p, const Pmf& q) {
  if (p.empty() && q.empty()) return 0.0;
  const std::int64_t lo = std::min(p.empty() ? q.min_value() : p.min_value(),
                                   q.empty() ? p.min_value() : q.min_value());
  const std::int64_t hi = std::max(p.empty() ? q.max_value() : p.max_value(),
                                   q.empty() ? p.max_value() : q.max_value());
  double sum = 0.0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    sum += std::abs(p.at(x) - q.at(x));
  }
  return 0.5 * sum;
}

double mean(const Pmf& p) {
  if (p.mass() <= 0.0) throw std::domain_error("mean: pmf has no mass");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += static_cast<double>(p.offset() + static_cast<std::int64_t>(i)) *
           p.weights()[i];
  }
  return sum;
}

double tail_above(const Pmf& p, std::int64_t theta) {
  const double t = 1.0 - p.cdf(theta);
  return std::clamp(t, 0.0, 1.0);
}

double binomial_pmf(std::int64_t n, double p, std::int64_t k) {
  if (n < 0 || k < 0) throw std::domain_error("binomial_pmf: negative argument");
  if (k > n) throw std::domain_error("binomial_pmf: k > n");
  if (p < 0.0 || p > 1.0) {
    throw std::domain_error("binomial_pmf: p outside [0,1]");
  }
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double logc = std::lgamma(static_cast<double>(n) + 1.0) -
                      std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0);
  const double logp = logc + static_cast<double>(k) * std::log(p) +
                      static_cast<double>(n - k) * std::log1p(-p);
  return std::exp(logp);
}

Pmf truncated_geometric(double p, std::int64_t bmax) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::domain_error("truncated_geometric: p outside (0,1]");
  }
  if (bmax < 1) throw std::domain_error("truncated_geometric: bmax < 1");
  std::vector<double> w(static_cast<std::size_t>(bmax));
  double cur = p;
  for (std::int64_t b = 1; b <= bmax; ++b) {
    w[static_cast<std::size_t>(b - 1)] = cur;
    cur *= (1.0 - p);
  }
  return Pmf(1, std::move(w));
}

}  // namespace spsaoi
