#ifndef SPSAOI_PMF_HPP
#define SPSAOI_PMF_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace spsaoi {

/// Finite-support discrete distribution over consecutive integers.
///
/// Weights are stored densely starting at offset(). The total mass is cached
/// at construction. Deficient distributions (mass < 1) are legal and signal
/// truncation; nothing here renormalizes implicitly.
class Pmf {
 public:
  Pmf() = default;
  Pmf(std::int64_t offset, std::vector<double> weights);

  static Pmf delta(std::int64_t value);

  std::int64_t offset() const { return offset_; }
  const std::vector<double>& weights() const { return weights_; }
  double mass() const { return mass_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  std::int64_t min_value() const { return offset_; }
  std::int64_t max_value() const {
    return offset_ + static_cast<std::int64_t>(weights_.size()) - 1;
  }

  /// Probability at x; zero outside the stored support.
  double at(std::int64_t x) const {
    if (x < offset_) return 0.0;
    const std::uint64_t i = static_cast<std::uint64_t>(x - offset_);
    return i < weights_.size() ? weights_[i] : 0.0;
  }

  /// Cumulative probability P(X <= x) over the stored support.
  double cdf(std::int64_t x) const;

  /// Copy with leading/trailing exact-zero weights removed. Mass unchanged.
  Pmf trimmed() const;

  /// Explicit renormalization to total mass one. Throws on zero mass.
  Pmf renormalized() const;

 private:
  std::int64_t offset_ = 0;
  std::vector<double> weights_;
  double mass_ = 0.0;
};

/// Discrete convolution: result(x) = sum_j a(j) * b(x - j).
Pmf convolve(const Pmf& a, const Pmf& b);

/// w-fold self-convolution via repeated squaring; w = 0 yields delta(0).
Pmf convolve_power(const Pmf& p, unsigned w);

/// 0.5 * sum_x |p(x) - q(x)|; points missing from a support count as zero.
double total_variation(const Pmf& p, const Pmf& q);

/// sum_x x * p(x), without renormalization. Throws std::domain_error when
/// the pmf carries no mass.
double mean(const Pmf& p);

/// 1 - P(X <= theta), clamped to [0, 1].
double tail_above(const Pmf& p, std::int64_t theta);

/// Binomial pmf C(n,k) p^k (1-p)^(n-k), evaluated in log space so that it
/// stays usable for n up to at least 1e4. Throws std::domain_error for k > n.
double binomial_pmf(std::int64_t n, double p, std::int64_t k);

/// Geometric law p(1-p)^(b-1) on {1, ..., bmax} (truncated, deficient).
Pmf truncated_geometric(double p, std::int64_t bmax);

}  // namespace spsaoi

#endif  // SPSAOI_PMF_HPP
