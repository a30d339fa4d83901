#ifndef NATIMPACT_STATS_HPP
#define NATIMPACT_STATS_HPP

#include "natimpact/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace natimpact {

/// Acceptable range for skewness and (non-excess) kurtosis alike.
inline constexpr double kMomentRuleOfThumb = 3.0;

template <typename Scalar = double>
Scalar log1p_transform(std::int64_t citations) {
  if (citations < 0) throw ValidationError("citation count must be non-negative");
  using std::log1p;
  return log1p(static_cast<Scalar>(citations));
}

/// Elementwise ln(1 + c) over a citation vector.
template <typename Derived>
auto log1p_citations(const Eigen::MatrixBase<Derived>& citations) {
  return citations.array().log1p().matrix();
}

template <typename Scalar>
struct MomentReport {
  std::size_t n = 0;
  Scalar mean{};
  Scalar skewness{};
  /// Non-excess: a normal sample sits near 3.
  Scalar kurtosis{};
  bool skewness_acceptable = false;
  bool kurtosis_acceptable = false;
};

/// Biased (divide-by-n) central-moment skewness and kurtosis.
template <typename Derived>
MomentReport<typename Derived::Scalar> moments(const Eigen::MatrixBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const auto n = values.size();
  if (n < 3) throw DegenerateSampleError("moments need at least 3 values");

  const Scalar mean = values.mean();
  const auto centred = (values.array() - mean).eval();
  const auto squared = centred.square().eval();
  const Scalar m2 = squared.mean();
  const Scalar scale = values.cwiseAbs().maxCoeff();
  const Scalar floor = 16 * std::numeric_limits<Scalar>::epsilon() * scale;
  if (!(m2 > floor * floor)) throw DegenerateSampleError("moments of a constant sample");
  const Scalar m3 = (squared * centred).mean();
  const Scalar m4 = squared.square().mean();

  MomentReport<Scalar> report;
  report.n = static_cast<std::size_t>(n);
  report.mean = mean;
  report.skewness = m3 / (m2 * std::sqrt(m2));
  report.kurtosis = m4 / (m2 * m2);
  report.skewness_acceptable = std::abs(report.skewness) <= kMomentRuleOfThumb;
  report.kurtosis_acceptable = std::abs(report.kurtosis) <= kMomentRuleOfThumb;
  return report;
}

namespace detail {

template <typename DerivedV, typename DerivedW>
typename DerivedW::Scalar checked_weight_total(const Eigen::MatrixBase<DerivedV>& values,
                                               const Eigen::MatrixBase<DerivedW>& weights) {
  if (values.size() != weights.size()) {
    throw ValidationError("values and weights differ in length");
  }
  if (weights.size() > 0 && weights.minCoeff() < 0) {
    throw ValidationError("weights must be non-negative");
  }
  const auto total = weights.sum();
  if (!(total > 0)) throw EmptySampleError("total weight is zero");
  return total;
}

template <typename Derived>
void check_citations(const Eigen::MatrixBase<Derived>& citations) {
  if (citations.size() > 0 && citations.minCoeff() < 0) {
    throw ValidationError("citation counts must be non-negative");
  }
}

}  // namespace detail

/// Σ w·x / Σ w.
template <typename DerivedV, typename DerivedW>
typename DerivedW::Scalar weighted_mean(const Eigen::MatrixBase<DerivedV>& values,
                                        const Eigen::MatrixBase<DerivedW>& weights) {
  const auto total = detail::checked_weight_total(values, weights);
  return values.dot(weights) / total;
}

/// Frequency-weight standard deviation: sqrt(Σ w(x − m)² / (Σw − 1)).
/// Requires Σw > 1.
template <typename DerivedV, typename DerivedW>
typename DerivedW::Scalar weighted_sd(const Eigen::MatrixBase<DerivedV>& values,
                                      const Eigen::MatrixBase<DerivedW>& weights) {
  const auto total = detail::checked_weight_total(values, weights);
  if (!(total > 1)) throw DegenerateSampleError("weighted sd needs total weight above 1");
  const auto mean = values.dot(weights) / total;
  const auto ss = ((values.array() - mean).square() * weights.array()).sum();
  return std::sqrt(ss / (total - 1));
}

/// exp(Σ w·ln(1+c) / Σ w) − 1. Unit weights give the plain offset geometric mean.
template <typename DerivedC, typename DerivedW>
typename DerivedW::Scalar geometric_mean(const Eigen::MatrixBase<DerivedC>& citations,
                                         const Eigen::MatrixBase<DerivedW>& weights) {
  detail::check_citations(citations);
  const auto total = detail::checked_weight_total(citations, weights);
  return std::expm1(citations.array().log1p().matrix().dot(weights) / total);
}

template <typename DerivedC, typename DerivedW>
typename DerivedW::Scalar arithmetic_mean(const Eigen::MatrixBase<DerivedC>& citations,
                                          const Eigen::MatrixBase<DerivedW>& weights) {
  detail::check_citations(citations);
  return weighted_mean(citations, weights);
}

/// Two-sided normal critical value z with P(|Z| ≤ z) = level.
inline double normal_critical(double level) {
  if (!(level > 0 && level < 1)) throw ValidationError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>{}, 0.5 + level / 2);
}

/// Two-sided Student-t critical value for `df` degrees of freedom.
inline double t_critical(double level, double df) {
  if (!(level > 0 && level < 1)) throw ValidationError("confidence level must lie in (0, 1)");
  if (!(df > 0)) throw ValidationError("t critical value needs positive degrees of freedom");
  return boost::math::quantile(boost::math::students_t_distribution<double>{df}, 0.5 + level / 2);
}

/// Linear-interpolation quantile of an ascending sample (R's default, type 7).
template <typename Scalar>
Scalar quantile_sorted(const std::vector<Scalar>& sorted, double p) {
  if (sorted.empty()) throw EmptySampleError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + static_cast<Scalar>(h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Median with the two-central-value midpoint for even counts.
template <typename Scalar>
Scalar median(std::vector<Scalar> values) {
  if (values.empty()) throw EmptySampleError("median of an empty sample");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const Scalar upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const Scalar lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2;
}

}  // namespace natimpact

#endif  // NATIMPACT_STATS_HPP
