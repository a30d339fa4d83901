#ifndef NATIMPACT_REGRESSION_HPP
#define NATIMPACT_REGRESSION_HPP

#include "natimpact/corpus.hpp"
#include "natimpact/errors.hpp"
#include "natimpact/interval.hpp"
#include "natimpact/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace natimpact {

/// Response variable of the design: ln(1 + citations), or raw counts.
enum class Response { Log1p, Raw };

/// Intercept column followed by one share column per focal country. OTHERS is
/// the reference category and never gets a column.
template <typename Scalar = double>
struct DesignMatrix {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix x;
  Vector response;
  std::vector<std::string> countries;

  Eigen::Index rows() const noexcept { return x.rows(); }
};

template <typename Scalar = double>
DesignMatrix<Scalar> build_design(const SubjectYearSlice& slice, const CountrySet& countries,
                                  Response response = Response::Log1p) {
  if (slice.empty()) throw InsufficientDataError("design of an empty slice");
  const auto n = static_cast<Eigen::Index>(slice.size());
  const auto k = static_cast<Eigen::Index>(countries.focal_size());

  DesignMatrix<Scalar> design;
  design.countries = countries.focal();
  design.x.resize(n, k + 1);
  design.response.resize(n);
  design.x.col(0).setOnes();
  const Eigen::MatrixXd shares = share_matrix(slice, countries);
  design.x.rightCols(k) = shares.leftCols(k).template cast<Scalar>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = slice.articles[static_cast<std::size_t>(i)].citations;
    design.response(i) = response == Response::Log1p ? log1p_transform<Scalar>(c)
                                                     : static_cast<Scalar>(c);
  }
  return design;
}

/// Least-squares fit of response on intercept plus country shares.
///
/// Coefficients are the minimum-norm solution, which coincides with the
/// normal-equations solution at full column rank. `covariance` is
/// σ²·(XᵀX)⁺ so standard errors of any estimable combination can be read off
/// it; entries are NaN when the residual degrees of freedom are zero.
template <typename Scalar = double>
struct RegressionFit {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<std::string> countries;
  Vector coefficients;  // intercept first, then one slope per country
  Matrix covariance;
  Vector residuals;
  Scalar residual_variance = std::numeric_limits<Scalar>::quiet_NaN();
  Eigen::Index rank = 0;
  Eigen::Index residual_df = 0;
  bool rank_deficient = false;
  std::vector<bool> identified;

  Scalar intercept() const { return coefficients(0); }
  Vector slopes() const { return coefficients.tail(coefficients.size() - 1); }
  bool se_defined() const { return residual_df > 0; }

  std::size_t index_of(std::string_view country) const {
    const auto it = std::find(countries.begin(), countries.end(), country);
    if (it == countries.end()) {
      throw LookupError("country " + std::string(country) + " has no column in the fit");
    }
    return static_cast<std::size_t>(it - countries.begin());
  }

  /// Row vector (1, e_c) picking out a + β_c.
  Vector pure_country(std::size_t index) const {
    Vector v = Vector::Zero(coefficients.size());
    v(0) = 1;
    v(static_cast<Eigen::Index>(index) + 1) = 1;
    return v;
  }

  /// a + β_c: the fitted response of an article wholly authored by the country.
  Scalar prediction(std::size_t index) const { return pure_country(index).dot(coefficients); }

  Scalar se_slope(std::size_t index) const {
    const auto j = static_cast<Eigen::Index>(index) + 1;
    return std::sqrt(covariance(j, j));
  }

  Scalar se_prediction(std::size_t index) const {
    const Vector v = pure_country(index);
    return std::sqrt(v.dot(covariance * v));
  }
};

/// Tolerance for deciding whether (1, e_c) lies in the design row space.
inline constexpr double kIdentifiabilityTolerance = 1e-8;

template <typename Scalar>
RegressionFit<Scalar> ols_fit(const DesignMatrix<Scalar>& design) {
  using Fit = RegressionFit<Scalar>;
  using Matrix = typename Fit::Matrix;
  using Vector = typename Fit::Vector;

  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  if (n < 2) throw InsufficientDataError("regression needs at least 2 articles");
  if (design.response.size() != n) throw ValidationError("response length differs from design rows");

  Eigen::JacobiSVD<Matrix> svd(design.x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const Scalar tol = static_cast<Scalar>(std::max(n, p)) * std::numeric_limits<Scalar>::epsilon() *
                     (s.size() > 0 ? s(0) : Scalar(0));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;

  const Matrix u = svd.matrixU().leftCols(rank);
  const Matrix v = svd.matrixV().leftCols(rank);
  const Vector inv_s = s.head(rank).cwiseInverse();

  Fit fit;
  fit.countries = design.countries;
  fit.rank = rank;
  fit.rank_deficient = rank < p;
  fit.residual_df = n - rank;
  fit.coefficients = v * inv_s.asDiagonal() * (u.transpose() * design.response);
  fit.residuals = design.response - design.x * fit.coefficients;

  const Matrix gram_pinv = v * inv_s.cwiseAbs2().asDiagonal() * v.transpose();
  if (fit.residual_df > 0) {
    fit.residual_variance = fit.residuals.squaredNorm() / static_cast<Scalar>(fit.residual_df);
    fit.covariance = fit.residual_variance * gram_pinv;
  } else {
    fit.covariance = Matrix::Constant(p, p, std::numeric_limits<Scalar>::quiet_NaN());
  }

  fit.identified.resize(design.countries.size());
  for (std::size_t c = 0; c < design.countries.size(); ++c) {
    const Vector target = fit.pure_country(c);
    const Vector projected = v * (v.transpose() * target);
    fit.identified[c] = (target - projected).norm() <= kIdentifiabilityTolerance * target.norm();
  }
  return fit;
}

/// (exp(a + β_c) − 1) / μ_g.
template <typename Scalar>
Scalar reg_indicator(const RegressionFit<Scalar>& fit, Scalar mu_g, std::string_view country) {
  const auto index = fit.index_of(country);
  if (!fit.identified[index]) {
    throw IdentifiabilityError("a + beta for " + std::string(country) + " is not estimable");
  }
  if (!(mu_g > 0)) throw DivisionDegenerateError("overall geometric mean is zero");
  return std::expm1(fit.prediction(index)) / mu_g;
}

/// t-based interval (exp(a + β_c ± t·SE) − 1) / μ_g. PaperLiteral uses SE(β_c);
/// Corrected uses SE(a + β_c).
template <typename Scalar>
Interval reg_indicator_ci(const RegressionFit<Scalar>& fit, Scalar mu_g, std::string_view country,
                          double level, CiMode mode = CiMode::PaperLiteral) {
  const auto index = fit.index_of(country);
  if (!fit.identified[index]) {
    throw IdentifiabilityError("a + beta for " + std::string(country) + " is not estimable");
  }
  if (!(mu_g > 0)) throw DivisionDegenerateError("overall geometric mean is zero");
  if (!fit.se_defined()) throw CiUnavailableError("no residual degrees of freedom");
  const Scalar se = mode == CiMode::PaperLiteral ? fit.se_slope(index) : fit.se_prediction(index);
  if (!std::isfinite(static_cast<double>(se))) throw CiUnavailableError("standard error undefined");

  const double t = t_critical(level, static_cast<double>(fit.residual_df));
  const double centre = static_cast<double>(fit.prediction(index));
  const double half = t * static_cast<double>(se);
  const double denom = static_cast<double>(mu_g);
  return {std::expm1(centre - half) / denom, std::expm1(centre + half) / denom};
}

}  // namespace natimpact

#endif  // NATIMPACT_REGRESSION_HPP
