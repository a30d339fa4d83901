#include "natimpact/indicators.hpp"

#include "natimpact/errors.hpp"
#include "natimpact/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace natimpact {

namespace {

// Share column of one country; throws for codes outside focal ∪ {OTHERS}.
Eigen::VectorXd country_weights(const SubjectYearSlice& slice, std::string_view country,
                                const CountrySet& countries) {
  const auto index = countries.index_of(country);
  if (!index) throw LookupError("country " + std::string(country) + " is neither focal nor OTHERS");
  return share_matrix(slice, countries).col(static_cast<Eigen::Index>(*index));
}

void require_articles(double n_c, std::string_view country) {
  if (!(n_c > 0)) throw NoArticlesError("country " + std::string(country) + " has no articles");
}

double snap_to_integer(double q) {
  const double r = std::round(q);
  return std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q)) ? r : q;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::RegGeo: return "REG_GEO";
    case Method::Geo: return "GEO";
    case Method::Arith: return "ARITH";
    case Method::TopX: return "TOP_X";
  }
  return "?";
}

Method parse_method(std::string_view tag) {
  if (tag == "REG_GEO") return Method::RegGeo;
  if (tag == "GEO") return Method::Geo;
  if (tag == "ARITH") return Method::Arith;
  if (tag == "TOP_X") return Method::TopX;
  throw ConfigError("unknown method '" + std::string(tag) + "'");
}

std::string_view to_string(Scale scale) {
  return scale == Scale::Normalised ? "normalised" : "raw";
}

Scale parse_scale(std::string_view tag) {
  if (tag == "normalised") return Scale::Normalised;
  if (tag == "raw") return Scale::Raw;
  throw ConfigError("unknown scale '" + std::string(tag) + "'");
}

void BootstrapConfig::validate() const {
  if (replicates < 1) throw ConfigError("bootstrap replicates must be at least 1");
  if (!(level > 0 && level < 1)) throw ConfigError("bootstrap level must lie in (0, 1)");
}

WeightedLogSummary weighted_log_summary(const SubjectYearSlice& slice, std::string_view country,
                                        const CountrySet& countries) {
  const Eigen::VectorXd weights = country_weights(slice, country, countries);
  WeightedLogSummary summary;
  summary.n_c = weights.sum();
  require_articles(summary.n_c, country);
  const Eigen::VectorXd logs = log1p_citations(citation_vector(slice));
  summary.mean_log = weighted_mean(logs, weights);
  summary.sd_log = summary.n_c > 1 ? weighted_sd(logs, weights) : 0.0;
  return summary;
}

IndicatorResult geo_indicator(const SubjectYearSlice& slice, std::string_view country,
                              const CountrySet& countries, Scale scale) {
  const Eigen::VectorXd weights = country_weights(slice, country, countries);
  const Eigen::VectorXd citations = citation_vector(slice);

  IndicatorResult result;
  result.country = std::string(country);
  result.method = Method::Geo;
  result.n_c = weights.sum();
  require_articles(result.n_c, country);
  result.params.scale = scale;
  const double national = geometric_mean(citations, weights);
  if (scale == Scale::Normalised) {
    result.normaliser = geometric_mean(citations, Eigen::VectorXd::Ones(citations.size()));
    if (!(result.normaliser > 0)) throw DivisionDegenerateError("overall geometric mean is zero");
  }
  result.estimate = national / result.normaliser;
  return result;
}

Interval geo_indicator_ci(const SubjectYearSlice& slice, std::string_view country,
                          const CountrySet& countries, double level, CiMode mode, Scale scale) {
  const WeightedLogSummary summary = weighted_log_summary(slice, country, countries);
  if (!(summary.n_c > 1)) throw CiUnavailableError("GEO interval needs n_c > 1");

  double normaliser = 1.0;
  if (scale == Scale::Normalised) {
    const Eigen::VectorXd citations = citation_vector(slice);
    normaliser = geometric_mean(citations, Eigen::VectorXd::Ones(citations.size()));
    if (!(normaliser > 0)) throw DivisionDegenerateError("overall geometric mean is zero");
  }
  const double se = summary.sd_log / std::sqrt(summary.n_c);
  if (mode == CiMode::PaperLiteral) {
    const double national = std::expm1(summary.mean_log);
    return {(national - se) / normaliser, (national + se) / normaliser};
  }
  const double half = normal_critical(level) * se;
  return {std::expm1(summary.mean_log - half) / normaliser,
          std::expm1(summary.mean_log + half) / normaliser};
}

IndicatorResult arith_indicator(const SubjectYearSlice& slice, std::string_view country,
                                const CountrySet& countries, Scale scale) {
  const Eigen::VectorXd weights = country_weights(slice, country, countries);
  const Eigen::VectorXd citations = citation_vector(slice);

  IndicatorResult result;
  result.country = std::string(country);
  result.method = Method::Arith;
  result.n_c = weights.sum();
  require_articles(result.n_c, country);
  result.params.scale = scale;
  const double national = arithmetic_mean(citations, weights);
  if (scale == Scale::Normalised) {
    result.normaliser = citations.mean();
    if (!(result.normaliser > 0)) throw DivisionDegenerateError("overall mean is zero");
  }
  result.estimate = national / result.normaliser;
  return result;
}

Eigen::VectorXd top_credits(const Eigen::VectorXd& citations, double x) {
  if (!(x > 0 && x < 100)) throw ValidationError("X must lie in (0, 100)");
  const auto n = citations.size();
  Eigen::VectorXd credits = Eigen::VectorXd::Zero(n);
  if (n == 0) return credits;

  std::vector<double> sorted(citations.data(), citations.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double q = snap_to_integer(static_cast<double>(n) * x / 100.0);
  const auto k = static_cast<std::size_t>(std::ceil(q));  // 1 ≤ k ≤ n since 0 < q < n
  const double threshold = sorted[std::clamp<std::size_t>(k, 1, sorted.size()) - 1];

  const auto above = (citations.array() > threshold).count();
  const auto tied = (citations.array() == threshold).count();
  const double tie_credit = (q - static_cast<double>(above)) / static_cast<double>(tied);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (citations(i) > threshold) {
      credits(i) = 1.0;
    } else if (citations(i) == threshold) {
      credits(i) = tie_credit;
    }
  }
  return credits;
}

IndicatorResult top_share(const SubjectYearSlice& slice, std::string_view country,
                          const CountrySet& countries, double x) {
  const Eigen::VectorXd weights = country_weights(slice, country, countries);
  IndicatorResult result;
  result.country = std::string(country);
  result.method = Method::TopX;
  result.n_c = weights.sum();
  require_articles(result.n_c, country);
  result.params.top_x = x;
  result.params.scale = Scale::Raw;
  const Eigen::VectorXd credits = top_credits(citation_vector(slice), x);
  result.estimate = std::clamp(weights.dot(credits) / result.n_c, 0.0, 1.0);
  const double world_share = result.n_c / static_cast<double>(slice.size());
  result.warning = result.n_c < 30 || world_share > x / 100.0;
  return result;
}

Interval top_share_ci(const IndicatorResult& result, double level) {
  const double t = result.estimate;
  if (!(t > 0 && t < 1)) throw CiUnavailableError("proportion interval needs 0 < t_c < 1");
  if (!(result.n_c > 0)) throw CiUnavailableError("proportion interval needs n_c > 0");
  const double half = normal_critical(level) * std::sqrt(t * (1 - t) / result.n_c);
  return {std::max(0.0, t - half), std::min(1.0, t + half)};
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BootstrapResult bootstrap_ci(const SubjectYearSlice& slice, std::string_view country,
                             const CountrySet& countries, Method statistic,
                             const BootstrapConfig& config, Scale scale) {
  config.validate();
  if (statistic != Method::Geo && statistic != Method::Arith) {
    throw ValidationError("bootstrap supports GEO and ARITH only");
  }
  if (slice.empty()) throw NoArticlesError("bootstrap of an empty slice");
  const Eigen::VectorXd weights = country_weights(slice, country, countries);
  require_articles(weights.sum(), country);

  const Eigen::VectorXd citations = citation_vector(slice);
  const Eigen::VectorXd values =
      statistic == Method::Geo ? Eigen::VectorXd(log1p_citations(citations)) : citations;
  const auto n = static_cast<std::size_t>(values.size());
  const bool geo = statistic == Method::Geo;
  const bool normalise = scale == Scale::Normalised;

  constexpr double kSkipped = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> replicate(static_cast<std::size_t>(config.replicates), kSkipped);

#pragma omp parallel for schedule(static)
  for (int r = 0; r < config.replicates; ++r) {
    std::mt19937_64 rng(substream_seed(config.seed, static_cast<std::uint64_t>(r)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double weight_sum = 0.0, weighted = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<Eigen::Index>(pick(rng));
      weight_sum += weights(j);
      weighted += weights(j) * values(j);
      total += values(j);
    }
    if (!(weight_sum > 0)) continue;
    const double national = geo ? std::expm1(weighted / weight_sum) : weighted / weight_sum;
    double denom = 1.0;
    if (normalise) {
      const double mean = total / static_cast<double>(n);
      denom = geo ? std::expm1(mean) : mean;
      if (!(denom > 0)) continue;
    }
    replicate[static_cast<std::size_t>(r)] = national / denom;
  }

  BootstrapResult result;
  std::vector<double> used;
  used.reserve(replicate.size());
  for (double v : replicate) {
    if (std::isnan(v)) {
      ++result.skipped;
    } else {
      used.push_back(v);
    }
  }
  result.used = static_cast<int>(used.size());
  if (used.empty()) throw CiUnavailableError("every bootstrap replicate was skipped");
  std::sort(used.begin(), used.end());
  result.interval = {quantile_sorted(used, (1 - config.level) / 2),
                     quantile_sorted(used, (1 + config.level) / 2)};
  return result;
}

}  // namespace natimpact
