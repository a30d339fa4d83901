#ifndef NATIMPACT_INDICATORS_HPP
#define NATIMPACT_INDICATORS_HPP

#include "natimpact/corpus.hpp"
#include "natimpact/interval.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace natimpact {

enum class Method { RegGeo, Geo, Arith, TopX };

std::string_view to_string(Method method);
/// Accepts the tags REG_GEO, GEO, ARITH and TOP_X.
Method parse_method(std::string_view tag);

/// Normalised divides a national mean by the slice-wide mean; Raw leaves it
/// as a citation count.
enum class Scale { Normalised, Raw };

std::string_view to_string(Scale scale);
Scale parse_scale(std::string_view tag);

struct BootstrapConfig {
  int replicates = 999;
  double level = 0.95;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IndicatorParams {
  double top_x = 10.0;
  double level = 0.95;
  CiMode reg_ci_mode = CiMode::PaperLiteral;
  CiMode geo_ci_mode = CiMode::Corrected;
  Scale scale = Scale::Normalised;
  /// GEO intervals from the bootstrap instead of the closed form. ARITH
  /// intervals always come from the bootstrap.
  bool geo_bootstrap = false;
  BootstrapConfig bootstrap;
};

struct IndicatorResult {
  std::string country;
  Method method = Method::Geo;
  double estimate = 0.0;
  std::optional<Interval> ci;
  double n_c = 0.0;
  /// Mean the national value was divided by (1 for Raw scale).
  double normaliser = 1.0;
  IndicatorParams params;
  /// Set on TOP_X intervals resting on a shaky proportion approximation:
  /// n_c < 30, or a country too large to place all its articles in the top X%.
  bool warning = false;
};

/// Mean log-citations of a country with its fractional weights, and the
/// matching frequency-weight sd; the ingredients of GEO and its interval.
struct WeightedLogSummary {
  double n_c = 0.0;
  double mean_log = 0.0;
  double sd_log = 0.0;
};

WeightedLogSummary weighted_log_summary(const SubjectYearSlice& slice, std::string_view country,
                                        const CountrySet& countries);

/// μ_gc / μ_g (or μ_gc on Raw scale).
IndicatorResult geo_indicator(const SubjectYearSlice& slice, std::string_view country,
                              const CountrySet& countries, Scale scale = Scale::Normalised);

/// Corrected: (exp(m_c ± z·s_c/√n_c) − 1)/μ_g on the log scale.
/// PaperLiteral: (μ_gc ± s_c/√n_c)/μ_g.
Interval geo_indicator_ci(const SubjectYearSlice& slice, std::string_view country,
                          const CountrySet& countries, double level,
                          CiMode mode = CiMode::Corrected, Scale scale = Scale::Normalised);

/// μ_c / μ (or μ_c on Raw scale).
IndicatorResult arith_indicator(const SubjectYearSlice& slice, std::string_view country,
                                const CountrySet& countries, Scale scale = Scale::Normalised);

/// Credit each article earns towards the top X% most cited: 1 strictly above
/// the threshold, (q − above)/tied at it, 0 below, with q = n·X/100.
Eigen::VectorXd top_credits(const Eigen::VectorXd& citations, double x);

IndicatorResult top_share(const SubjectYearSlice& slice, std::string_view country,
                          const CountrySet& countries, double x);

/// Wald interval t ± z·sqrt(t(1 − t)/n_c), clipped to [0, 1].
Interval top_share_ci(const IndicatorResult& result, double level);

struct BootstrapResult {
  Interval interval;
  int used = 0;
  int skipped = 0;
};

/// Percentile bootstrap over whole articles. Replicate r draws from its own
/// generator seeded by (seed, r), so serial and parallel runs agree exactly.
BootstrapResult bootstrap_ci(const SubjectYearSlice& slice, std::string_view country,
                             const CountrySet& countries, Method statistic,
                             const BootstrapConfig& config, Scale scale = Scale::Normalised);

/// Deterministic 64-bit seed for substream `index` of `seed` (splitmix64).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace natimpact

#endif  // NATIMPACT_INDICATORS_HPP
