#ifndef NATIMPACT_SYNTH_HPP
#define NATIMPACT_SYNTH_HPP

#include "natimpact/corpus.hpp"
#include "natimpact/indicators.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace natimpact {

/// Generative parameters for one country. ln(1 + citations) is a discretised
/// N(mu, sigma). A collaborative article gets one partner drawn from
/// `partners` (uniform over the other listed countries when empty) and its
/// authorship splits 50/50.
struct CountrySpec {
  std::string code;
  int articles = 0;
  double mu = 0.0;
  double sigma = 1.0;
  double collaboration = 0.0;
  std::map<std::string, double> partners;
};

struct SynthSpec {
  std::vector<CountrySpec> countries;
  std::vector<std::string> subjects{"Synthetic"};
  std::vector<int> years{2012};
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

SynthSpec parse_synth_spec(std::string_view json_text);
std::string synth_spec_json(const SynthSpec& spec);

/// E[ln(1 + C)] for C = max(0, floor(exp(Z)) − 1), Z ~ N(mu, sigma).
double expected_log1p(double mu, double sigma);
/// E[C] for the same discretisation.
double expected_citations(double mu, double sigma);

struct CountryTruth {
  CountrySpec spec;
  /// Expected ln(1 + c) of articles the country generates.
  double own_log_mean = 0.0;
  double own_citation_mean = 0.0;
  /// Expected authorship-weighted means over every article the country
  /// takes part in, including partner shares of other countries' articles.
  double weighted_log_mean = 0.0;
  double weighted_citation_mean = 0.0;
  double expected_n_c = 0.0;

  double true_geometric_mean() const;  // expm1(weighted_log_mean)
  double true_arithmetic_mean() const { return weighted_citation_mean; }
};

/// Population values every indicator can be checked against. All fields
/// follow analytically from the spec.
struct GroundTruth {
  std::vector<CountryTruth> countries;
  double world_log_mean = 0.0;
  double world_citation_mean = 0.0;

  const CountryTruth& at(std::string_view code) const;
  double true_geometric_ratio(std::string_view code) const;
  double true_arithmetic_ratio(std::string_view code) const;
};

GroundTruth ground_truth(const SynthSpec& spec);
std::string ground_truth_json(const GroundTruth& truth);

struct SynthCorpus {
  std::vector<SubjectYearSlice> slices;
  GroundTruth truth;
};

/// One slice per (subject, year); slice i draws from its own generator
/// seeded by (seed, i).
SynthCorpus generate_corpus(const SynthSpec& spec);

/// Same corpus without recomputing ground truth.
std::vector<SubjectYearSlice> generate_slices(const SynthSpec& spec);

struct CoverageReport {
  Method method = Method::Geo;
  int trials = 0;
  /// (trial, slice, country) cells with an interval.
  int evaluated = 0;
  /// Cells excluded because the interval was unavailable.
  int excluded = 0;
  int covered = 0;
  double coverage = 0.0;
  double mean_width = 0.0;
  double median_width = 0.0;
};

/// Runs generate → indicator + interval per trial, with trial t using seed
/// spec.seed + t, and counts intervals containing the true value.
/// Normalised-scale truth is the true national mean over the trial's observed
/// normaliser. Supports GEO, ARITH and REG_GEO (truth: pure-country mean).
CoverageReport coverage_experiment(const SynthSpec& spec, const CountrySet& countries, int trials,
                                   Method method, const IndicatorParams& params);

}  // namespace natimpact

#endif  // NATIMPACT_SYNTH_HPP
