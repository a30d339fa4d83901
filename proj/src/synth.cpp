#include "natimpact/synth.hpp"

#include "natimpact/aggregate.hpp"
#include "natimpact/errors.hpp"
#include "natimpact/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace natimpact {

namespace {

// Exact summation runs to this count; beyond it the tail is integrated.
constexpr double kSeriesCutoff = 1e5;

double upper_tail(double mu, double sigma, double x) {
  return 0.5 * std::erfc((std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

double standard_normal_pdf(double a) {
  return std::exp(-0.5 * a * a) / std::sqrt(2.0 * 3.14159265358979323846);
}

double standard_normal_sf(double a) { return 0.5 * std::erfc(a / std::sqrt(2.0)); }

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ConfigError("synth spec: " + field + " " + rule);
}

}  // namespace

void SynthSpec::validate() const {
  require(!countries.empty(), "countries", "must be non-empty");
  require(!subjects.empty(), "subjects", "must be non-empty");
  require(!years.empty(), "years", "must be non-empty");
  std::vector<std::string> codes;
  for (std::size_t i = 0; i < countries.size(); ++i) {
    const auto& c = countries[i];
    const std::string prefix = "countries[" + std::to_string(i) + "].";
    require(!c.code.empty(), prefix + "code", "must be non-empty");
    require(std::find(codes.begin(), codes.end(), c.code) == codes.end(), prefix + "code",
            "must be unique");
    codes.push_back(c.code);
    require(c.articles >= 1, prefix + "articles", "must be >= 1");
    require(std::isfinite(c.mu), prefix + "mu", "must be finite");
    require(c.sigma > 0 && std::isfinite(c.sigma), prefix + "sigma", "must be > 0");
    require(c.collaboration >= 0 && c.collaboration <= 1, prefix + "collaboration",
            "must lie in [0, 1]");
    double total = 0.0;
    for (const auto& [partner, weight] : c.partners) {
      require(partner != c.code, prefix + "partners", "must not contain the country itself");
      require(weight >= 0, prefix + "partners." + partner, "must be >= 0");
      total += weight;
    }
    if (c.collaboration > 0) {
      require(!c.partners.empty() ? total > 0 : countries.size() > 1, prefix + "partners",
              "must offer at least one partner when collaboration > 0");
    }
  }
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth spec: invalid JSON: ") + e.what());
  }
  SynthSpec spec;
  try {
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("subjects")) spec.subjects = j.at("subjects").get<std::vector<std::string>>();
    if (j.contains("years")) spec.years = j.at("years").get<std::vector<int>>();
    for (const auto& c : j.at("countries")) {
      CountrySpec cs;
      cs.code = c.at("code").get<std::string>();
      cs.articles = c.at("articles").get<int>();
      cs.mu = c.at("mu").get<double>();
      cs.sigma = c.at("sigma").get<double>();
      cs.collaboration = c.value("collaboration", 0.0);
      if (c.contains("partners")) cs.partners = c.at("partners").get<std::map<std::string, double>>();
      spec.countries.push_back(std::move(cs));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string synth_spec_json(const SynthSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["subjects"] = spec.subjects;
  j["years"] = spec.years;
  j["countries"] = nlohmann::json::array();
  for (const auto& c : spec.countries) {
    j["countries"].push_back({{"code", c.code},
                              {"articles", c.articles},
                              {"mu", c.mu},
                              {"sigma", c.sigma},
                              {"collaboration", c.collaboration},
                              {"partners", c.partners}});
  }
  return j.dump(2);
}

// With K = max(1, floor(exp Z)) and S(k) = P(exp Z >= k):
//   E[ln K] = Σ_{k≥2} ln(k/(k−1)) S(k),   E[K] − 1 = Σ_{k≥2} S(k).
// Terms past the cutoff are replaced by the matching integrals of S.
double expected_log1p(double mu, double sigma) {
  double sum = 0.0;
  double k = 2.0;
  for (; k <= kSeriesCutoff; k += 1.0) {
    const double s = upper_tail(mu, sigma, k);
    if (s < 1e-18) return sum;
    sum += std::log(k / (k - 1.0)) * s;
  }
  const double a = (std::log(kSeriesCutoff) - mu) / sigma;
  return sum + sigma * (standard_normal_pdf(a) - a * standard_normal_sf(a));
}

double expected_citations(double mu, double sigma) {
  double sum = 0.0;
  double k = 2.0;
  for (; k <= kSeriesCutoff; k += 1.0) {
    const double s = upper_tail(mu, sigma, k);
    if (s < 1e-18) return sum;
    sum += s;
  }
  const double a = (std::log(kSeriesCutoff) - mu) / sigma;
  const double beyond = std::exp(mu + 0.5 * sigma * sigma) * standard_normal_sf(a - sigma) -
                        kSeriesCutoff * standard_normal_sf(a);
  return sum + beyond - 0.5 * upper_tail(mu, sigma, kSeriesCutoff);
}

double CountryTruth::true_geometric_mean() const { return std::expm1(weighted_log_mean); }

const CountryTruth& GroundTruth::at(std::string_view code) const {
  const auto it = std::find_if(countries.begin(), countries.end(),
                               [&](const CountryTruth& c) { return c.spec.code == code; });
  if (it == countries.end()) throw LookupError("no ground truth for " + std::string(code));
  return *it;
}

double GroundTruth::true_geometric_ratio(std::string_view code) const {
  return at(code).true_geometric_mean() / std::expm1(world_log_mean);
}

double GroundTruth::true_arithmetic_ratio(std::string_view code) const {
  return at(code).true_arithmetic_mean() / world_citation_mean;
}

namespace {

// Probability that a collaborative article of `from` picks `to` as partner.
double partner_probability(const SynthSpec& spec, const CountrySpec& from, const std::string& to) {
  if (from.partners.empty()) {
    if (from.code == to) return 0.0;
    return 1.0 / static_cast<double>(spec.countries.size() - 1);
  }
  double total = 0.0;
  for (const auto& [code, w] : from.partners) total += w;
  const auto it = from.partners.find(to);
  return it == from.partners.end() ? 0.0 : it->second / total;
}

}  // namespace

GroundTruth ground_truth(const SynthSpec& spec) {
  spec.validate();
  GroundTruth truth;
  double world_articles = 0.0;
  for (const auto& c : spec.countries) {
    CountryTruth t;
    t.spec = c;
    t.own_log_mean = expected_log1p(c.mu, c.sigma);
    t.own_citation_mean = expected_citations(c.mu, c.sigma);
    truth.countries.push_back(std::move(t));
    world_articles += c.articles;
    truth.world_log_mean += c.articles * truth.countries.back().own_log_mean;
    truth.world_citation_mean += c.articles * truth.countries.back().own_citation_mean;
  }
  truth.world_log_mean /= world_articles;
  truth.world_citation_mean /= world_articles;

  for (auto& t : truth.countries) {
    const auto& own = t.spec;
    double mass = own.articles * (1.0 - own.collaboration / 2.0);
    double log_sum = mass * t.own_log_mean;
    double cit_sum = mass * t.own_citation_mean;
    for (const auto& other : truth.countries) {
      if (other.spec.code == own.code) continue;
      const double m = other.spec.articles * other.spec.collaboration * 0.5 *
                       partner_probability(spec, other.spec, own.code);
      mass += m;
      log_sum += m * other.own_log_mean;
      cit_sum += m * other.own_citation_mean;
    }
    t.expected_n_c = mass;
    t.weighted_log_mean = log_sum / mass;
    t.weighted_citation_mean = cit_sum / mass;
  }
  return truth;
}

std::string ground_truth_json(const GroundTruth& truth) {
  nlohmann::json j;
  j["world_log_mean"] = truth.world_log_mean;
  j["world_geometric_mean"] = std::expm1(truth.world_log_mean);
  j["world_citation_mean"] = truth.world_citation_mean;
  j["countries"] = nlohmann::json::array();
  for (const auto& t : truth.countries) {
    j["countries"].push_back({{"code", t.spec.code},
                              {"articles", t.spec.articles},
                              {"mu", t.spec.mu},
                              {"sigma", t.spec.sigma},
                              {"collaboration", t.spec.collaboration},
                              {"partners", t.spec.partners},
                              {"own_log_mean", t.own_log_mean},
                              {"own_citation_mean", t.own_citation_mean},
                              {"weighted_log_mean", t.weighted_log_mean},
                              {"weighted_citation_mean", t.weighted_citation_mean},
                              {"expected_n_c", t.expected_n_c},
                              {"true_geometric_mean", t.true_geometric_mean()},
                              {"true_geometric_ratio", truth.true_geometric_ratio(t.spec.code)},
                              {"true_arithmetic_ratio", truth.true_arithmetic_ratio(t.spec.code)}});
  }
  return j.dump(2);
}

std::vector<SubjectYearSlice> generate_slices(const SynthSpec& spec) {
  spec.validate();
  std::vector<SubjectYearSlice> slices;
  std::uint64_t slice_index = 0;
  for (const auto& subject : spec.subjects) {
    for (int year : spec.years) {
      std::mt19937_64 rng(substream_seed(spec.seed, slice_index++));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      SubjectYearSlice slice{subject, year, {}};
      for (const auto& c : spec.countries) {
        std::normal_distribution<double> latent(c.mu, c.sigma);
        std::vector<std::string> partner_codes;
        std::vector<double> partner_weights;
        if (c.partners.empty()) {
          for (const auto& other : spec.countries) {
            if (other.code != c.code) {
              partner_codes.push_back(other.code);
              partner_weights.push_back(1.0);
            }
          }
        } else {
          for (const auto& [code, w] : c.partners) {
            partner_codes.push_back(code);
            partner_weights.push_back(w);
          }
        }
        for (int i = 0; i < c.articles; ++i) {
          const double x = std::min(std::exp(latent(rng)), 9.0e18);
          const auto citations = std::max<std::int64_t>(0, static_cast<std::int64_t>(x) - 1);
          std::vector<AuthorCount> authors{{c.code, 1}};
          if (c.collaboration > 0 && unit(rng) < c.collaboration) {
            std::discrete_distribution<std::size_t> pick(partner_weights.begin(),
                                                          partner_weights.end());
            authors.push_back({partner_codes[pick(rng)], 1});
          }
          slice.articles.push_back(make_article(c.code + "-" + std::to_string(i), subject, year,
                                                citations, std::move(authors)));
        }
      }
      slices.push_back(std::move(slice));
    }
  }
  return slices;
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
  return {generate_slices(spec), ground_truth(spec)};
}

CoverageReport coverage_experiment(const SynthSpec& spec, const CountrySet& countries, int trials,
                                   Method method, const IndicatorParams& params) {
  if (trials < 1) throw ConfigError("coverage trials must be >= 1");
  if (method == Method::TopX) throw ConfigError("coverage has no analytic truth for TOP_X");
  const GroundTruth truth = ground_truth(spec);

  struct TrialTally {
    int evaluated = 0, excluded = 0, covered = 0;
    std::vector<double> widths;
  };
  std::vector<TrialTally> tallies(static_cast<std::size_t>(trials));

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    SynthSpec trial_spec = spec;
    trial_spec.seed = spec.seed + static_cast<std::uint64_t>(t);
    IndicatorParams trial_params = params;
    trial_params.bootstrap.seed = params.bootstrap.seed + static_cast<std::uint64_t>(t);
    const auto slices = generate_slices(trial_spec);
    auto& tally = tallies[static_cast<std::size_t>(t)];

    for (const auto& slice : slices) {
      const Eigen::VectorXd citations = citation_vector(slice);
      double normaliser = 1.0;
      if (params.scale == Scale::Normalised) {
        normaliser = method == Method::Arith
                         ? citations.mean()
                         : geometric_mean(citations, Eigen::VectorXd::Ones(citations.size()));
      }
      for (const auto& cell : slice_cells(slice, countries, method, trial_params)) {
        if (!cell.ci) {
          ++tally.excluded;
          continue;
        }
        const CountryTruth& ct = truth.at(cell.country);
        double national = 0.0;
        switch (method) {
          case Method::Geo: national = ct.true_geometric_mean(); break;
          case Method::Arith: national = ct.true_arithmetic_mean(); break;
          case Method::RegGeo: national = std::expm1(ct.own_log_mean); break;
          case Method::TopX: break;
        }
        const double target = national / normaliser;
        const double slack = 1e-12 * std::max(1.0, std::abs(target));
        ++tally.evaluated;
        if (cell.ci->low - slack <= target && target <= cell.ci->high + slack) ++tally.covered;
        tally.widths.push_back(cell.ci->width());
      }
    }
  }

  CoverageReport report;
  report.method = method;
  report.trials = trials;
  std::vector<double> widths;
  for (const auto& tally : tallies) {
    report.evaluated += tally.evaluated;
    report.excluded += tally.excluded;
    report.covered += tally.covered;
    widths.insert(widths.end(), tally.widths.begin(), tally.widths.end());
  }
  if (report.evaluated > 0) {
    report.coverage = static_cast<double>(report.covered) / report.evaluated;
    report.mean_width = std::accumulate(widths.begin(), widths.end(), 0.0) /
                        static_cast<double>(widths.size());
    report.median_width = median(widths);
  }
  return report;
}

}  // namespace natimpact
