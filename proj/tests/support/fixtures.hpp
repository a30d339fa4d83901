#ifndef NATIMPACT_TESTS_FIXTURES_HPP
#define NATIMPACT_TESTS_FIXTURES_HPP

#include "natimpact/corpus.hpp"
#include "natimpact/synth.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using natimpact::AuthorCount;
using natimpact::SubjectYearSlice;

inline natimpact::ArticleRecord article(const std::string& id, std::int64_t citations,
                                        std::vector<AuthorCount> authors,
                                        const std::string& subject = "Toy", int year = 2012) {
  return natimpact::make_article(id, subject, year, citations, std::move(authors));
}

/// A solo with 12 citations, an A/B joint paper with 6, a B solo with 0.
inline SubjectYearSlice toy_slice() {
  return {"Toy", 2012,
          {article("a-solo", 12, {{"A", 1}}), article("ab-joint", 6, {{"A", 1}, {"B", 1}}),
           article("b-solo", 0, {{"B", 1}})}};
}

/// Random slice over `codes`: each article has 1 to 3 countries with 1 to 3 authors each.
inline SubjectYearSlice random_slice(std::mt19937_64& rng, const std::vector<std::string>& codes,
                                     std::size_t n, int max_citations = 50) {
  std::uniform_int_distribution<int> cites(0, max_citations);
  std::uniform_int_distribution<std::size_t> pick(0, codes.size() - 1);
  std::uniform_int_distribution<int> count(1, 3);
  SubjectYearSlice slice{"Random", 2013, {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<AuthorCount> authors;
    const int entries = count(rng);
    for (int e = 0; e < entries; ++e) authors.push_back({codes[pick(rng)], count(rng)});
    slice.articles.push_back(
        natimpact::make_article("r" + std::to_string(i), "Random", 2013, cites(rng), authors));
  }
  return slice;
}

/// The two-focal-country synthetic family used by the Monte-Carlo checks:
/// A and B are focal, W is a non-focal rest-of-world group so the regression
/// has an OTHERS reference. 500 articles each, sigma = 1.
inline natimpact::SynthSpec two_country_spec(std::uint64_t seed, int articles = 500) {
  natimpact::SynthSpec spec;
  spec.seed = seed;
  spec.countries = {
      {"A", articles, 1.5, 1.0, 0.2, {{"B", 1.0}, {"W", 1.0}}},
      {"B", articles, 1.2, 1.0, 0.2, {{"A", 1.0}, {"W", 1.0}}},
      {"W", articles, 1.3, 1.0, 0.0, {}},
  };
  return spec;
}

}  // namespace fixtures

#endif  // NATIMPACT_TESTS_FIXTURES_HPP
