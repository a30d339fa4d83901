#include "natimpact/indicators.hpp"
#include "natimpact/errors.hpp"
#include "natimpact/stats.hpp"
#include "natimpact/synth.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <doctest.h>
#include <omp.h>

#include <random>

using namespace natimpact;
using fixtures::article;

namespace {

SubjectYearSlice slice_of(std::vector<ArticleRecord> articles) {
  return {"S", 2012, std::move(articles)};
}

SubjectYearSlice lognormal_slice(std::uint64_t seed, int per_country = 500) {
  SynthSpec spec;
  spec.seed = seed;
  spec.countries = {{"A", per_country, 1.5, 1.0, 0.1, {}}, {"B", per_country, 1.2, 1.0, 0.1, {}}};
  return generate_slices(spec).front();
}

}  // namespace

TEST_CASE("geo_indicator on the toy corpus") {
  const auto slice = fixtures::toy_slice();
  const CountrySet countries({"A", "B"});
  const auto a = geo_indicator(slice, "A", countries);
  CHECK(a.method == Method::Geo);
  CHECK(a.n_c == doctest::Approx(1.5));
  CHECK(a.normaliser == doctest::Approx(3.4979414452754147).epsilon(1e-13));
  CHECK(a.estimate == doctest::Approx(2.7376575318455427).epsilon(1e-13));
  CHECK(a.estimate * a.normaliser == doctest::Approx(9.576165743612922).epsilon(1e-13));
  CHECK(geo_indicator(slice, "B", countries).estimate ==
        doctest::Approx(0.26099098485638267).epsilon(1e-13));
  CHECK(geo_indicator(slice, "A", countries, Scale::Raw).estimate ==
        doctest::Approx(9.576165743612922).epsilon(1e-13));
}

TEST_CASE("geo_indicator edge cases") {
  const auto single = slice_of({article("x", 4, {{"C", 1}}), article("y", 9, {{"C", 2}})});
  CHECK(geo_indicator(single, "C", CountrySet({"C"})).estimate == doctest::Approx(1.0).epsilon(1e-15));

  const auto zeros = slice_of({article("x", 0, {{"Z", 1}}), article("y", 10, {{"C", 1}})});
  CHECK(geo_indicator(zeros, "Z", CountrySet({"Z", "C"})).estimate == 0.0);

  CHECK_THROWS_AS(geo_indicator(zeros, "Q", CountrySet({"Q"})), NoArticlesError);
  const auto uncited = slice_of({article("x", 0, {{"C", 1}}), article("y", 0, {{"C", 1}})});
  CHECK_THROWS_AS(geo_indicator(uncited, "C", CountrySet({"C"})), DivisionDegenerateError);
}

TEST_CASE("geo_indicator_ci") {
  SUBCASE("equal log-citations give a zero-width interval at the estimate") {
    const auto slice = slice_of({article("x", 5, {{"C", 1}}), article("y", 5, {{"C", 1}}),
                                 article("z", 1, {{"D", 1}})});
    const CountrySet countries({"C", "D"});
    const auto point = geo_indicator(slice, "C", countries).estimate;
    for (auto mode : {CiMode::Corrected, CiMode::PaperLiteral}) {
      const auto ci = geo_indicator_ci(slice, "C", countries, 0.95, mode);
      CHECK(ci.low == doctest::Approx(point).epsilon(1e-14));
      CHECK(ci.high == doctest::Approx(point).epsilon(1e-14));
    }
  }
  SUBCASE("corrected interval is right-skewed about the estimate") {
    const auto slice = lognormal_slice(1, 100);
    const CountrySet countries({"A", "B"});
    const auto point = geo_indicator(slice, "A", countries).estimate;
    const auto ci = geo_indicator_ci(slice, "A", countries, 0.95);
    CHECK(ci.high - point > point - ci.low);
    CHECK(ci.low < point);
  }
  SUBCASE("paper-literal interval is the literal formula") {
    const auto slice = fixtures::toy_slice();
    const CountrySet countries({"A", "B"});
    const auto s = weighted_log_summary(slice, "A", countries);
    const double mu_g = 3.4979414452754147;
    const auto ci = geo_indicator_ci(slice, "A", countries, 0.95, CiMode::PaperLiteral);
    const double half = s.sd_log / std::sqrt(1.5);
    CHECK(ci.low == doctest::Approx((9.576165743612922 - half) / mu_g).epsilon(1e-12));
    CHECK(ci.high == doctest::Approx((9.576165743612922 + half) / mu_g).epsilon(1e-12));
  }
  SUBCASE("n_c <= 1 has no interval") {
    const auto slice = fixtures::toy_slice();
    const auto only_b = slice_of({article("x", 5, {{"C", 1}}), article("y", 3, {{"D", 1}})});
    CHECK_THROWS_AS(geo_indicator_ci(only_b, "C", CountrySet({"C"}), 0.95), CiUnavailableError);
  }
  SUBCASE("corrected interval matches a 999-replicate bootstrap within 15% of width") {
    const auto slice = lognormal_slice(2);
    const CountrySet countries({"A", "B"});
    const auto ci = geo_indicator_ci(slice, "A", countries, 0.95, CiMode::Corrected, Scale::Raw);
    const auto boot =
        bootstrap_ci(slice, "A", countries, Method::Geo, {999, 0.95, 17}, Scale::Raw).interval;
    CHECK(std::abs(ci.width() - boot.width()) / boot.width() < 0.15);
  }
}

TEST_CASE("arith_indicator") {
  const auto slice = fixtures::toy_slice();
  const CountrySet countries({"A", "B"});
  const auto a = arith_indicator(slice, "A", countries);
  CHECK(a.normaliser == doctest::Approx(6.0));
  CHECK(a.estimate == doctest::Approx(10.0 / 6.0).epsilon(1e-14));
  CHECK(arith_indicator(slice, "B", countries).estimate == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
  CHECK(a.estimate / arith_indicator(slice, "B", countries).estimate == doctest::Approx(5.0));

  const auto single = slice_of({article("x", 4, {{"C", 1}}), article("y", 9, {{"C", 2}})});
  CHECK(arith_indicator(single, "C", CountrySet({"C"})).estimate == doctest::Approx(1.0));

  std::mt19937_64 rng(4);
  auto uniform = fixtures::random_slice(rng, {"US", "UK", "DE"}, 30);
  for (auto& art : uniform.articles) art.citations = 7;
  const CountrySet focal({"US", "UK", "DE"});
  for (const auto& c : focal.focal()) {
    if (weighted_count(uniform, c, focal) > 0) {
      CHECK(arith_indicator(uniform, c, focal).estimate == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("top_credits splits threshold ties fractionally") {
  SUBCASE("ten articles, four above and three tied at the 50% threshold") {
    Eigen::VectorXd c(10);
    c << 10, 9, 8, 7, 5, 5, 5, 2, 1, 0;
    const auto credits = top_credits(c, 50);
    for (int i = 0; i < 4; ++i) CHECK(credits(i) == 1.0);
    for (int i = 4; i < 7; ++i) CHECK(credits(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    for (int i = 7; i < 10; ++i) CHECK(credits(i) == 0.0);
    CHECK(credits.sum() == doctest::Approx(5.0));
  }
  SUBCASE("matches the ranking-walk oracle on random tie structures") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 500; ++t) {
      std::uniform_int_distribution<int> size(1, 60), range(0, 1 + t % 20);
      std::uniform_real_distribution<double> xdist(0.5, 99.5);
      const int n = size(rng);
      std::vector<double> cites(static_cast<std::size_t>(n));
      for (auto& v : cites) v = range(rng);
      const double x = xdist(rng);
      const auto expected = oracle::top_credits(cites, x);
      const auto got = top_credits(Eigen::Map<Eigen::VectorXd>(cites.data(), n), x);
      for (int i = 0; i < n; ++i) {
        CHECK(got(i) == doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("tiny X still credits the top article fractionally") {
    Eigen::VectorXd c(4);
    c << 3, 2, 1, 0;
    const auto credits = top_credits(c, 10);
    CHECK(credits(0) == doctest::Approx(0.4));
    CHECK(credits.tail(3).isZero());
  }
}

TEST_CASE("top_share") {
  SUBCASE("complete tie gives every country X/100") {
    std::mt19937_64 rng(12);
    auto slice = fixtures::random_slice(rng, {"US", "UK", "DE"}, 40);
    for (auto& a : slice.articles) a.citations = 3;
    const CountrySet countries({"US", "UK", "DE"});
    for (const auto& c : countries.focal()) {
      if (weighted_count(slice, c, countries) > 0) {
        CHECK(top_share(slice, c, countries, 10).estimate == doctest::Approx(0.10).epsilon(1e-12));
      }
    }
  }
  SUBCASE("enumerated five-article example") {
    const auto slice = slice_of({article("a", 9, {{"P", 1}}), article("b", 7, {{"P", 1}}),
                                 article("c", 5, {{"Q", 1}}), article("d", 3, {{"Q", 1}}),
                                 article("e", 1, {{"R", 1}})});
    const CountrySet countries({"P", "Q", "R"});
    CHECK(top_share(slice, "P", countries, 40).estimate == doctest::Approx(1.0));
    CHECK(top_share(slice, "Q", countries, 40).estimate == 0.0);
    CHECK(top_share(slice, "R", countries, 40).estimate == 0.0);
    CHECK_THROWS_AS(top_share(slice, "S", CountrySet({"S"}), 40), NoArticlesError);
  }
  SUBCASE("property: whole-world share equals X/100") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 200; ++t) {
      std::uniform_int_distribution<std::size_t> size(1, 80);
      auto slice = fixtures::random_slice(rng, {"US", "UK"}, size(rng), 1 + t % 15);
      std::uniform_real_distribution<double> xdist(0.1, 99.9);
      const double x = xdist(rng);
      const auto world = top_share(slice, "OTHERS", CountrySet{}, x);
      CHECK(std::abs(world.estimate - x / 100) < 1e-9);
    }
  }
}

TEST_CASE("top_share_ci") {
  IndicatorResult r;
  r.method = Method::TopX;
  r.estimate = 0.5;
  r.n_c = 100;
  const auto ci = top_share_ci(r, 0.95);
  CHECK(ci.low == doctest::Approx(0.5 - 0.0979981992270027).epsilon(1e-12));
  CHECK(ci.high == doctest::Approx(0.5 + 0.0979981992270027).epsilon(1e-12));

  double previous = ci.width();
  for (double n : {200.0, 1000.0, 1e4, 1e6}) {
    r.n_c = n;
    const double w = top_share_ci(r, 0.95).width();
    CHECK(w < previous);
    previous = w;
  }

  r.n_c = 3;
  r.estimate = 0.02;
  const auto clipped = top_share_ci(r, 0.95);
  CHECK(clipped.low == 0.0);

  r.estimate = 0.0;
  CHECK_THROWS_AS(top_share_ci(r, 0.95), CiUnavailableError);
  r.estimate = 1.0;
  CHECK_THROWS_AS(top_share_ci(r, 0.95), CiUnavailableError);
}

TEST_CASE("top_share warning flags small or dominant countries") {
  const auto slice = fixtures::toy_slice();
  CHECK(top_share(slice, "A", CountrySet({"A", "B"}), 10).warning);
  const auto big = lognormal_slice(3, 200);
  const auto r = top_share(big, "A", CountrySet({"A", "B"}), 10);
  CHECK(r.warning);  // half the world cannot fit in the top 10%
  CHECK_FALSE(top_share(big, "A", CountrySet({"A", "B"}), 60).warning);
}

TEST_CASE("bootstrap_ci") {
  SUBCASE("constant citations give a zero-width interval") {
    std::mt19937_64 rng(14);
    auto slice = fixtures::random_slice(rng, {"US", "UK"}, 30);
    for (auto& a : slice.articles) a.citations = 4;
    const CountrySet countries({"US"});
    for (auto stat : {Method::Geo, Method::Arith}) {
      const auto ci = bootstrap_ci(slice, "US", countries, stat, {199, 0.95, 1}).interval;
      CHECK(ci.width() < 1e-12);
      CHECK(ci.low == doctest::Approx(1.0));
    }
  }
  SUBCASE("same seed gives bit-identical intervals, serial or parallel") {
    const auto slice = lognormal_slice(4, 200);
    const CountrySet countries({"A", "B"});
    const BootstrapConfig config{999, 0.95, 2024};
    omp_set_num_threads(1);
    const auto serial = bootstrap_ci(slice, "B", countries, Method::Arith, config);
    omp_set_num_threads(4);
    const auto parallel = bootstrap_ci(slice, "B", countries, Method::Arith, config);
    const auto again = bootstrap_ci(slice, "B", countries, Method::Arith, config);
    CHECK(serial.interval.low == parallel.interval.low);
    CHECK(serial.interval.high == parallel.interval.high);
    CHECK(again.interval.low == parallel.interval.low);
    CHECK(again.interval.high == parallel.interval.high);
    const auto other = bootstrap_ci(slice, "B", countries, Method::Arith, {999, 0.95, 2025});
    CHECK(other.interval.low != serial.interval.low);
  }
  SUBCASE("replicates where the country vanishes are skipped") {
    // One A article among 20: about (19/20)^20 ≈ 36% of resamples miss it.
    SubjectYearSlice slice{"S", 2012, {article("a", 5, {{"A", 1}})}};
    for (int i = 0; i < 19; ++i) slice.articles.push_back(article("o" + std::to_string(i), i, {{"Z", 1}}));
    const auto r = bootstrap_ci(slice, "A", CountrySet({"A"}), Method::Geo, {500, 0.95, 3});
    CHECK(r.skipped > 100);
    CHECK(r.used + r.skipped == 500);
  }
  SUBCASE("invalid configuration") {
    const auto slice = fixtures::toy_slice();
    CHECK_THROWS_AS(bootstrap_ci(slice, "A", CountrySet({"A"}), Method::Geo, {0, 0.95, 1}), ConfigError);
    CHECK_THROWS_AS(bootstrap_ci(slice, "A", CountrySet({"A"}), Method::TopX, {9, 0.95, 1}),
                    ValidationError);
  }
  SUBCASE("property: interval brackets the point estimate in nearly every seeded run") {
    int bracketed = 0;
    const int runs = 100;
    for (int s = 0; s < runs; ++s) {
      const auto slice = lognormal_slice(100 + static_cast<std::uint64_t>(s), 100);
      const CountrySet countries({"A", "B"});
      const double point = geo_indicator(slice, "A", countries).estimate;
      const auto ci = bootstrap_ci(slice, "A", countries, Method::Geo,
                                   {199, 0.95, static_cast<std::uint64_t>(s)}).interval;
      if (ci.contains(point)) ++bracketed;
    }
    CHECK(bracketed >= 95);
  }
}

TEST_CASE("property: indicator invariants over random slices") {
  std::mt19937_64 rng(15);
  const std::vector<std::string> codes{"US", "UK", "DE", "FR", "CN"};
  const CountrySet countries({"US", "UK", "DE"});
  int checked = 0;
  for (int t = 0; checked < 1000; ++t) {
    std::uniform_int_distribution<std::size_t> size(2, 40);
    const auto slice = fixtures::random_slice(rng, codes, size(rng), 60);
    const auto citations = citation_vector(slice);
    if (geometric_mean(citations, Eigen::VectorXd::Ones(citations.size())) == 0) continue;

    // Reordered copy, and a copy where every author count n becomes n entries of 1.
    auto shuffled = slice;
    std::shuffle(shuffled.articles.begin(), shuffled.articles.end(), rng);
    auto split = slice;
    for (auto& a : split.articles) {
      std::vector<AuthorCount> ones;
      for (const auto& entry : a.authors) {
        for (std::int64_t k = 0; k < entry.authors; ++k) ones.push_back({entry.country, 1});
      }
      a = make_article(a.id, a.subject, a.year, a.citations, ones);
    }

    for (const auto& c : countries.focal()) {
      if (!(weighted_count(slice, c, countries) > 0)) continue;
      ++checked;
      const auto geo = geo_indicator(slice, c, countries, Scale::Raw).estimate;
      const auto arith = arith_indicator(slice, c, countries, Scale::Raw).estimate;
      CHECK(geo <= arith * (1 + 1e-12) + 1e-12);

      for (const auto* variant : {&shuffled, &split}) {
        CHECK(geo_indicator(*variant, c, countries).estimate ==
              doctest::Approx(geo_indicator(slice, c, countries).estimate).epsilon(1e-12));
        CHECK(arith_indicator(*variant, c, countries).estimate ==
              doctest::Approx(arith_indicator(slice, c, countries).estimate).epsilon(1e-12));
        CHECK(top_share(*variant, c, countries, 25).estimate ==
              doctest::Approx(top_share(slice, c, countries, 25).estimate).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("method and scale tags") {
  for (auto m : {Method::RegGeo, Method::Geo, Method::Arith, Method::TopX}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("MEDIAN"), ConfigError);
  CHECK(parse_scale("raw") == Scale::Raw);
}
