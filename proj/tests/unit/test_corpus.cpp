#include "natimpact/corpus.hpp"
#include "natimpact/errors.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace natimpact;

namespace {

ParsedCorpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

const std::string kHeader = "id,subject,year,citations,affiliations\n";

}  // namespace

TEST_CASE("parse_corpus derives proportional shares from author counts") {
  const auto corpus = parse(kHeader + "a1,Ecology,2012,5,\"US:2;UK:1\"\n");
  REQUIRE(corpus.slices.size() == 1);
  const auto& slice = corpus.slices.front();
  CHECK(slice.subject == "Ecology");
  CHECK(slice.year == 2012);
  REQUIRE(slice.articles.size() == 1);
  const auto& shares = slice.articles.front().shares;
  REQUIRE(shares.size() == 2);
  CHECK(shares[0].country == "UK");
  CHECK(shares[0].weight == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(shares[1].country == "US");
  CHECK(shares[1].weight == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("affiliation-less rows are dropped and counted") {
  const auto corpus = parse(kHeader + "a1,Ecology,2012,5,\"US:1\"\n"
                                      "a2,Ecology,2012,3,\"\"\n"
                                      "a3,Ecology,2012,3,\n");
  CHECK(corpus.diagnostics.rows_read == 3);
  CHECK(corpus.diagnostics.articles_kept == 1);
  CHECK(corpus.diagnostics.dropped_no_affiliation == 2);
  CHECK(corpus.diagnostics.dropped_lines == std::vector<std::size_t>{3, 4});
  CHECK(corpus.slices.front().size() == 1);
}

TEST_CASE("malformed rows raise a parse error naming the line") {
  auto line_of = [](const std::string& body) -> std::size_t {
    try {
      parse(kHeader + "ok,Ecology,2012,1,\"US:1\"\n" + body);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("a2,Ecology,2012,-1,\"US:1\"\n") == 3);
  CHECK(line_of("a2,Ecology,2012,1\n") == 3);
  CHECK(line_of("a2,Ecology,20x2,1,\"US:1\"\n") == 3);
  CHECK(line_of("a2,Ecology,2012,1.5,\"US:1\"\n") == 3);
  CHECK(line_of("a2,Ecology,2012,1,\"US:0\"\n") == 3);
  CHECK(line_of("a2,Ecology,2012,1,\"US\"\n") == 3);
  CHECK(line_of("a2,Ecology,2012,1,\"U-S:1\"\n") == 3);
  CHECK(line_of("a2,Ecology,2012,1,\"US:1\n") == 3);
}

TEST_CASE("header is required") {
  CHECK_THROWS_AS(parse("a1,Ecology,2012,5,\"US:1\"\n"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("duplicate id within a slice is a validation error") {
  CHECK_THROWS_AS(parse(kHeader + "a1,Ecology,2012,5,\"US:1\"\na1,Ecology,2012,2,\"UK:1\"\n"),
                  ValidationError);
  // Same id in another slice is fine.
  CHECK_NOTHROW(parse(kHeader + "a1,Ecology,2012,5,\"US:1\"\na1,Ecology,2013,2,\"UK:1\"\n"));
}

TEST_CASE("country codes are uppercased and duplicate entries merge") {
  const auto corpus = parse(kHeader + "a1,Ecology,2012,5,\"us:1; Us:1;de:2\"\n");
  const auto& shares = corpus.slices.front().articles.front().shares;
  REQUIRE(shares.size() == 2);
  CHECK(shares[0] == CountryShare{"DE", 0.5});
  CHECK(shares[1] == CountryShare{"US", 0.5});
}

TEST_CASE("slices are grouped by subject and year, articles keep file order") {
  const auto corpus = parse(kHeader + "x,Zoology,2010,1,\"US:1\"\n"
                                      "y,Ecology,2011,1,\"US:1\"\n"
                                      "z,Ecology,2010,1,\"US:1\"\n"
                                      "w,Ecology,2010,1,\"US:1\"\n");
  REQUIRE(corpus.slices.size() == 3);
  CHECK(corpus.slices[0].subject == "Ecology");
  CHECK(corpus.slices[0].year == 2010);
  CHECK(corpus.slices[0].articles[0].id == "z");
  CHECK(corpus.slices[0].articles[1].id == "w");
  CHECK(corpus.slices[1].year == 2011);
  CHECK(corpus.slices[2].subject == "Zoology");
}

TEST_CASE("CountrySet rejects OTHERS and duplicates") {
  CHECK_THROWS_AS(CountrySet({"US", "OTHERS"}), ValidationError);
  CHECK_THROWS_AS(CountrySet({"US", "US"}), ValidationError);
  const CountrySet set({"US", "UK"});
  CHECK(set.index_of("UK") == 1);
  CHECK(set.index_of("OTHERS") == 2);
  CHECK_FALSE(set.index_of("DE").has_value());
  CHECK(set.column_of("DE") == 2);
}

TEST_CASE("country_share folds non-focal mass into OTHERS") {
  const SubjectYearSlice slice{
      "S", 2012,
      {fixtures::article("p", 1, {{"US", 1}, {"DE", 1}}), fixtures::article("q", 1, {{"US", 1}})}};
  const auto v = country_share(slice, "p", CountrySet({"US", "UK"}));
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 0.5);
  CHECK(v(1) == 0.0);
  CHECK(v(2) == 0.5);

  const auto w = country_share(slice, "q", CountrySet({"US"}));
  CHECK(w(0) == 1.0);
  CHECK(w(1) == 0.0);

  CHECK_THROWS_AS(country_share(slice, "missing", CountrySet({"US"})), LookupError);
}

TEST_CASE("toy corpus shares and weighted counts") {
  const auto slice = fixtures::toy_slice();
  const CountrySet countries({"A", "B"});
  const auto solo = country_share(slice, "a-solo", countries);
  CHECK(solo(0) == 1.0);
  CHECK(solo(1) == 0.0);
  const auto joint = country_share(slice, "ab-joint", countries);
  CHECK(joint(0) == 0.5);
  CHECK(joint(1) == 0.5);

  CHECK(weighted_count(slice, "A", countries) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(weighted_count(slice, "OTHERS", countries) == 0.0);
  CHECK(weighted_count(slice, "A", CountrySet({"A", "C"})) == 1.5);
  CHECK(weighted_count(slice, "C", CountrySet({"A", "C"})) == 0.0);

  const SubjectYearSlice single{"S", 2012, {fixtures::article("only", 3, {{"C", 2}})}};
  CHECK(weighted_count(single, "C", CountrySet({"C"})) == 1.0);
}

TEST_CASE("property: weighted counts over focal and OTHERS sum to the article count") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> codes{"US", "UK", "DE", "FR", "CN", "JP"};
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> size(1, 60);
    const auto slice = fixtures::random_slice(rng, codes, size(rng));
    const CountrySet countries({"US", "DE", "JP"});
    double total = 0.0;
    for (const auto& c : countries.focal()) total += weighted_count(slice, c, countries);
    total += weighted_count(slice, "OTHERS", countries);
    CHECK(total == doctest::Approx(static_cast<double>(slice.size())).epsilon(1e-12));

    const Eigen::MatrixXd shares = share_matrix(slice, countries);
    CHECK((shares.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(shares.minCoeff() >= 0.0);
  }
}

TEST_CASE("property: write_corpus then parse_corpus reproduces the slices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SubjectYearSlice> slices;
    auto a = fixtures::random_slice(rng, {"US", "UK", "DE"}, 20);
    auto b = fixtures::random_slice(rng, {"CN", "JP"}, 5);
    for (auto& art : b.articles) art.year = b.year = 2014;
    slices.push_back(a);
    slices.push_back(b);
    std::ostringstream out;
    write_corpus(out, slices);
    std::istringstream in(out.str());
    const auto round = parse_corpus(in);
    CHECK(round.slices == slices);
  }
}

TEST_CASE("subjects containing commas survive a round trip") {
  const SubjectYearSlice slice{"Art, \"Modern\"", 2012,
                               {fixtures::article("x", 4, {{"US", 1}}, "Art, \"Modern\"")}};
  std::ostringstream out;
  write_corpus(out, std::vector{slice});
  std::istringstream in(out.str());
  CHECK(parse_corpus(in).slices.front() == slice);
}

TEST_CASE("diagnostics summary serialises to JSON") {
  const auto corpus = parse(kHeader + "a2,Ecology,2012,3,\"\"\n");
  const auto json = diagnostics_json(corpus.diagnostics);
  CHECK(json.find("\"dropped_no_affiliation\": 1") != std::string::npos);
  CHECK(json.find("\"dropped_lines\"") != std::string::npos);
}
