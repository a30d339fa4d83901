#ifndef NATIMPACT_CORPUS_HPP
#define NATIMPACT_CORPUS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natimpact {

/// Pseudo-country that absorbs every non-focal author share.
inline constexpr std::string_view kOthers = "OTHERS";

struct AuthorCount {
  std::string country;
  std::int64_t authors = 0;

  friend bool operator==(const AuthorCount&, const AuthorCount&) = default;
};

struct CountryShare {
  std::string country;
  double weight = 0.0;

  friend bool operator==(const CountryShare&, const CountryShare&) = default;
};

/// One publication. `shares` is sorted by country code with duplicate codes
/// merged, every weight lies in (0, 1] and the weights sum to 1. `authors`
/// keeps the per-country author counts as ingested so the record can be
/// written back out unchanged.
struct ArticleRecord {
  std::string id;
  std::string subject;
  int year = 0;
  std::int64_t citations = 0;
  std::vector<CountryShare> shares;
  std::vector<AuthorCount> authors;

  friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

/// Builds a record from author counts, deriving the fractional shares.
/// Throws ValidationError when the counts violate the record invariants.
ArticleRecord make_article(std::string id, std::string subject, int year,
                           std::int64_t citations,
                           std::vector<AuthorCount> authors);

/// All articles of one (subject, year); the unit every indicator is computed over.
struct SubjectYearSlice {
  std::string subject;
  int year = 0;
  std::vector<ArticleRecord> articles;

  std::size_t size() const noexcept { return articles.size(); }
  bool empty() const noexcept { return articles.empty(); }

  friend bool operator==(const SubjectYearSlice&, const SubjectYearSlice&) = default;
};

/// Ordered focal countries plus the implicit OTHERS remainder, which always
/// occupies the last index.
class CountrySet {
 public:
  CountrySet() = default;
  explicit CountrySet(std::vector<std::string> focal);

  const std::vector<std::string>& focal() const noexcept { return focal_; }
  std::size_t focal_size() const noexcept { return focal_.size(); }
  /// Focal countries plus OTHERS.
  std::size_t size() const noexcept { return focal_.size() + 1; }
  std::size_t others_index() const noexcept { return focal_.size(); }

  /// Index of a focal code or of OTHERS; nullopt for anything else.
  std::optional<std::size_t> index_of(std::string_view code) const;
  /// Column an arbitrary article country folds into (non-focal -> OTHERS).
  std::size_t column_of(std::string_view code) const;
  std::string label(std::size_t index) const;

 private:
  std::vector<std::string> focal_;
};

struct ParseDiagnostics {
  std::size_t rows_read = 0;
  std::size_t articles_kept = 0;
  std::size_t dropped_no_affiliation = 0;
  std::vector<std::size_t> dropped_lines;
  std::size_t slices = 0;
};

struct ParsedCorpus {
  std::vector<SubjectYearSlice> slices;
  ParseDiagnostics diagnostics;
};

/// Reads the corpus CSV (`id,subject,year,citations,affiliations`).
/// Slices come back sorted by (subject, year); articles keep file order.
ParsedCorpus parse_corpus(std::istream& in);

/// Writes slices in the format `parse_corpus` reads.
void write_corpus(std::ostream& out, std::span<const SubjectYearSlice> slices);

std::string diagnostics_json(const ParseDiagnostics& diagnostics);

/// Shares of one article over focal countries followed by OTHERS.
Eigen::VectorXd share_vector(const ArticleRecord& article, const CountrySet& countries);

Eigen::VectorXd country_share(const SubjectYearSlice& slice, std::string_view article_id,
                              const CountrySet& countries);

/// Row i holds `share_vector` of article i; one column per focal country, then OTHERS.
Eigen::MatrixXd share_matrix(const SubjectYearSlice& slice, const CountrySet& countries);

/// n_c: summed fractional authorship of `country` over the slice.
double weighted_count(const SubjectYearSlice& slice, std::string_view country,
                      const CountrySet& countries);

Eigen::VectorXd citation_vector(const SubjectYearSlice& slice);

}  // namespace natimpact

#endif  // NATIMPACT_CORPUS_HPP
