#include "natimpact/corpus.hpp"

#include "natimpact/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <utility>

namespace natimpact {

namespace {

constexpr std::string_view kHeader = "id,subject,year,citations,affiliations";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename Int>
std::optional<Int> parse_integer(std::string_view text) {
  text = trim(text);
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// RFC-4180 style split of one record; quoted fields may contain commas and "".
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

bool valid_code(std::string_view code) {
  return !code.empty() && std::all_of(code.begin(), code.end(), [](unsigned char ch) {
    return std::isdigit(ch) || std::isupper(ch);
  });
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  return out;
}

std::vector<AuthorCount> parse_affiliations(std::string_view text, std::size_t line) {
  std::vector<AuthorCount> authors;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    const std::string_view entry = trim(text.substr(start, end - start));
    const std::size_t colon = entry.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line, "affiliation entry '" + std::string(entry) +
                                 "' is not COUNTRY:author_count");
    }
    std::string code = upper(trim(entry.substr(0, colon)));
    if (!valid_code(code)) {
      throw ParseError(line, "invalid country code '" + code + "'");
    }
    const auto count = parse_integer<std::int64_t>(entry.substr(colon + 1));
    if (!count || *count <= 0) {
      throw ParseError(line, "author count for " + code + " must be a positive integer");
    }
    authors.push_back({std::move(code), *count});
    start = end + 1;
  }
  return authors;
}

}  // namespace

ArticleRecord make_article(std::string id, std::string subject, int year,
                           std::int64_t citations, std::vector<AuthorCount> authors) {
  if (citations < 0) throw ValidationError("article " + id + ": negative citation count");
  if (authors.empty()) throw ValidationError("article " + id + ": no affiliations");

  std::map<std::string, std::int64_t> merged;
  std::int64_t total = 0;
  for (const auto& a : authors) {
    if (a.authors <= 0) {
      throw ValidationError("article " + id + ": non-positive author count for " + a.country);
    }
    merged[a.country] += a.authors;
    total += a.authors;
  }

  ArticleRecord record{std::move(id), std::move(subject), year, citations, {}, std::move(authors)};
  record.shares.reserve(merged.size());
  for (const auto& [code, count] : merged) {
    record.shares.push_back({code, static_cast<double>(count) / static_cast<double>(total)});
  }
  return record;
}

CountrySet::CountrySet(std::vector<std::string> focal) : focal_(std::move(focal)) {
  std::set<std::string_view> seen;
  for (const auto& code : focal_) {
    if (code == kOthers) throw ValidationError("OTHERS cannot be a focal country");
    if (!valid_code(code)) throw ValidationError("invalid focal country code '" + code + "'");
    if (!seen.insert(code).second) throw ValidationError("duplicate focal country " + code);
  }
}

std::optional<std::size_t> CountrySet::index_of(std::string_view code) const {
  if (code == kOthers) return others_index();
  const auto it = std::find(focal_.begin(), focal_.end(), code);
  if (it == focal_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - focal_.begin());
}

std::size_t CountrySet::column_of(std::string_view code) const {
  return index_of(code).value_or(others_index());
}

std::string CountrySet::label(std::size_t index) const {
  return index < focal_.size() ? focal_[index] : std::string(kOthers);
}

ParsedCorpus parse_corpus(std::istream& in) {
  ParsedCorpus result;
  std::map<std::pair<std::string, int>, SubjectYearSlice> slices;
  std::map<std::pair<std::string, int>, std::set<std::string>> ids;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      if (trim(line) != kHeader) {
        throw ParseError(line_no, "expected header '" + std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    ++result.diagnostics.rows_read;
    auto fields = split_csv(line);
    if (!fields) throw ParseError(line_no, "unterminated quoted field");
    if (fields->size() != 5) {
      throw ParseError(line_no, "expected 5 columns, found " + std::to_string(fields->size()));
    }
    const std::string id(trim((*fields)[0]));
    const std::string subject(trim((*fields)[1]));
    if (id.empty()) throw ParseError(line_no, "empty article id");
    if (subject.empty()) throw ParseError(line_no, "empty subject");
    const auto year = parse_integer<int>((*fields)[2]);
    if (!year) throw ParseError(line_no, "year is not an integer");
    const auto citations = parse_integer<std::int64_t>((*fields)[3]);
    if (!citations) throw ParseError(line_no, "citations is not an integer");
    if (*citations < 0) throw ParseError(line_no, "negative citation count");

    const std::string_view affiliations = trim((*fields)[4]);
    if (affiliations.empty()) {
      ++result.diagnostics.dropped_no_affiliation;
      result.diagnostics.dropped_lines.push_back(line_no);
      continue;
    }
    auto authors = parse_affiliations(affiliations, line_no);

    const auto key = std::make_pair(subject, *year);
    if (!ids[key].insert(id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate article id '" + id +
                            "' in " + subject + " " + std::to_string(*year));
    }
    auto& slice = slices[key];
    slice.subject = subject;
    slice.year = *year;
    slice.articles.push_back(make_article(id, subject, *year, *citations, std::move(authors)));
    ++result.diagnostics.articles_kept;
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header row");

  result.slices.reserve(slices.size());
  for (auto& [key, slice] : slices) result.slices.push_back(std::move(slice));
  result.diagnostics.slices = result.slices.size();
  return result;
}

void write_corpus(std::ostream& out, std::span<const SubjectYearSlice> slices) {
  out << kHeader << '\n';
  for (const auto& slice : slices) {
    for (const auto& a : slice.articles) {
      std::string affiliations;
      for (const auto& entry : a.authors) {
        if (!affiliations.empty()) affiliations.push_back(';');
        affiliations += entry.country + ":" + std::to_string(entry.authors);
      }
      out << quote_if_needed(a.id) << ',' << quote_if_needed(a.subject) << ',' << a.year << ','
          << a.citations << ",\"" << affiliations << "\"\n";
    }
  }
}

std::string diagnostics_json(const ParseDiagnostics& d) {
  nlohmann::json j;
  j["rows_read"] = d.rows_read;
  j["articles_kept"] = d.articles_kept;
  j["dropped_no_affiliation"] = d.dropped_no_affiliation;
  j["dropped_lines"] = d.dropped_lines;
  j["slices"] = d.slices;
  return j.dump(2);
}

Eigen::VectorXd share_vector(const ArticleRecord& article, const CountrySet& countries) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(countries.size()));
  for (const auto& s : article.shares) {
    v(static_cast<Eigen::Index>(countries.column_of(s.country))) += s.weight;
  }
  return v;
}

Eigen::VectorXd country_share(const SubjectYearSlice& slice, std::string_view article_id,
                              const CountrySet& countries) {
  const auto it = std::find_if(slice.articles.begin(), slice.articles.end(),
                               [&](const ArticleRecord& a) { return a.id == article_id; });
  if (it == slice.articles.end()) {
    throw LookupError("article '" + std::string(article_id) + "' not in " + slice.subject + " " +
                      std::to_string(slice.year));
  }
  return share_vector(*it, countries);
}

Eigen::MatrixXd share_matrix(const SubjectYearSlice& slice, const CountrySet& countries) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(slice.size()),
                    static_cast<Eigen::Index>(countries.size()));
  for (std::size_t i = 0; i < slice.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = share_vector(slice.articles[i], countries).transpose();
  }
  return m;
}

double weighted_count(const SubjectYearSlice& slice, std::string_view country,
                      const CountrySet& countries) {
  const auto index = countries.index_of(country);
  if (!index) throw LookupError("country " + std::string(country) + " is neither focal nor OTHERS");
  double total = 0.0;
  for (const auto& a : slice.articles) {
    for (const auto& s : a.shares) {
      if (countries.column_of(s.country) == *index) total += s.weight;
    }
  }
  return total;
}

Eigen::VectorXd citation_vector(const SubjectYearSlice& slice) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(slice.size()));
  for (std::size_t i = 0; i < slice.size(); ++i) {
    c(static_cast<Eigen::Index>(i)) = static_cast<double>(slice.articles[i].citations);
  }
  return c;
}

}  // namespace natimpact
