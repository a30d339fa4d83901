#include "natimpact/aggregate.hpp"

#include "natimpact/errors.hpp"
#include "natimpact/regression.hpp"
#include "natimpact/stats.hpp"

#include <json.hpp>

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace natimpact {

namespace {

std::uint64_t cell_seed(std::uint64_t seed, const SubjectYearSlice& slice, std::string_view country) {
  // FNV-1a over the cell identity.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  mix(slice.subject);
  mix(std::to_string(slice.year));
  mix(country);
  return substream_seed(seed, h);
}

TableCell blank_cell(const SubjectYearSlice& slice, const std::string& country, Method method,
                     double n_c) {
  TableCell cell;
  cell.subject = slice.subject;
  cell.year = slice.year;
  cell.country = country;
  cell.method = method;
  cell.n_c = n_c;
  return cell;
}

std::optional<Interval> bootstrap_interval(const SubjectYearSlice& slice, const std::string& country,
                                           const CountrySet& countries, Method statistic,
                                           const IndicatorParams& params, CellStatus& status) {
  BootstrapConfig config = params.bootstrap;
  config.level = params.level;
  config.seed = cell_seed(params.bootstrap.seed, slice, country);
  try {
    return bootstrap_ci(slice, country, countries, statistic, config, params.scale).interval;
  } catch (const CiUnavailableError&) {
    status = CellStatus::CiUnavailable;
    return std::nullopt;
  }
}

void fill_regression_cells(const SubjectYearSlice& slice, const CountrySet& countries,
                           const IndicatorParams& params, IndicatorTable& cells) {
  std::optional<RegressionFit<double>> fit;
  try {
    fit = ols_fit(build_design<double>(slice, countries));
  } catch (const InsufficientDataError&) {
    for (auto& cell : cells) {
      if (cell.status == CellStatus::Ok) cell.status = CellStatus::InsufficientData;
    }
    return;
  }
  const Eigen::VectorXd citations = citation_vector(slice);
  const double mu_g = geometric_mean(citations, Eigen::VectorXd::Ones(citations.size()));
  const bool raw = params.scale == Scale::Raw;

  for (auto& cell : cells) {
    if (cell.status != CellStatus::Ok) continue;
    const auto index = fit->index_of(cell.country);
    if (!fit->identified[index]) {
      cell.status = CellStatus::NonIdentified;
      continue;
    }
    if (!raw && !(mu_g > 0)) {
      cell.status = CellStatus::Degenerate;
      continue;
    }
    const double normaliser = raw ? 1.0 : mu_g;
    cell.estimate = reg_indicator(*fit, normaliser, cell.country);
    try {
      cell.ci = reg_indicator_ci(*fit, normaliser, cell.country, params.level, params.reg_ci_mode);
    } catch (const CiUnavailableError&) {
      cell.status = CellStatus::CiUnavailable;
    }
  }
}

}  // namespace

std::string_view to_string(CellStatus status) {
  switch (status) {
    case CellStatus::Ok: return "ok";
    case CellStatus::NoArticles: return "no_articles";
    case CellStatus::NonIdentified: return "non_identified";
    case CellStatus::InsufficientData: return "insufficient_data";
    case CellStatus::CiUnavailable: return "ci_unavailable";
    case CellStatus::Degenerate: return "degenerate";
  }
  return "?";
}

CellStatus parse_status(std::string_view tag) {
  for (auto s : {CellStatus::Ok, CellStatus::NoArticles, CellStatus::NonIdentified,
                 CellStatus::InsufficientData, CellStatus::CiUnavailable, CellStatus::Degenerate}) {
    if (to_string(s) == tag) return s;
  }
  throw ParseError(0, "unknown cell status '" + std::string(tag) + "'");
}

std::string_view to_string(TrendQuantity quantity) {
  return quantity == TrendQuantity::Estimate ? "estimate" : "ci_width";
}

IndicatorTable slice_cells(const SubjectYearSlice& slice, const CountrySet& countries,
                           Method method, const IndicatorParams& params) {
  IndicatorTable cells;
  cells.reserve(countries.focal_size());
  for (const auto& country : countries.focal()) {
    TableCell cell = blank_cell(slice, country, method, weighted_count(slice, country, countries));
    if (!(cell.n_c > 0)) cell.status = CellStatus::NoArticles;
    cells.push_back(std::move(cell));
  }
  if (method == Method::RegGeo) {
    fill_regression_cells(slice, countries, params, cells);
    return cells;
  }

  for (auto& cell : cells) {
    if (cell.status != CellStatus::Ok) continue;
    try {
      switch (method) {
        case Method::Geo: {
          cell.estimate = geo_indicator(slice, cell.country, countries, params.scale).estimate;
          if (params.geo_bootstrap) {
            cell.ci = bootstrap_interval(slice, cell.country, countries, Method::Geo, params,
                                         cell.status);
          } else {
            try {
              cell.ci = geo_indicator_ci(slice, cell.country, countries, params.level,
                                         params.geo_ci_mode, params.scale);
            } catch (const CiUnavailableError&) {
              cell.status = CellStatus::CiUnavailable;
            }
          }
          break;
        }
        case Method::Arith:
          cell.estimate = arith_indicator(slice, cell.country, countries, params.scale).estimate;
          cell.ci = bootstrap_interval(slice, cell.country, countries, Method::Arith, params,
                                       cell.status);
          break;
        case Method::TopX: {
          const IndicatorResult r = top_share(slice, cell.country, countries, params.top_x);
          cell.estimate = r.estimate;
          cell.warning = r.warning;
          try {
            cell.ci = top_share_ci(r, params.level);
          } catch (const CiUnavailableError&) {
            cell.status = CellStatus::CiUnavailable;
          }
          break;
        }
        case Method::RegGeo:
          break;
      }
    } catch (const DivisionDegenerateError&) {
      cell.status = CellStatus::Degenerate;
    } catch (const NoArticlesError&) {
      cell.status = CellStatus::NoArticles;
    }
  }
  return cells;
}

IndicatorTable indicator_table(std::span<const SubjectYearSlice> corpus, const CountrySet& countries,
                               Method method, const IndicatorParams& params) {
  params.bootstrap.validate();
  if (!(params.level > 0 && params.level < 1)) throw ConfigError("level must lie in (0, 1)");
  if (!(params.top_x > 0 && params.top_x < 100)) throw ConfigError("X must lie in (0, 100)");

  std::vector<IndicatorTable> per_slice(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.size()); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    per_slice[idx] = slice_cells(corpus[idx], countries, method, params);
  }
  IndicatorTable table;
  for (auto& cells : per_slice) {
    for (auto& cell : cells) table.push_back(std::move(cell));
  }
  return table;
}

namespace {

TrendSeries median_series(const IndicatorTable& table, Method method, std::string_view country,
                          TrendQuantity quantity) {
  std::map<int, std::vector<double>> by_year;
  for (const auto& cell : table) {
    if (cell.method != method || cell.country != country) continue;
    if (quantity == TrendQuantity::Estimate && cell.estimate) {
      by_year[cell.year].push_back(*cell.estimate);
    } else if (quantity == TrendQuantity::CiWidth && cell.ci) {
      by_year[cell.year].push_back(cell.ci->width());
    }
  }
  if (by_year.empty()) {
    throw EmptySampleError("no computable cells for " + std::string(to_string(method)) + " " +
                           std::string(country));
  }
  TrendSeries series{method, std::string(country), quantity, {}};
  for (auto& [year, values] : by_year) {
    const auto count = values.size();
    series.points.push_back({year, median(std::move(values)), count});
  }
  return series;
}

}  // namespace

TrendSeries median_across_subjects(const IndicatorTable& table, Method method,
                                   std::string_view country) {
  return median_series(table, method, country, TrendQuantity::Estimate);
}

TrendSeries ci_width_series(const IndicatorTable& table, Method method, std::string_view country) {
  return median_series(table, method, country, TrendQuantity::CiWidth);
}

std::vector<TrendSeries> all_trends(const IndicatorTable& table) {
  std::vector<std::pair<Method, std::string>> keys;
  std::set<std::pair<int, std::string>> seen;
  for (const auto& cell : table) {
    if (seen.insert({static_cast<int>(cell.method), cell.country}).second) {
      keys.emplace_back(cell.method, cell.country);
    }
  }
  std::vector<TrendSeries> out;
  for (const auto& [method, country] : keys) {
    for (auto quantity : {TrendQuantity::Estimate, TrendQuantity::CiWidth}) {
      try {
        out.push_back(median_series(table, method, country, quantity));
      } catch (const EmptySampleError&) {
      }
    }
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

namespace {

constexpr std::string_view kTableHeader = "subject,year,country,method,estimate,ci_low,ci_high,n_c,status";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  return out + "\"";
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back().push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(ch);
    }
  }
  return fields;
}

double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "'" + s + "' is not a number");
  }
  return v;
}

std::optional<double> to_optional(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return to_double(s, line);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_table_csv(std::ostream& out, const IndicatorTable& table) {
  out << kTableHeader << '\n';
  for (const auto& c : table) {
    out << csv_field(c.subject) << ',' << c.year << ',' << c.country << ',' << to_string(c.method)
        << ',' << (c.estimate ? format_double(*c.estimate) : "") << ','
        << (c.ci ? format_double(c.ci->low) : "") << ',' << (c.ci ? format_double(c.ci->high) : "")
        << ',' << format_double(c.n_c) << ',' << to_string(c.status) << '\n';
  }
}

void write_table_json(std::ostream& out, const IndicatorTable& table) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& c : table) {
    records.push_back({{"subject", c.subject},
                       {"year", c.year},
                       {"country", c.country},
                       {"method", to_string(c.method)},
                       {"estimate", optional_json(c.estimate)},
                       {"ci_low", optional_json(c.ci ? std::optional(c.ci->low) : std::nullopt)},
                       {"ci_high", optional_json(c.ci ? std::optional(c.ci->high) : std::nullopt)},
                       {"n_c", c.n_c},
                       {"status", to_string(c.status)}});
  }
  out << records.dump(2) << '\n';
}

IndicatorTable read_table_csv(std::istream& in) {
  IndicatorTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kTableHeader) throw ParseError(line_no, "unexpected indicator table header");
      header_seen = true;
      continue;
    }
    const auto f = split_record(line);
    if (f.size() != 9) throw ParseError(line_no, "expected 9 columns");
    TableCell cell;
    cell.subject = f[0];
    cell.year = static_cast<int>(to_double(f[1], line_no));
    cell.country = f[2];
    cell.method = parse_method(f[3]);
    cell.estimate = to_optional(f[4], line_no);
    const auto low = to_optional(f[5], line_no);
    const auto high = to_optional(f[6], line_no);
    if (low.has_value() != high.has_value()) throw ParseError(line_no, "half-open interval");
    if (low) cell.ci = Interval{*low, *high};
    cell.n_c = to_double(f[7], line_no);
    cell.status = parse_status(f[8]);
    table.push_back(std::move(cell));
  }
  if (!header_seen) throw ParseError(1, "missing indicator table header");
  return table;
}

IndicatorTable read_table_json(std::istream& in) {
  const nlohmann::json records = nlohmann::json::parse(in);
  IndicatorTable table;
  for (const auto& r : records) {
    TableCell cell;
    cell.subject = r.at("subject").get<std::string>();
    cell.year = r.at("year").get<int>();
    cell.country = r.at("country").get<std::string>();
    cell.method = parse_method(r.at("method").get<std::string>());
    if (!r.at("estimate").is_null()) cell.estimate = r.at("estimate").get<double>();
    if (!r.at("ci_low").is_null()) {
      cell.ci = Interval{r.at("ci_low").get<double>(), r.at("ci_high").get<double>()};
    }
    cell.n_c = r.at("n_c").get<double>();
    cell.status = parse_status(r.at("status").get<std::string>());
    table.push_back(std::move(cell));
  }
  return table;
}

void write_trends_csv(std::ostream& out, std::span<const TrendSeries> series) {
  out << "method,country,quantity,year,median,subjects\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out << to_string(s.method) << ',' << s.country << ',' << to_string(s.quantity) << ','
          << p.year << ',' << format_double(p.median) << ',' << p.subjects << '\n';
    }
  }
}

void write_trends_json(std::ostream& out, std::span<const TrendSeries> series) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& s : series) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : s.points) {
      points.push_back({{"year", p.year}, {"median", p.median}, {"subjects", p.subjects}});
    }
    records.push_back({{"method", to_string(s.method)},
                       {"country", s.country},
                       {"quantity", to_string(s.quantity)},
                       {"points", points}});
  }
  out << records.dump(2) << '\n';
}

}  // namespace natimpact
