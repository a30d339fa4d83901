#ifndef NATIMPACT_AGGREGATE_HPP
#define NATIMPACT_AGGREGATE_HPP

#include "natimpact/corpus.hpp"
#include "natimpact/indicators.hpp"
#include "natimpact/interval.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natimpact {

/// Why a table cell has no estimate (or no interval). Statistical
/// degeneracies are data, not faults.
enum class CellStatus { Ok, NoArticles, NonIdentified, InsufficientData, CiUnavailable, Degenerate };

std::string_view to_string(CellStatus status);
CellStatus parse_status(std::string_view tag);

struct TableCell {
  std::string subject;
  int year = 0;
  std::string country;
  Method method = Method::Geo;
  std::optional<double> estimate;
  std::optional<Interval> ci;
  double n_c = 0.0;
  CellStatus status = CellStatus::Ok;
  bool warning = false;

  friend bool operator==(const TableCell& a, const TableCell& b) {
    auto same_ci = [](const std::optional<Interval>& x, const std::optional<Interval>& y) {
      return x.has_value() == y.has_value() && (!x || (x->low == y->low && x->high == y->high));
    };
    return a.subject == b.subject && a.year == b.year && a.country == b.country &&
           a.method == b.method && a.estimate == b.estimate && same_ci(a.ci, b.ci) &&
           a.n_c == b.n_c && a.status == b.status;
  }
};

using IndicatorTable = std::vector<TableCell>;

/// One cell per (slice, focal country), in slice order then focal order.
/// Slices are processed in parallel; bootstrap seeds derive from the cell's
/// (subject, year, country) so every cell is reproducible on its own.
IndicatorTable indicator_table(std::span<const SubjectYearSlice> corpus, const CountrySet& countries,
                               Method method, const IndicatorParams& params);

/// Cells of a single slice; `indicator_table` concatenates these.
IndicatorTable slice_cells(const SubjectYearSlice& slice, const CountrySet& countries,
                           Method method, const IndicatorParams& params);

struct TrendPoint {
  int year = 0;
  double median = 0.0;
  std::size_t subjects = 0;
};

enum class TrendQuantity { Estimate, CiWidth };

std::string_view to_string(TrendQuantity quantity);

struct TrendSeries {
  Method method = Method::Geo;
  std::string country;
  TrendQuantity quantity = TrendQuantity::Estimate;
  std::vector<TrendPoint> points;  // strictly increasing years
};

/// Per-year median of the present estimates across subjects.
TrendSeries median_across_subjects(const IndicatorTable& table, Method method,
                                   std::string_view country);

/// Per-year median of ci_high − ci_low across subjects with an interval.
TrendSeries ci_width_series(const IndicatorTable& table, Method method, std::string_view country);

/// Both series for every (method, country) pair present in the table.
/// Pairs with no computable cells are skipped.
std::vector<TrendSeries> all_trends(const IndicatorTable& table);

// Plot-data files.

void write_table_csv(std::ostream& out, const IndicatorTable& table);
void write_table_json(std::ostream& out, const IndicatorTable& table);
IndicatorTable read_table_csv(std::istream& in);
IndicatorTable read_table_json(std::istream& in);

void write_trends_csv(std::ostream& out, std::span<const TrendSeries> series);
void write_trends_json(std::ostream& out, std::span<const TrendSeries> series);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace natimpact

#endif  // NATIMPACT_AGGREGATE_HPP
