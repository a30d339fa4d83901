#ifndef NATIMPACT_CLI_HPP
#define NATIMPACT_CLI_HPP

#include "natimpact/corpus.hpp"
#include "natimpact/indicators.hpp"
#include "natimpact/interval.hpp"
#include "natimpact/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natimpact {

enum class OutputFormat { Csv, Json };

std::string_view to_string(OutputFormat format);

/// Effective settings of one run. Loaded from an optional JSON config file,
/// then overridden by command-line flags; echoed into every output directory.
struct RunConfig {
  std::vector<std::string> inputs;
  std::vector<std::string> countries;
  std::vector<Method> methods{Method::Geo};
  double top_x = 10.0;
  double level = 0.95;
  /// Unset: REG_GEO paper-literal, GEO corrected.
  std::optional<CiMode> ci_mode;
  bool geo_bootstrap = false;
  Scale scale = Scale::Normalised;
  int replicates = 999;
  std::uint64_t seed = 0;
  std::filesystem::path out = "natimpact-out";
  OutputFormat format = OutputFormat::Csv;

  void validate() const;
  IndicatorParams indicator_params() const;
  std::string to_json() const;
  /// Applies the keys present in a JSON config document.
  void merge_json(const std::string& text);
};

/// Skewness/kurtosis of one slice, raw and after ln(1 + c). A slice whose
/// moments are undefined (fewer than 3 articles, constant citations) carries
/// status "degenerate" and no statistics.
struct SliceDiagnostics {
  std::string subject;
  int year = 0;
  std::size_t n = 0;
  std::optional<MomentReport<double>> raw;
  std::optional<MomentReport<double>> log;
  std::string status = "ok";
};

std::vector<SliceDiagnostics> diagnose_slices(std::span<const SubjectYearSlice> slices);

/// Per-year means of the slice statistics across subjects.
struct YearDiagnostics {
  int year = 0;
  std::size_t subjects = 0;
  double raw_skewness = 0.0;
  double raw_kurtosis = 0.0;
  double log_skewness = 0.0;
  double log_kurtosis = 0.0;
};

std::vector<YearDiagnostics> diagnostics_by_year(std::span<const SliceDiagnostics> rows);

/// Writes `content` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Entry point for the `natimpact` tool. Returns the process exit status:
/// 0 iff no I/O, parse or configuration error occurred.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace natimpact

#endif  // NATIMPACT_CLI_HPP
