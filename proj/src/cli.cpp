#include "natimpact/cli.hpp"

#include "natimpact/aggregate.hpp"
#include "natimpact/errors.hpp"
#include "natimpact/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace natimpact {

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "json";
}

namespace {

OutputFormat parse_format(std::string_view tag) {
  if (tag == "csv") return OutputFormat::Csv;
  if (tag == "json") return OutputFormat::Json;
  throw ConfigError("unknown format '" + std::string(tag) + "'");
}

CiMode parse_ci_mode(std::string_view tag) {
  if (tag == "paper-literal") return CiMode::PaperLiteral;
  if (tag == "corrected") return CiMode::Corrected;
  throw ConfigError("unknown CI mode '" + std::string(tag) + "'");
}

bool parse_geo_ci(std::string_view tag) {
  if (tag == "formula") return false;
  if (tag == "bootstrap") return true;
  throw ConfigError("unknown GEO interval source '" + std::string(tag) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string extension_for(OutputFormat format) { return format == OutputFormat::Csv ? ".csv" : ".json"; }

}  // namespace

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("at least one method must be selected");
  if (!(level > 0 && level < 1)) throw ConfigError("--level must lie in (0, 1)");
  if (!(top_x > 0 && top_x < 100)) throw ConfigError("--top-x must lie in (0, 100)");
  if (replicates < 1) throw ConfigError("--replicates must be >= 1");
}

IndicatorParams RunConfig::indicator_params() const {
  IndicatorParams p;
  p.top_x = top_x;
  p.level = level;
  if (ci_mode) {
    p.reg_ci_mode = *ci_mode;
    p.geo_ci_mode = *ci_mode;
  }
  p.scale = scale;
  p.geo_bootstrap = geo_bootstrap;
  p.bootstrap.replicates = replicates;
  p.bootstrap.level = level;
  p.bootstrap.seed = seed;
  return p;
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  std::vector<std::string> input_names;
  for (const auto& i : inputs) input_names.push_back(i);
  j["inputs"] = input_names;
  j["countries"] = countries;
  std::vector<std::string> method_tags;
  for (auto m : methods) method_tags.emplace_back(natimpact::to_string(m));
  j["methods"] = method_tags;
  j["top_x"] = top_x;
  j["level"] = level;
  j["ci_mode"] = ci_mode ? nlohmann::json(std::string(natimpact::to_string(*ci_mode)))
                         : nlohmann::json("default");
  j["geo_ci"] = geo_bootstrap ? "bootstrap" : "formula";
  j["scale"] = std::string(natimpact::to_string(scale));
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["format"] = std::string(natimpact::to_string(format));
  return j.dump(2) + "\n";
}

void RunConfig::merge_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    if (j.contains("countries")) countries = j["countries"].get<std::vector<std::string>>();
    if (j.contains("methods")) {
      methods.clear();
      for (const auto& m : j["methods"]) methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("top_x")) top_x = j["top_x"].get<double>();
    if (j.contains("level")) level = j["level"].get<double>();
    if (j.contains("ci_mode") && j["ci_mode"] != "default") {
      ci_mode = parse_ci_mode(j["ci_mode"].get<std::string>());
    }
    if (j.contains("geo_ci")) geo_bootstrap = parse_geo_ci(j["geo_ci"].get<std::string>());
    if (j.contains("scale")) scale = parse_scale(j["scale"].get<std::string>());
    if (j.contains("replicates")) replicates = j["replicates"].get<int>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) out = j["out"].get<std::string>();
    if (j.contains("format")) format = parse_format(j["format"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SliceDiagnostics> diagnose_slices(std::span<const SubjectYearSlice> slices) {
  std::vector<SliceDiagnostics> rows;
  rows.reserve(slices.size());
  for (const auto& slice : slices) {
    SliceDiagnostics row{slice.subject, slice.year, slice.size(), {}, {}, "ok"};
    const Eigen::VectorXd citations = citation_vector(slice);
    try {
      row.raw = moments(citations);
      row.log = moments(Eigen::VectorXd(log1p_citations(citations)));
    } catch (const DegenerateSampleError&) {
      row.raw.reset();
      row.log.reset();
      row.status = "degenerate";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<YearDiagnostics> diagnostics_by_year(std::span<const SliceDiagnostics> rows) {
  std::map<int, YearDiagnostics> years;
  for (const auto& r : rows) {
    if (!r.raw || !r.log) continue;
    auto& y = years[r.year];
    y.year = r.year;
    ++y.subjects;
    y.raw_skewness += r.raw->skewness;
    y.raw_kurtosis += r.raw->kurtosis;
    y.log_skewness += r.log->skewness;
    y.log_kurtosis += r.log->kurtosis;
  }
  std::vector<YearDiagnostics> out;
  for (auto& [year, y] : years) {
    const auto n = static_cast<double>(y.subjects);
    y.raw_skewness /= n;
    y.raw_kurtosis /= n;
    y.log_skewness /= n;
    y.log_kurtosis /= n;
    out.push_back(y);
  }
  return out;
}

namespace {

// Parses every input, merging slices that share (subject, year) across files.
ParsedCorpus load_corpus(const std::vector<std::string>& paths) {
  std::map<std::pair<std::string, int>, SubjectYearSlice> merged;
  ParsedCorpus result;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path + ": cannot open");
    ParsedCorpus part;
    try {
      part = parse_corpus(in);
    } catch (const Error& e) {
      throw Error(path + ": " + e.what());
    }
    auto& d = result.diagnostics;
    d.rows_read += part.diagnostics.rows_read;
    d.articles_kept += part.diagnostics.articles_kept;
    d.dropped_no_affiliation += part.diagnostics.dropped_no_affiliation;
    d.dropped_lines.insert(d.dropped_lines.end(), part.diagnostics.dropped_lines.begin(),
                           part.diagnostics.dropped_lines.end());
    for (auto& slice : part.slices) {
      auto& target = merged[{slice.subject, slice.year}];
      if (target.articles.empty()) {
        target = std::move(slice);
        continue;
      }
      for (auto& a : slice.articles) {
        for (const auto& existing : target.articles) {
          if (existing.id == a.id) {
            throw ValidationError(path + ": duplicate article id '" + a.id + "' in " +
                                  slice.subject + " " + std::to_string(slice.year));
          }
        }
        target.articles.push_back(std::move(a));
      }
    }
  }
  for (auto& [key, slice] : merged) result.slices.push_back(std::move(slice));
  result.diagnostics.slices = result.slices.size();
  return result;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string render_slice_diagnostics(const std::vector<SliceDiagnostics>& rows, OutputFormat format) {
  auto stat = [](const std::optional<MomentReport<double>>& m, bool skew) -> std::optional<double> {
    if (!m) return std::nullopt;
    return skew ? m->skewness : m->kurtosis;
  };
  auto flag = [](const std::optional<MomentReport<double>>& m, bool skew) -> std::string {
    if (!m) return "";
    return (skew ? m->skewness_acceptable : m->kurtosis_acceptable) ? "true" : "false";
  };
  std::ostringstream out;
  if (format == OutputFormat::Csv) {
    out << "subject,year,n,raw_skewness,raw_kurtosis,log_skewness,log_kurtosis,"
           "raw_skewness_ok,raw_kurtosis_ok,log_skewness_ok,log_kurtosis_ok,status\n";
    for (const auto& r : rows) {
      out << r.subject << ',' << r.year << ',' << r.n << ',' << format_optional(stat(r.raw, true))
          << ',' << format_optional(stat(r.raw, false)) << ','
          << format_optional(stat(r.log, true)) << ',' << format_optional(stat(r.log, false))
          << ',' << flag(r.raw, true) << ',' << flag(r.raw, false) << ',' << flag(r.log, true)
          << ',' << flag(r.log, false) << ',' << r.status << '\n';
    }
    return out.str();
  }
  nlohmann::json j = nlohmann::json::array();
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  for (const auto& r : rows) {
    j.push_back({{"subject", r.subject},
                 {"year", r.year},
                 {"n", r.n},
                 {"raw_skewness", opt(stat(r.raw, true))},
                 {"raw_kurtosis", opt(stat(r.raw, false))},
                 {"log_skewness", opt(stat(r.log, true))},
                 {"log_kurtosis", opt(stat(r.log, false))},
                 {"raw_skewness_ok", r.raw ? nlohmann::json(r.raw->skewness_acceptable) : nlohmann::json()},
                 {"raw_kurtosis_ok", r.raw ? nlohmann::json(r.raw->kurtosis_acceptable) : nlohmann::json()},
                 {"log_skewness_ok", r.log ? nlohmann::json(r.log->skewness_acceptable) : nlohmann::json()},
                 {"log_kurtosis_ok", r.log ? nlohmann::json(r.log->kurtosis_acceptable) : nlohmann::json()},
                 {"status", r.status}});
  }
  return j.dump(2) + "\n";
}

std::string render_year_diagnostics(const std::vector<YearDiagnostics>& rows, OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::Csv) {
    out << "year,subjects,raw_skewness,raw_kurtosis,log_skewness,log_kurtosis\n";
    for (const auto& y : rows) {
      out << y.year << ',' << y.subjects << ',' << format_double(y.raw_skewness) << ','
          << format_double(y.raw_kurtosis) << ',' << format_double(y.log_skewness) << ','
          << format_double(y.log_kurtosis) << '\n';
    }
    return out.str();
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& y : rows) {
    j.push_back({{"year", y.year},
                 {"subjects", y.subjects},
                 {"raw_skewness", y.raw_skewness},
                 {"raw_kurtosis", y.raw_kurtosis},
                 {"log_skewness", y.log_skewness},
                 {"log_kurtosis", y.log_kurtosis}});
  }
  return j.dump(2) + "\n";
}

int cmd_validate(const RunConfig& config, std::ostream& out) {
  const ParsedCorpus corpus = load_corpus(config.inputs);
  out << diagnostics_json(corpus.diagnostics) << '\n';
  return 0;
}

int cmd_compute(const RunConfig& config, std::ostream& out) {
  if (config.countries.empty()) throw ConfigError("--countries is required for compute");
  const CountrySet countries(config.countries);
  const ParsedCorpus corpus = load_corpus(config.inputs);
  const IndicatorParams params = config.indicator_params();
  for (const Method method : config.methods) {
    const IndicatorTable table = indicator_table(corpus.slices, countries, method, params);
    std::ostringstream buf;
    if (config.format == OutputFormat::Csv) {
      write_table_csv(buf, table);
    } else {
      write_table_json(buf, table);
    }
    const auto path =
        config.out / ("table_" + std::string(to_string(method)) + extension_for(config.format));
    write_file_atomic(path, buf.str());
    out << "wrote " << path.string() << " (" << table.size() << " cells)\n";
  }
  write_file_atomic(config.out / "config.json", config.to_json());
  return 0;
}

int cmd_aggregate(const RunConfig& config, std::ostream& out) {
  IndicatorTable table;
  for (const auto& path : config.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path + ": cannot open");
    IndicatorTable part;
    try {
      part = std::filesystem::path(path).extension() == ".json" ? read_table_json(in)
                                                                : read_table_csv(in);
    } catch (const std::exception& e) {
      throw Error(path + ": " + e.what());
    }
    table.insert(table.end(), part.begin(), part.end());
  }
  const auto series = all_trends(table);
  std::ostringstream buf;
  if (config.format == OutputFormat::Csv) {
    write_trends_csv(buf, series);
  } else {
    write_trends_json(buf, series);
  }
  const auto path = config.out / ("trends" + extension_for(config.format));
  write_file_atomic(path, buf.str());
  write_file_atomic(config.out / "config.json", config.to_json());
  out << "wrote " << path.string() << " (" << series.size() << " series)\n";
  return 0;
}

int cmd_diagnose(const RunConfig& config, std::ostream& out) {
  const ParsedCorpus corpus = load_corpus(config.inputs);
  const auto rows = diagnose_slices(corpus.slices);
  const auto years = diagnostics_by_year(rows);
  const auto ext = extension_for(config.format);
  write_file_atomic(config.out / ("diagnostics" + ext), render_slice_diagnostics(rows, config.format));
  write_file_atomic(config.out / ("diagnostics_by_year" + ext),
                    render_year_diagnostics(years, config.format));
  write_file_atomic(config.out / "config.json", config.to_json());
  out << "diagnosed " << rows.size() << " slices\n";
  return 0;
}

int cmd_synth(const RunConfig& config, bool coverage, int trials, std::ostream& out) {
  if (config.inputs.size() != 1) throw ConfigError("synth takes exactly one spec file");
  SynthSpec spec = parse_synth_spec(read_file(config.inputs.front()));

  if (coverage) {
    std::vector<std::string> focal = config.countries;
    if (focal.empty()) {
      for (const auto& c : spec.countries) focal.push_back(c.code);
    }
    const CountrySet countries(focal);
    nlohmann::json reports = nlohmann::json::array();
    for (const Method method : config.methods) {
      const CoverageReport r =
          coverage_experiment(spec, countries, trials, method, config.indicator_params());
      out << "coverage " << to_string(method) << " rate=" << format_double(r.coverage)
          << " evaluated=" << r.evaluated << " excluded=" << r.excluded
          << " mean_width=" << format_double(r.mean_width)
          << " median_width=" << format_double(r.median_width) << '\n';
      reports.push_back({{"method", to_string(method)},
                         {"trials", r.trials},
                         {"evaluated", r.evaluated},
                         {"excluded", r.excluded},
                         {"covered", r.covered},
                         {"coverage", r.coverage},
                         {"mean_width", r.mean_width},
                         {"median_width", r.median_width}});
    }
    write_file_atomic(config.out / "coverage.json", reports.dump(2) + "\n");
    write_file_atomic(config.out / "config.json", config.to_json());
    return 0;
  }

  const SynthCorpus corpus = generate_corpus(spec);
  std::ostringstream buf;
  write_corpus(buf, corpus.slices);
  write_file_atomic(config.out / "corpus.csv", buf.str());
  write_file_atomic(config.out / "ground_truth.json", ground_truth_json(corpus.truth) + "\n");
  write_file_atomic(config.out / "spec.json", synth_spec_json(spec) + "\n");
  std::size_t articles = 0;
  for (const auto& s : corpus.slices) articles += s.size();
  out << "wrote " << (config.out / "corpus.csv").string() << " (" << articles << " articles)\n";
  return 0;
}

struct Overrides {
  std::string config_file;
  std::vector<std::string> countries;
  std::vector<std::string> methods;
  std::optional<double> top_x;
  std::optional<double> level;
  std::optional<std::string> ci_mode;
  std::optional<std::string> geo_ci;
  std::optional<std::string> scale;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<std::string> out;
};

void add_run_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_file, "JSON run configuration; flags override it");
  sub->add_option("--countries", o.countries, "Focal country codes")->delimiter(',');
  sub->add_option("--methods", o.methods, "REG_GEO, GEO, ARITH, TOP_X")->delimiter(',');
  sub->add_option("--top-x", o.top_x, "X for TOP_X, in (0, 100)");
  sub->add_option("--level", o.level, "Confidence level, in (0, 1)");
  sub->add_option("--ci-mode", o.ci_mode, "paper-literal | corrected");
  sub->add_option("--geo-ci", o.geo_ci, "GEO interval source: formula | bootstrap");
  sub->add_option("--scale", o.scale, "normalised | raw");
  sub->add_option("--replicates", o.replicates, "Bootstrap replicates");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--format", o.format, "csv | json");
  sub->add_option("--out", o.out, "Output directory");
}

RunConfig resolve(const Overrides& o, const std::vector<std::string>& inputs) {
  RunConfig config;
  if (!o.config_file.empty()) config.merge_json(read_file(o.config_file));
  config.inputs = inputs;
  if (!o.countries.empty()) {
    config.countries.clear();
    for (const auto& c : o.countries) {
      std::string code = c;
      for (auto& ch : code) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      config.countries.push_back(code);
    }
  }
  if (!o.methods.empty()) {
    config.methods.clear();
    for (const auto& m : o.methods) config.methods.push_back(parse_method(m));
  }
  if (o.top_x) config.top_x = *o.top_x;
  if (o.level) config.level = *o.level;
  if (o.ci_mode) config.ci_mode = parse_ci_mode(*o.ci_mode);
  if (o.geo_ci) config.geo_bootstrap = parse_geo_ci(*o.geo_ci);
  if (o.scale) config.scale = parse_scale(*o.scale);
  if (o.replicates) config.replicates = *o.replicates;
  if (o.seed) config.seed = *o.seed;
  if (o.format) config.format = parse_format(*o.format);
  if (o.out) config.out = *o.out;
  config.validate();
  return config;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"National citation impact indicators"};
  app.require_subcommand(1);

  Overrides overrides;
  std::vector<std::string> inputs;
  bool coverage = false;
  int trials = 500;

  auto* validate = app.add_subcommand("validate", "Parse and check corpus files");
  auto* compute = app.add_subcommand("compute", "Write per-slice indicator tables");
  auto* aggregate = app.add_subcommand("aggregate", "Median trend series from indicator tables");
  auto* diagnose = app.add_subcommand("diagnose", "Skewness and kurtosis per slice and year");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus or run a coverage experiment");
  for (auto* sub : {validate, compute, aggregate, diagnose, synth}) {
    add_run_options(sub, overrides);
    sub->add_option("inputs", inputs, "Input files")->required();
  }
  synth->add_flag("--coverage", coverage, "Run the coverage experiment instead of writing a corpus");
  synth->add_option("--trials", trials, "Coverage trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const RunConfig config = resolve(overrides, inputs);
    if (validate->parsed()) return cmd_validate(config, out);
    if (compute->parsed()) return cmd_compute(config, out);
    if (aggregate->parsed()) return cmd_aggregate(config, out);
    if (diagnose->parsed()) return cmd_diagnose(config, out);
    if (synth->parsed()) return cmd_synth(config, coverage, trials, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace natimpact
