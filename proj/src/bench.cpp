#include "despeckle/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "despeckle/filters.hpp"
#include "despeckle/raster.hpp"
#include "despeckle/version.hpp"

namespace despeckle {

using nlohmann::json;

namespace {

Error config_error(const std::string& field, const std::string& what) {
  return Error(ErrorKind::ConfigError, "config field '" + field + "': " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw config_error(where.empty() ? key : where + "." + key, "unknown field");
    }
  }
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where.empty() ? key : where + "." + key, "missing or wrong type");
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw config_error(where + "." + key, "expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw config_error(where + "." + key, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

Region parse_region(const json& j, const std::string& where) {
  if (!j.is_object()) throw config_error(where, "expected an object {x,y,w,h}");
  reject_unknown(j, where, {"x", "y", "w", "h"});
  for (const char* k : {"x", "y", "w", "h"}) {
    if (!j.contains(k)) throw config_error(where + "." + k, "missing");
  }
  Region r{get_count(j, "x", where), get_count(j, "y", where), get_count(j, "w", where),
           get_count(j, "h", where)};
  if (r.w == 0 || r.h == 0) throw config_error(where, "w and h must be >= 1");
  return r;
}

PhantomKind parse_phantom(const json& j, const std::string& where) {
  if (!j.is_object()) throw config_error(where, "expected an object");
  const auto kind = get_field<std::string>(j, "kind", where);
  if (kind == "constant") {
    reject_unknown(j, where, {"kind", "level"});
    return phantom::Constant{get_number(j, "level", where)};
  }
  if (kind == "quadrants") {
    reject_unknown(j, where, {"kind", "levels"});
    const auto levels = get_field<std::vector<double>>(j, "levels", where);
    if (levels.size() != 4) throw config_error(where + ".levels", "expected four levels");
    return phantom::Quadrants{levels[0], levels[1], levels[2], levels[3]};
  }
  if (kind == "step_edge") {
    reject_unknown(j, where, {"kind", "low", "high"});
    return phantom::StepEdge{get_number(j, "low", where), get_number(j, "high", where)};
  }
  if (kind == "point_targets") {
    reject_unknown(j, where, {"kind", "background", "amplitude", "count"});
    return phantom::PointTargets{get_number(j, "background", where),
                                 get_number(j, "amplitude", where),
                                 get_count(j, "count", where)};
  }
  throw config_error(where + ".kind", "unknown phantom kind '" + kind + "'");
}

SyntheticScene parse_synthetic(const json& j) {
  const std::string where = "synthetic";
  if (!j.is_object()) throw config_error(where, "expected an object");
  reject_unknown(j, where, {"width", "height", "phantom", "looks", "seed"});
  SyntheticScene scene;
  if (j.contains("width")) scene.width = get_count(j, "width", where);
  if (j.contains("height")) scene.height = get_count(j, "height", where);
  if (j.contains("phantom")) scene.phantom = parse_phantom(j.at("phantom"), where + ".phantom");
  if (j.contains("looks")) scene.speckle.looks = get_number(j, "looks", where);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw config_error(where + ".seed", "expected an unsigned integer");
    }
    scene.speckle.seed = j.at("seed").get<std::uint64_t>();
  }
  return scene;
}

LabeledFilter parse_filter(const json& j, std::size_t index) {
  const std::string where = "filters[" + std::to_string(index) + "]";
  if (!j.is_object()) throw config_error(where, "expected an object");
  const auto label = get_field<std::string>(j, "label", where);
  const auto kind_name = get_field<std::string>(j, "kind", where);
  FilterKind kind;
  try {
    kind = parse_filter_kind(kind_name);
  } catch (const Error&) {
    throw config_error(where + ".kind", "unknown filter kind '" + kind_name + "'");
  }
  auto spec = FilterSpec::defaults(kind);
  switch (kind) {
    case FilterKind::Lee:
    case FilterKind::Kuan:
      reject_unknown(j, where, {"label", "kind", "window_radius", "looks"});
      break;
    case FilterKind::Frost:
      reject_unknown(j, where, {"label", "kind", "window_radius", "looks", "damping"});
      break;
    case FilterKind::Median:
      reject_unknown(j, where, {"label", "kind", "window_radius"});
      break;
    case FilterKind::Gaussian:
      reject_unknown(j, where, {"label", "kind", "sigma_spatial"});
      break;
    case FilterKind::Bilateral:
      reject_unknown(j, where, {"label", "kind", "sigma_spatial", "sigma_range"});
      break;
  }
  if (j.contains("window_radius")) spec.window_radius = get_count(j, "window_radius", where);
  if (j.contains("looks")) {
    // "inf" selects the noise-free limit (C_u^2 = 0).
    if (j.at("looks") == "inf") {
      spec.looks = std::numeric_limits<double>::infinity();
    } else {
      spec.looks = get_number(j, "looks", where);
    }
  }
  if (j.contains("damping")) spec.damping = get_number(j, "damping", where);
  if (j.contains("sigma_spatial")) spec.sigma_spatial = get_number(j, "sigma_spatial", where);
  if (j.contains("sigma_range")) spec.sigma_range = get_number(j, "sigma_range", where);
  try {
    validate(spec);
  } catch (const Error& e) {
    throw config_error(where, e.what());
  }
  return {label, spec};
}

SsimParams parse_ssim(const json& j) {
  const std::string where = "ssim";
  if (!j.is_object()) throw config_error(where, "expected an object");
  reject_unknown(j, where, {"k1", "k2", "window_radius", "window_sigma", "dynamic_range"});
  SsimParams p;
  if (j.contains("k1")) p.k1 = get_number(j, "k1", where);
  if (j.contains("k2")) p.k2 = get_number(j, "k2", where);
  if (j.contains("window_radius")) p.window_radius = get_count(j, "window_radius", where);
  if (j.contains("window_sigma")) p.window_sigma = get_number(j, "window_sigma", where);
  if (j.contains("dynamic_range")) p.dynamic_range = get_number(j, "dynamic_range", where);
  if (!(p.k1 > 0) || !(p.k2 > 0) || !(p.window_sigma > 0) ||
      (p.dynamic_range && !(*p.dynamic_range > 0))) {
    throw config_error(where, "k1, k2, window_sigma and dynamic_range must be > 0");
  }
  return p;
}

std::string describe_phantom(const PhantomKind& kind) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, phantom::Constant>) {
          os << "constant(" << p.level << ")";
        } else if constexpr (std::is_same_v<T, phantom::Quadrants>) {
          os << "quadrants(" << p.top_left << "," << p.top_right << "," << p.bottom_left << ","
             << p.bottom_right << ")";
        } else if constexpr (std::is_same_v<T, phantom::StepEdge>) {
          os << "step_edge(" << p.low << "," << p.high << ")";
        } else {
          os << "point_targets(" << p.background << "," << p.amplitude << "," << p.count << ")";
        }
      },
      kind);
  return os.str();
}

nlohmann::ordered_json cell(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double uncell(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::ConfigError, "unexpected value '" + s + "' in result JSON");
  }
  return v.get<double>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Markdown: return "markdown";
    case OutputFormat::Json: return "json";
  }
  return "?";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "markdown" || name == "md") return OutputFormat::Markdown;
  if (name == "json") return OutputFormat::Json;
  throw Error(ErrorKind::ConfigError, "unknown output format '" + std::string(name) + "'");
}

std::string describe(const FilterSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(spec.kind);
  switch (spec.kind) {
    case FilterKind::Frost:
      os << " r=" << spec.window_radius << " looks=" << spec.looks << " damping=" << spec.damping;
      break;
    case FilterKind::Lee:
    case FilterKind::Kuan:
      os << " r=" << spec.window_radius << " looks=" << spec.looks;
      break;
    case FilterKind::Median: os << " r=" << spec.window_radius; break;
    case FilterKind::Gaussian: os << " sigma_spatial=" << spec.sigma_spatial; break;
    case FilterKind::Bilateral:
      os << " sigma_spatial=" << spec.sigma_spatial << " sigma_range=";
      if (spec.sigma_range) {
        os << *spec.sigma_range;
      } else {
        os << "0.1*max_value";
      }
      break;
  }
  return os.str();
}

BenchConfig parse_bench_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
  reject_unknown(j, "", {"input", "reference", "synthetic", "filters", "region", "ssim",
                         "output_format", "output_path"});

  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  BenchConfig config;
  if (j.contains("input")) config.input = resolve(get_field<std::string>(j, "input", ""));
  if (j.contains("reference") && !j.at("reference").is_null()) {
    config.reference = resolve(get_field<std::string>(j, "reference", ""));
  }
  if (j.contains("synthetic")) config.synthetic = parse_synthetic(j.at("synthetic"));
  if (config.synthetic && (!config.input.empty() || config.reference)) {
    throw config_error("synthetic", "cannot be combined with input/reference paths");
  }
  if (!config.synthetic && config.input.empty()) {
    throw config_error("input", "missing (give an input path or a synthetic scene)");
  }
  if (!j.contains("filters") || !j.at("filters").is_array()) {
    throw config_error("filters", "expected an array");
  }
  const auto& filters = j.at("filters");
  for (std::size_t i = 0; i < filters.size(); ++i) {
    config.filters.push_back(parse_filter(filters[i], i));
  }
  if (j.contains("region") && !j.at("region").is_null()) {
    config.region = parse_region(j.at("region"), "region");
  }
  if (j.contains("ssim")) config.ssim = parse_ssim(j.at("ssim"));
  if (j.contains("output_format")) {
    try {
      config.output_format = parse_output_format(get_field<std::string>(j, "output_format", ""));
    } catch (const Error& e) {
      throw config_error("output_format", e.what());
    }
  }
  if (j.contains("output_path") && !j.at("output_path").is_null()) {
    config.output_path = resolve(get_field<std::string>(j, "output_path", ""));
  }
  validate(config);
  return config;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_bench_config(text.str(), path.parent_path());
}

void validate(const BenchConfig& config) {
  if (config.filters.empty()) throw config_error("filters", "at least one filter is required");
  std::set<std::string> labels;
  for (const auto& f : config.filters) {
    if (f.label.empty()) throw config_error("filters", "labels must be non-empty");
    if (!labels.insert(f.label).second) {
      throw config_error("filters", "duplicate label '" + f.label + "'");
    }
  }
}

BenchScene load_scene(const BenchConfig& config) {
  if (config.synthetic) {
    const auto& s = *config.synthetic;
    auto clean = make_phantom(s.width, s.height, s.phantom);
    auto noisy =
        apply_multiplicative(clean, generate_speckle_field(s.width, s.height, s.speckle));
    return {std::move(noisy), std::move(clean)};
  }
  BenchScene scene{read_image(config.input), std::nullopt};
  if (config.reference) scene.reference = read_image(*config.reference);
  return scene;
}

BenchResult run_benchmark(const BenchConfig& config) {
  validate(config);
  return run_benchmark(config, load_scene(config));
}

BenchResult run_benchmark(const BenchConfig& config, const BenchScene& scene) {
  validate(config);
  if (scene.reference) check_same_shape(*scene.reference, scene.input);

  BenchResult result;
  if (config.synthetic) {
    const auto& s = *config.synthetic;
    std::ostringstream os;
    os.precision(17);
    os << "synthetic:" << describe_phantom(s.phantom) << " " << s.width << "x" << s.height
       << " looks=" << s.speckle.looks << " seed=" << s.speckle.seed;
    result.provenance.input = os.str();
    result.provenance.reference = "synthetic:clean";
  } else {
    result.provenance.input = config.input.string();
    result.provenance.reference = config.reference ? config.reference->string() : "";
  }
  result.provenance.toolkit_version = kVersion;

  for (const auto& [label, spec] : config.filters) {
    MetricsReport report;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto filtered = apply_filter(scene.input, spec);
      report = evaluate_all(scene.reference, scene.input, filtered, config.region, config.ssim);
    } catch (const Error& e) {
      throw Error(e.kind(), "filter '" + label + "': " + e.what());
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.columns.push_back(label);
    result.values[0].push_back(report.psnr);
    result.values[1].push_back(report.mse);
    result.values[2].push_back(report.ssim);
    result.values[3].push_back(report.enl);
    result.values[4].push_back(report.ssi);
    result.provenance.filter_parameters.push_back(describe(spec));
    result.provenance.seconds.push_back(elapsed.count());
  }
  return result;
}

std::string render_table(const BenchResult& result, OutputFormat format) {
  std::string out;
  switch (format) {
    case OutputFormat::Csv: {
      out = "Metric";
      for (const auto& c : result.columns) out += "," + csv_field(c);
      out += "\n";
      for (std::size_t m = 0; m < kMetricRows.size(); ++m) {
        out += kMetricRows[m];
        for (double v : result.values[m]) out += "," + format_metric(v);
        out += "\n";
      }
      break;
    }
    case OutputFormat::Markdown: {
      out = "| Metric |";
      std::string rule = "|---|";
      for (const auto& c : result.columns) {
        out += " " + c + " |";
        rule += "---:|";
      }
      out += "\n" + rule + "\n";
      for (std::size_t m = 0; m < kMetricRows.size(); ++m) {
        out += "| " + std::string(kMetricRows[m]) + " |";
        for (double v : result.values[m]) out += " " + format_metric(v) + " |";
        out += "\n";
      }
      break;
    }
    case OutputFormat::Json: {
      nlohmann::ordered_json j;
      j["rows"] = nlohmann::ordered_json::array();
      for (auto r : kMetricRows) j["rows"].push_back(std::string(r));
      j["columns"] = result.columns;
      j["values"] = nlohmann::ordered_json::array();
      for (const auto& row : result.values) {
        auto cells = nlohmann::ordered_json::array();
        for (double v : row) cells.push_back(cell(v));
        j["values"].push_back(cells);
      }
      const auto& p = result.provenance;
      j["provenance"] = {{"input", p.input},
                         {"reference", p.reference},
                         {"toolkit_version", p.toolkit_version},
                         {"filter_parameters", p.filter_parameters},
                         {"seconds", p.seconds}};
      out = j.dump(2) + "\n";
      break;
    }
  }
  return out;
}

BenchResult parse_result_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed result JSON: ") + e.what());
  }
  BenchResult result;
  try {
    result.columns = j.at("columns").get<std::vector<std::string>>();
    const auto& values = j.at("values");
    if (values.size() != kMetricRows.size()) {
      throw Error(ErrorKind::ConfigError, "result JSON must have five metric rows");
    }
    for (std::size_t m = 0; m < kMetricRows.size(); ++m) {
      for (const auto& v : values[m]) result.values[m].push_back(uncell(v));
      if (result.values[m].size() != result.columns.size()) {
        throw Error(ErrorKind::ConfigError, "result JSON row length mismatch");
      }
    }
    const auto& p = j.at("provenance");
    result.provenance.input = p.at("input").get<std::string>();
    result.provenance.reference = p.at("reference").get<std::string>();
    result.provenance.toolkit_version = p.at("toolkit_version").get<std::string>();
    result.provenance.filter_parameters =
        p.at("filter_parameters").get<std::vector<std::string>>();
    result.provenance.seconds = p.at("seconds").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("invalid result JSON: ") + e.what());
  }
  return result;
}

}  // namespace despeckle
