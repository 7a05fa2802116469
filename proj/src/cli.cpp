#include "despeckle/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include "despeckle/bench.hpp"
#include "despeckle/filters.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/parallel.hpp"
#include "despeckle/raster.hpp"
#include "despeckle/synth.hpp"
#include "despeckle/version.hpp"

namespace despeckle::cli {

namespace {

// Thrown for flag combinations CLI11 cannot express; maps to exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IoError:
    case ErrorKind::CorruptFile:
    case ErrorKind::UnsupportedFormat: return kExitIo;
    default: return kExitValidation;
  }
}

Region parse_region_flag(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--region: '" + item + "' is not a non-negative integer");
    }
  }
  if (parts.size() != 4) throw UsageError("--region expects x,y,w,h");
  return Region{parts[0], parts[1], parts[2], parts[3]};
}

RasterFormat output_format(const std::optional<std::string>& flag,
                           const std::filesystem::path& path, const ImageGrid& grid) {
  if (flag) {
    try {
      return parse_raster_format(*flag);
    } catch (const Error& e) {
      throw UsageError(std::string("--format: ") + e.what());
    }
  }
  return output_format_for(path, grid);
}

struct GlobalFlags {
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

struct ConvertFlags {
  std::string input;
  std::string output;
  std::optional<std::string> format;
  std::optional<std::string> quantize;
};

int cmd_convert(const ConvertFlags& f) {
  auto grid = read_image(f.input);
  std::optional<RasterFormat> target;
  if (f.format) target = output_format(f.format, f.output, grid);
  if (f.quantize) {
    grid = quantize_for_display(grid, *f.quantize == "clamp" ? QuantizeMode::Clamp
                                                            : QuantizeMode::MinMax);
    const auto fmt = target ? *target : format_from_extension(f.output);
    if (fmt == RasterFormat::PNG8 || fmt == RasterFormat::PGM) grid = rescale_to_8bit(grid);
  }
  const auto fmt = target ? *target : output_format_for(f.output, grid);
  write_image(grid, f.output, fmt);
  return kExitOk;
}

struct SpeckleFlags {
  std::string input;
  std::string output;
  double looks = 1.0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
};

int cmd_speckle(const SpeckleFlags& f, const GlobalFlags& g) {
  if (!(f.looks > 0.0) || !std::isfinite(f.looks)) {
    throw UsageError("--looks must be finite and > 0");
  }
  const auto clean = read_image(f.input);
  const SpeckleParams params{f.looks, f.seed.value_or(g.seed.value_or(0))};
  const auto noisy = apply_multiplicative(
      clean, generate_speckle_field(clean.width(), clean.height(), params));
  write_image(noisy, f.output, output_format(f.format, f.output, noisy));
  return kExitOk;
}

struct FilterFlags {
  std::string input;
  std::string output;
  std::string method;
  CLI::Option* window = nullptr;
  CLI::Option* looks = nullptr;
  CLI::Option* damping = nullptr;
  CLI::Option* sigma_spatial = nullptr;
  CLI::Option* sigma_range = nullptr;
  std::size_t window_side = 0;
  double looks_value = 1.0;
  double damping_value = 2.0;
  double sigma_spatial_value = 1.0;
  double sigma_range_value = 0.0;
  std::optional<std::string> format;
};

FilterSpec build_spec(const FilterFlags& f) {
  FilterKind kind;
  try {
    kind = parse_filter_kind(f.method);
  } catch (const Error&) {
    throw UsageError("--method: unknown filter '" + f.method + "'");
  }
  const bool windowed = kind == FilterKind::Lee || kind == FilterKind::Kuan ||
                        kind == FilterKind::Frost || kind == FilterKind::Median;
  const bool adaptive =
      kind == FilterKind::Lee || kind == FilterKind::Kuan || kind == FilterKind::Frost;
  const bool spatial = kind == FilterKind::Gaussian || kind == FilterKind::Bilateral;
  const auto reject = [&](const CLI::Option* opt, bool relevant) {
    if (opt->count() > 0 && !relevant) {
      throw UsageError(opt->get_name() + " does not apply to --method " + f.method);
    }
  };
  reject(f.window, windowed);
  reject(f.looks, adaptive);
  reject(f.damping, kind == FilterKind::Frost);
  reject(f.sigma_spatial, spatial);
  reject(f.sigma_range, kind == FilterKind::Bilateral);

  auto spec = FilterSpec::defaults(kind);
  if (f.window->count() > 0) {
    if (f.window_side < 3 || f.window_side % 2 == 0) {
      throw UsageError("--window must be an odd window side >= 3");
    }
    spec.window_radius = (f.window_side - 1) / 2;
  }
  if (f.looks->count() > 0) spec.looks = f.looks_value;
  if (f.damping->count() > 0) spec.damping = f.damping_value;
  if (f.sigma_spatial->count() > 0) spec.sigma_spatial = f.sigma_spatial_value;
  if (f.sigma_range->count() > 0) spec.sigma_range = f.sigma_range_value;
  return spec;
}

int cmd_filter(const FilterFlags& f) {
  const auto spec = build_spec(f);
  validate(spec);
  const auto grid = read_image(f.input);
  const auto filtered = apply_filter(grid, spec);
  write_image(filtered, f.output, output_format(f.format, f.output, filtered));
  return kExitOk;
}

struct MetricsFlags {
  std::string test;
  std::optional<std::string> ref;
  std::optional<std::string> original;
  std::optional<std::string> region;
  bool json = false;
};

int cmd_metrics(const MetricsFlags& f, std::ostream& out) {
  if (!f.ref && !f.original) throw UsageError("metrics needs --ref or --original");
  const std::optional<Region> region =
      f.region ? std::optional<Region>(parse_region_flag(*f.region)) : std::nullopt;
  const auto test = read_image(f.test);
  std::optional<ImageGrid> ref;
  if (f.ref) ref = read_image(*f.ref);
  const auto original = f.original ? read_image(*f.original) : *ref;
  const auto report = evaluate_all(ref, original, test, region);
  out << (f.json ? report_to_json(report) : report_to_text(report));
  return kExitOk;
}

struct BenchFlags {
  std::string config;
  std::optional<std::string> output;
  std::optional<std::string> format;
};

int cmd_bench(const BenchFlags& f, const GlobalFlags& g, std::ostream& out, std::ostream& err) {
  auto config = load_bench_config(f.config);
  if (f.format) {
    try {
      config.output_format = parse_output_format(*f.format);
    } catch (const Error& e) {
      throw UsageError(std::string("--format: ") + e.what());
    }
  }
  if (f.output) config.output_path = *f.output;
  if (g.seed && config.synthetic) config.synthetic->speckle.seed = *g.seed;

  const auto result = run_benchmark(config);
  for (std::size_t i = 0; i < result.columns.size(); ++i) {
    err << "[bench] " << result.columns[i] << ": " << result.provenance.seconds[i] << " s\n";
  }
  const auto text = render_table(result, config.output_format);
  if (config.output_path) {
    atomic_write_file(*config.output_path, text);
  } else {
    out << text;
  }
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speckle filtering and quality metrics for SAR-style rasters", "despeckle"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GlobalFlags global;
  app.add_option("--threads", global.threads, "Worker threads (0 = auto)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", global.seed, "Random seed for speckle generation");

  ConvertFlags convert;
  auto* convert_cmd = app.add_subcommand("convert", "Convert between raster formats");
  convert_cmd->add_option("input", convert.input, "Input raster")->required();
  convert_cmd->add_option("output", convert.output, "Output raster")->required();
  convert_cmd->add_option("--format", convert.format, "Output format: png8|png16|pgm|sgrid");
  convert_cmd->add_option("--quantize", convert.quantize, "Map values for display")
      ->check(CLI::IsMember({"clamp", "minmax"}));

  SpeckleFlags speckle;
  auto* speckle_cmd = app.add_subcommand("speckle", "Apply seeded multiplicative speckle");
  speckle_cmd->add_option("input", speckle.input, "Clean raster")->required();
  speckle_cmd->add_option("output", speckle.output, "Noisy raster")->required();
  speckle_cmd->add_option("--looks", speckle.looks, "Number of looks L (> 0)");
  speckle_cmd->add_option("--seed", speckle.seed, "Random seed");
  speckle_cmd->add_option("--format", speckle.format, "Output format: png8|png16|pgm|sgrid");

  FilterFlags filter;
  auto* filter_cmd = app.add_subcommand("filter", "Apply a despeckling filter");
  filter_cmd->add_option("input", filter.input, "Input raster")->required();
  filter_cmd->add_option("output", filter.output, "Output raster")->required();
  filter_cmd->add_option("--method", filter.method, "lee|frost|kuan|gaussian|median|bilateral")
      ->required();
  filter.window = filter_cmd->add_option("--window", filter.window_side,
                                         "Odd window side (3 = 3x3)");
  filter.looks = filter_cmd->add_option("--looks", filter.looks_value, "Number of looks L");
  filter.damping = filter_cmd->add_option("--damping", filter.damping_value, "Frost damping D");
  filter.sigma_spatial = filter_cmd->add_option("--sigma-spatial", filter.sigma_spatial_value,
                                                "Spatial sigma in pixels");
  filter.sigma_range = filter_cmd->add_option("--sigma-range", filter.sigma_range_value,
                                              "Range sigma in pixel-value units");
  filter_cmd->add_option("--format", filter.format, "Output format: png8|png16|pgm|sgrid");

  MetricsFlags metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Print PSNR/MSE/SSIM/ENL/SSI");
  metrics_cmd->add_option("test", metrics.test, "Filtered raster")->required();
  metrics_cmd->add_option("--ref", metrics.ref, "Clean reference raster");
  metrics_cmd->add_option("--original", metrics.original, "Unfiltered raster");
  metrics_cmd->add_option("--region", metrics.region, "ENL/SSI region x,y,w,h");
  metrics_cmd->add_flag("--json", metrics.json, "Emit JSON");

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark config");
  bench_cmd->add_option("config", bench.config, "Benchmark config JSON")->required();
  bench_cmd->add_option("--output", bench.output, "Write the table here instead of stdout");
  bench_cmd->add_option("--format", bench.format, "csv|markdown|json");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "despeckle: error: " << e.what() << "\n";
    return kExitValidation;
  }

  set_thread_count(global.threads);
  try {
    if (*convert_cmd) return cmd_convert(convert);
    if (*speckle_cmd) return cmd_speckle(speckle, global);
    if (*filter_cmd) return cmd_filter(filter);
    if (*metrics_cmd) return cmd_metrics(metrics, out);
    if (*bench_cmd) return cmd_bench(bench, global, out, err);
  } catch (const UsageError& e) {
    err << "despeckle: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "despeckle: error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return kExitValidation;
}

}  // namespace despeckle::cli
