#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "despeckle/filter_spec.hpp"
#include "despeckle/image.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/synth.hpp"

namespace despeckle {

enum class OutputFormat { Csv, Markdown, Json };

std::string_view to_string(OutputFormat format);
OutputFormat parse_output_format(std::string_view name);

struct LabeledFilter {
  std::string label;
  FilterSpec spec;
};

/// In-memory scene: clean phantom plus seeded speckle. Used instead of
/// input/reference paths so a config is self-contained.
struct SyntheticScene {
  std::size_t width = 256;
  std::size_t height = 256;
  PhantomKind phantom = phantom::Quadrants{60, 110, 160, 210};
  SpeckleParams speckle{1.0, 42};
};

struct BenchConfig {
  std::filesystem::path input;
  std::optional<std::filesystem::path> reference;
  std::optional<SyntheticScene> synthetic;
  std::vector<LabeledFilter> filters;
  std::optional<Region> region;
  SsimParams ssim;
  OutputFormat output_format = OutputFormat::Csv;
  std::optional<std::filesystem::path> output_path;
};

/// Parses a JSON config document. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the offending field.
BenchConfig parse_bench_config(std::string_view json_text,
                               const std::filesystem::path& base_dir = {});
BenchConfig load_bench_config(const std::filesystem::path& path);

/// Throws ConfigError for an empty filter list or duplicate labels.
void validate(const BenchConfig& config);

inline constexpr std::array<std::string_view, 5> kMetricRows = {
    "PSNR", "MSE", "SSIM", "ENL", "SSI"};

struct BenchProvenance {
  std::string input;
  std::string reference;
  std::string toolkit_version;
  std::vector<std::string> filter_parameters;
  std::vector<double> seconds;
};

struct BenchResult {
  std::vector<std::string> columns;
  /// values[metric][filter], metric order as kMetricRows.
  std::array<std::vector<double>, 5> values;
  BenchProvenance provenance;
};

/// Scene pair a benchmark runs on: the noisy input and optional clean truth.
struct BenchScene {
  ImageGrid input;
  std::optional<ImageGrid> reference;
};

BenchScene load_scene(const BenchConfig& config);

/// Applies each filter in config order and evaluates all metrics. Errors are
/// rethrown with the offending filter label in the message.
BenchResult run_benchmark(const BenchConfig& config);
BenchResult run_benchmark(const BenchConfig& config, const BenchScene& scene);

std::string render_table(const BenchResult& result, OutputFormat format);

/// Inverse of the JSON rendering (matrix, labels and provenance).
BenchResult parse_result_json(std::string_view json_text);

/// Human-readable one-line description of a spec, e.g. "lee r=3 looks=1".
std::string describe(const FilterSpec& spec);

}  // namespace despeckle
