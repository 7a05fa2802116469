#pragma once

#include <optional>
#include <string>

#include "despeckle/image.hpp"

namespace despeckle {

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  std::size_t window_radius = 5;
  double window_sigma = 1.5;
  /// Defaults to the reference image's max_value.
  std::optional<double> dynamic_range;
};

/// The five quality figures for one filtered image. psnr and enl use
/// +infinity as the "identical" / "perfectly flat" sentinel.
struct MetricsReport {
  double psnr = 0.0;
  double mse = 0.0;
  double ssim = 0.0;
  double enl = 0.0;
  double ssi = 0.0;
  std::optional<Region> region;
};

/// Mean squared difference. Rows are summed independently and combined in
/// row order with compensated summation, so the result is thread-invariant.
double mse(const ImageGrid& ref, const ImageGrid& test);

/// 10 log10(MAX^2 / mse) with MAX = ref.max_value(); +inf when mse == 0.
double psnr(const ImageGrid& ref, const ImageGrid& test);
double psnr_from_mse(double mse, double max_value);

/// Mean of the local SSIM map (Gaussian window, symmetric padding).
double ssim(const ImageGrid& ref, const ImageGrid& test,
            const SsimParams& params = {});

/// mu^2 / sigma^2 over `region` (whole image by default).
double enl(const ImageGrid& grid, const std::optional<Region>& region = std::nullopt);

/// CV(filtered) / CV(original) over the same region.
double ssi(const ImageGrid& original, const ImageGrid& filtered,
           const std::optional<Region>& region = std::nullopt);

/// PSNR/MSE/SSIM against `ref` when given, otherwise against `original`;
/// ENL on `filtered`; SSI on (original, filtered).
MetricsReport evaluate_all(const std::optional<ImageGrid>& ref,
                           const ImageGrid& original, const ImageGrid& filtered,
                           const std::optional<Region>& region,
                           const SsimParams& ssim_params = {});

/// Fixed six-decimal rendering; infinities print as "inf".
std::string format_metric(double value);

/// Flat {psnr, mse, ssim, enl, ssi, region} JSON object.
std::string report_to_json(const MetricsReport& report);

/// One "name: value" line per metric.
std::string report_to_text(const MetricsReport& report);

}  // namespace despeckle
