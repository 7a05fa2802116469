#include "despeckle/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include <json.hpp>

#include "despeckle/filter_spec.hpp"
#include "despeckle/filters.hpp"

namespace despeckle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Sums each row independently (in parallel), then combines the row totals in
// row order, so the result does not depend on the worker count.
template <typename RowSum>
double ordered_row_sum(std::size_t rows, RowSum row_sum) {
  std::vector<double> partial(rows);
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < n; ++y) partial[y] = row_sum(static_cast<std::size_t>(y));
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

struct RegionMoments {
  double mean;
  double variance;
};

RegionMoments region_moments(const ImageGrid& grid, const std::optional<Region>& region) {
  const Region r = region.value_or(Region{0, 0, grid.width(), grid.height()});
  check_region(grid, r);
  const double n = static_cast<double>(r.w * r.h);
  CompensatedSum sum;
  for (std::size_t y = r.y; y < r.y + r.h; ++y) {
    for (double v : grid.row(y).subspan(r.x, r.w)) sum.add(v);
  }
  const double mean = sum.value() / n;
  CompensatedSum sq;
  for (std::size_t y = r.y; y < r.y + r.h; ++y) {
    for (double v : grid.row(y).subspan(r.x, r.w)) sq.add((v - mean) * (v - mean));
  }
  return {mean, sq.value() / n};
}

// Separable weighted window over one plane with symmetric padding.
std::vector<double> weighted_window(const std::vector<double>& plane, std::size_t width,
                                    std::size_t height, const std::vector<double>& taps) {
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto h = static_cast<std::ptrdiff_t>(height);
  std::vector<double> tmp(plane.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    const double* src = plane.data() + y * w;
    double* dst = tmp.data() + y * w;
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < taps.size(); ++t) {
        acc += taps[t] * src[reflect_index(x + static_cast<std::ptrdiff_t>(t) - radius, w)];
      }
      dst[x] = acc;
    }
  }
  std::vector<double> out(plane.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    double* dst = out.data() + y * w;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const double* src =
          tmp.data() + reflect_index(y + static_cast<std::ptrdiff_t>(t) - radius, h) * w;
      for (std::ptrdiff_t x = 0; x < w; ++x) dst[x] += taps[t] * src[x];
    }
  }
  return out;
}

std::vector<double> ssim_taps(std::size_t radius, double sigma) {
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = std::exp(-t * t / (2.0 * sigma * sigma));
    total += taps[i];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

}  // namespace

double mse(const ImageGrid& ref, const ImageGrid& test) {
  check_same_shape(ref, test);
  const double total = ordered_row_sum(ref.height(), [&](std::size_t y) {
    const auto a = ref.row(y);
    const auto b = test.row(y);
    double s = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) {
      const double d = a[x] - b[x];
      s += d * d;
    }
    return s;
  });
  return total / static_cast<double>(ref.size());
}

double psnr_from_mse(double mse_value, double max_value) {
  if (mse_value == 0.0) return kInf;
  return 10.0 * std::log10(max_value * max_value / mse_value);
}

double psnr(const ImageGrid& ref, const ImageGrid& test) {
  return psnr_from_mse(mse(ref, test), ref.max_value());
}

double ssim(const ImageGrid& ref, const ImageGrid& test, const SsimParams& params) {
  check_same_shape(ref, test);
  if (!(params.k1 > 0.0) || !(params.k2 > 0.0) || !(params.window_sigma > 0.0)) {
    throw Error(ErrorKind::InvalidParam, "ssim: k1, k2 and window_sigma must be > 0");
  }
  check_window(params.window_radius, ref.width(), ref.height());
  const double range = params.dynamic_range.value_or(ref.max_value());
  if (!(range > 0.0)) throw Error(ErrorKind::InvalidParam, "ssim: dynamic_range must be > 0");
  const double c1 = (params.k1 * range) * (params.k1 * range);
  const double c2 = (params.k2 * range) * (params.k2 * range);

  const auto taps = ssim_taps(params.window_radius, params.window_sigma);
  const std::size_t n = ref.size();
  const auto a = ref.pixels();
  const auto b = test.pixels();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = a[i] * a[i];
    yy[i] = b[i] * b[i];
    xy[i] = a[i] * b[i];
  }
  const std::size_t w = ref.width();
  const std::size_t h = ref.height();
  const auto mu_x = weighted_window({a.begin(), a.end()}, w, h, taps);
  const auto mu_y = weighted_window({b.begin(), b.end()}, w, h, taps);
  const auto e_xx = weighted_window(xx, w, h, taps);
  const auto e_yy = weighted_window(yy, w, h, taps);
  const auto e_xy = weighted_window(xy, w, h, taps);

  const double total = ordered_row_sum(h, [&](std::size_t y) {
    double s = 0.0;
    for (std::size_t i = y * w; i < (y + 1) * w; ++i) {
      const double mx = mu_x[i];
      const double my = mu_y[i];
      const double vx = e_xx[i] - mx * mx;
      const double vy = e_yy[i] - my * my;
      const double cov = e_xy[i] - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      s += num / den;
    }
    return s;
  });
  return total / static_cast<double>(n);
}

double enl(const ImageGrid& grid, const std::optional<Region>& region) {
  const auto m = region_moments(grid, region);
  if (m.variance == 0.0) {
    if (m.mean == 0.0) {
      throw Error(ErrorKind::DegenerateRegion, "enl: region is entirely zero");
    }
    return kInf;
  }
  return m.mean * m.mean / m.variance;
}

double ssi(const ImageGrid& original, const ImageGrid& filtered,
           const std::optional<Region>& region) {
  check_same_shape(original, filtered);
  const auto o = region_moments(original, region);
  const auto f = region_moments(filtered, region);
  if (f.mean == 0.0) throw Error(ErrorKind::DegenerateRegion, "ssi: filtered mean is zero");
  if (o.variance == 0.0) {
    throw Error(ErrorKind::DegenerateRegion, "ssi: original has zero variance");
  }
  return (std::sqrt(f.variance) / std::fabs(f.mean)) *
         (std::fabs(o.mean) / std::sqrt(o.variance));
}

MetricsReport evaluate_all(const std::optional<ImageGrid>& ref, const ImageGrid& original,
                           const ImageGrid& filtered, const std::optional<Region>& region,
                           const SsimParams& ssim_params) {
  check_same_shape(original, filtered);
  if (ref) check_same_shape(*ref, filtered);
  const ImageGrid& truth = ref ? *ref : original;
  MetricsReport report;
  report.mse = mse(truth, filtered);
  report.psnr = psnr_from_mse(report.mse, truth.max_value());
  report.ssim = ssim(truth, filtered, ssim_params);
  report.enl = enl(filtered, region);
  report.ssi = ssi(original, filtered, region);
  report.region = region;
  return report;
}

std::string format_metric(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

namespace {
nlohmann::json metric_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
}  // namespace

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["psnr"] = metric_json(r.psnr);
  j["mse"] = metric_json(r.mse);
  j["ssim"] = metric_json(r.ssim);
  j["enl"] = metric_json(r.enl);
  j["ssi"] = metric_json(r.ssi);
  if (r.region) {
    j["region"] = {{"x", r.region->x}, {"y", r.region->y}, {"w", r.region->w}, {"h", r.region->h}};
  } else {
    j["region"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string report_to_text(const MetricsReport& r) {
  std::string out;
  out += "psnr: " + format_metric(r.psnr) + "\n";
  out += "mse: " + format_metric(r.mse) + "\n";
  out += "ssim: " + format_metric(r.ssim) + "\n";
  out += "enl: " + format_metric(r.enl) + "\n";
  out += "ssi: " + format_metric(r.ssi) + "\n";
  if (r.region) {
    out += "region: " + std::to_string(r.region->x) + "," + std::to_string(r.region->y) + "," +
           std::to_string(r.region->w) + "," + std::to_string(r.region->h) + "\n";
  }
  return out;
}

}  // namespace despeckle
