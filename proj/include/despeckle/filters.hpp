#pragma once

#include <vector>

#include "despeckle/filter_spec.hpp"
#include "despeckle/image.hpp"

namespace despeckle {

// Parallel kernels. Rows are distributed across OpenMP workers; each pixel
// reads only the immutable input and accumulates in a fixed order, so the
// output does not depend on the worker count.

ImageGrid lee_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid kuan_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid frost_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid gaussian_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid median_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid bilateral_filter(const ImageGrid& grid, const FilterSpec& spec);

/// Dispatches on spec.kind.
ImageGrid apply_filter(const ImageGrid& grid, const FilterSpec& spec);

/// Normalized 1-D Gaussian taps over [-ceil(3 sigma), +ceil(3 sigma)].
std::vector<double> gaussian_kernel_1d(double sigma);

namespace detail {

// Adaptive gains shared by the Lee and Kuan kernels and their references.
// `noise_var` is C_u^2; `mean` and `var` are window statistics.
double lee_gain(double mean, double var, double noise_var) noexcept;
double kuan_gain(double mean, double var, double noise_var) noexcept;

/// (1 - w) * mean + w * value: exact at w = 0 and w = 1.
inline double blend(double mean, double value, double w) noexcept {
  return (1.0 - w) * mean + w * value;
}

/// Squared coefficient of variation v / mu^2, 0 when mu == 0.
inline double squared_cv(double mean, double var) noexcept {
  return mean == 0.0 ? 0.0 : var / (mean * mean);
}

}  // namespace detail

}  // namespace despeckle
