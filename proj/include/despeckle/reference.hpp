#pragma once

#include "despeckle/filter_spec.hpp"
#include "despeckle/image.hpp"
#include "despeckle/local_stats.hpp"

/// Serial per-pixel reference implementations. Every window is gathered
/// explicitly with its own padding logic and no code is shared with the
/// parallel kernels. Used by tests and the kernel benchmark, not by the
/// toolkit itself.
namespace despeckle::reference {

LocalStats local_stats(const ImageGrid& grid, std::size_t radius);

ImageGrid lee_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid kuan_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid frost_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid gaussian_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid median_filter(const ImageGrid& grid, const FilterSpec& spec);
ImageGrid bilateral_filter(const ImageGrid& grid, const FilterSpec& spec);

ImageGrid apply_filter(const ImageGrid& grid, const FilterSpec& spec);

}  // namespace despeckle::reference
