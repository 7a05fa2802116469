#pragma once

#include <cstddef>
#include <vector>

#include "despeckle/filter_spec.hpp"
#include "despeckle/image.hpp"
#include <string>

namespace despeckle::detail {

/// Grid extended by `pad` pixels on each side with symmetric padding.
struct PaddedGrid {
  std::size_t width = 0;   // padded width
  std::size_t height = 0;  // padded height
  std::size_t pad = 0;
  std::vector<double> pixels;

  const double* row(std::size_t y) const noexcept { return pixels.data() + y * width; }
};

PaddedGrid pad_symmetric(const ImageGrid& grid, std::size_t pad, double shift = 0.0);

inline void require_kind(const FilterSpec& spec, FilterKind kind) {
  if (spec.kind != kind) {
    throw Error(ErrorKind::InvalidParam, "filter spec is for " +
                                             std::string(to_string(spec.kind)) +
                                             ", expected " + std::string(to_string(kind)));
  }
}

}  // namespace despeckle::detail
