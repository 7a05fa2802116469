#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "despeckle/image.hpp"

namespace despeckle {

struct SpeckleParams {
  double looks = 1.0;
  std::uint64_t seed = 0;
};

/// Unit-mean Gamma(L, 1/L) intensity speckle, max_value 1.0.
///
/// Each row draws from its own mt19937_64 stream seeded from (seed, row), so
/// the field is identical for any worker count. Samples come from
/// std::gamma_distribution (libstdc++ uses Marsaglia-Tsang), which makes the
/// field reproducible within one standard library build but not across them.
ImageGrid generate_speckle_field(std::size_t width, std::size_t height,
                                 const SpeckleParams& params);

/// Pixelwise clean * field; keeps clean's max_value.
ImageGrid apply_multiplicative(const ImageGrid& clean, const ImageGrid& field);

namespace phantom {
struct Constant {
  double level = 0.0;
};
struct Quadrants {
  double top_left = 0.0;
  double top_right = 0.0;
  double bottom_left = 0.0;
  double bottom_right = 0.0;
};
struct StepEdge {
  double low = 0.0;
  double high = 0.0;
};
struct PointTargets {
  double background = 0.0;
  double amplitude = 0.0;
  std::size_t count = 1;
};
}  // namespace phantom

using PhantomKind = std::variant<phantom::Constant, phantom::Quadrants,
                                 phantom::StepEdge, phantom::PointTargets>;

/// Ground-truth scene with max_value 255.
ImageGrid make_phantom(std::size_t width, std::size_t height,
                       const PhantomKind& kind);

}  // namespace despeckle
