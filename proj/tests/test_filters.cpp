#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "despeckle/filters.hpp"
#include "despeckle/local_stats.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/parallel.hpp"
#include "despeckle/reference.hpp"
#include "despeckle/synth.hpp"
#include "test_support.hpp"

using namespace despeckle;

namespace {

const ImageGrid kBump(3, 3, {10, 10, 10, 10, 20, 10, 10, 10, 10}, 255.0);

FilterSpec spec_of(FilterKind kind) { return FilterSpec::defaults(kind); }

FilterSpec windowed(FilterKind kind, std::size_t r, double looks = 1.0) {
  auto s = FilterSpec::defaults(kind);
  s.window_radius = r;
  s.looks = looks;
  return s;
}

ErrorKind error_kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::IoError;
}

const std::vector<FilterKind> kAllKinds = {FilterKind::Lee,      FilterKind::Frost,
                                           FilterKind::Kuan,     FilterKind::Gaussian,
                                           FilterKind::Median,   FilterKind::Bilateral};

}  // namespace

TEST_CASE("local_stats on the 3x3 bump") {
  const auto s = local_stats(kBump, 1);
  CHECK(s.mean[4] == doctest::Approx(100.0 / 9.0).epsilon(1e-12));
  CHECK(s.variance[4] == doctest::Approx(1200.0 / 9.0 - (100.0 / 9.0) * (100.0 / 9.0)).epsilon(1e-9));
  CHECK(s.variance[4] == doctest::Approx(9.8765432).epsilon(1e-7));
}

TEST_CASE("local_stats of a constant grid") {
  const auto g = ImageGrid::filled(9, 7, 0.1, 1.0);
  const auto s = local_stats(g, 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(s.mean[i] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(s.variance[i] >= 0.0);
    CHECK(s.variance[i] < 1e-15);
  }
}

TEST_CASE("local_stats matches the per-window reference") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = testing::random_grid(16 + seed % 5, 13, seed, 0, 1000, 1000);
    for (std::size_t r : {1u, 2u, 4u}) {
      const auto fast = local_stats(g, r);
      const auto slow = reference::local_stats(g, r);
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::fabs(fast.mean[i] - slow.mean[i]) <= 1e-9 * std::fabs(slow.mean[i]));
        CHECK(std::fabs(fast.variance[i] - slow.variance[i]) <= 1e-9 * slow.variance[i] + 1e-9);
      }
    }
  }
}

TEST_CASE("local_stats rejects oversized windows") {
  CHECK(error_kind_of([] { local_stats(ImageGrid::filled(4, 9, 1, 1), 2); }) ==
        ErrorKind::WindowTooLarge);
}

TEST_CASE("Lee") {
  CHECK(lee_filter(kBump, windowed(FilterKind::Lee, 1, 4)).at(1, 1) ==
        doctest::Approx(100.0 / 9.0).epsilon(1e-12));
  const auto g = testing::random_grid(12, 12, 3);
  CHECK(lee_filter(g, windowed(FilterKind::Lee, 2, INFINITY)) == g);
  CHECK(detail::lee_gain(0.0, 0.0, 0.25) == 0.0);
}

TEST_CASE("Kuan") {
  CHECK(kuan_filter(kBump, windowed(FilterKind::Kuan, 1, 4)).at(1, 1) ==
        doctest::Approx(100.0 / 9.0).epsilon(1e-12));
  const auto g = testing::random_grid(12, 12, 4);
  CHECK(kuan_filter(g, windowed(FilterKind::Kuan, 2, INFINITY)) == g);
  // Strong texture: raw gain is clamped at 1.
  CHECK(detail::kuan_gain(1.0, 100.0, 0.01) == doctest::Approx((1 - 0.0001) / 1.01));
  CHECK(detail::kuan_gain(0.0, 5.0, 0.25) == 0.0);
}

TEST_CASE("Frost") {
  auto spec = windowed(FilterKind::Frost, 1);
  spec.damping = 2.0;
  // Brute-force value of the exponential-kernel formula on the bump.
  CHECK(frost_filter(kBump, spec).at(1, 1) == doctest::Approx(11.316036604402145).epsilon(1e-12));

  spec.damping = 1e6;
  const auto g = testing::random_grid(16, 16, 5, 50, 200);
  CHECK(testing::max_abs_diff(frost_filter(g, spec), g) <= 1e-6);
}

TEST_CASE("Gaussian kernel taps") {
  const auto k = gaussian_kernel_1d(1.0);
  REQUIRE(k.size() == 7);
  const double expected[] = {0.00443305, 0.05400558, 0.24203623, 0.39905028,
                             0.24203623, 0.05400558, 0.00443305};
  for (std::size_t i = 0; i < 7; ++i) CHECK(k[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  CHECK(gaussian_kernel_1d(0.5).size() == 5);
  CHECK(gaussian_kernel_1d(2.0).size() == 13);
}

TEST_CASE("Gaussian conserves an interior impulse") {
  std::vector<double> px(21 * 21, 0.0);
  px[10 * 21 + 10] = 1.0;
  const ImageGrid impulse(21, 21, px, 1.0);
  const auto out = gaussian_filter(impulse, spec_of(FilterKind::Gaussian));
  double total = 0.0;
  for (double v : out.pixels()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.at(10, 10) == doctest::Approx(0.39905028 * 0.39905028).epsilon(1e-6));
}

TEST_CASE("Gaussian rejects a negative sigma") {
  auto spec = spec_of(FilterKind::Gaussian);
  spec.sigma_spatial = -1.0;
  CHECK(error_kind_of([&] { apply_filter(kBump, spec); }) == ErrorKind::InvalidParam);
}

TEST_CASE("Median") {
  const ImageGrid spike(3, 3, {0, 0, 0, 0, 255, 0, 0, 0, 0}, 255);
  CHECK(median_filter(spike, spec_of(FilterKind::Median)) == ImageGrid::filled(3, 3, 0, 255));
  // A 3x3 window cannot fit a 1x3 image.
  CHECK(error_kind_of([] {
          median_filter(ImageGrid(3, 1, {1, 2, 9}, 255), FilterSpec::defaults(FilterKind::Median));
        }) == ErrorKind::WindowTooLarge);

  SUBCASE("padding duplicates edge pixels") {
    // Corner window of [[1,2,9],[1,2,9],[1,2,9]] is {1,1,2}x3 -> 1.
    const ImageGrid cols(3, 3, {1, 2, 9, 1, 2, 9, 1, 2, 9}, 255);
    const auto out = median_filter(cols, spec_of(FilterKind::Median));
    CHECK(out.at(0, 0) == 1);
    CHECK(out.at(1, 1) == 2);
    CHECK(out.at(2, 2) == 9);
  }
  SUBCASE("histogram and selection paths agree with the reference") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto ints = testing::random_integer_grid(17, 15, seed);
      const auto reals = testing::random_grid(17, 15, seed);
      for (std::size_t r : {1u, 3u}) {
        const auto spec = windowed(FilterKind::Median, r);
        CHECK(median_filter(ints, spec) == reference::median_filter(ints, spec));
        CHECK(median_filter(reals, spec) == reference::median_filter(reals, spec));
      }
    }
  }
}

TEST_CASE("Bilateral") {
  auto spec = spec_of(FilterKind::Bilateral);
  spec.sigma_spatial = 1.0;
  spec.sigma_range = 10.0;
  const ImageGrid edge(4, 1, {0, 0, 255, 255}, 255);
  const auto out = bilateral_filter(edge, spec);
  for (std::size_t x = 0; x < 4; ++x) CHECK(std::fabs(out.at(x, 0) - edge.at(x, 0)) <= 0.01);

  spec.sigma_range = 1e12 * 255.0;
  const auto g = testing::random_grid(20, 20, 9);
  auto gauss = spec_of(FilterKind::Gaussian);
  gauss.sigma_spatial = 1.0;
  CHECK(testing::max_abs_diff(bilateral_filter(g, spec), gaussian_filter(g, gauss)) <= 1e-6);

  SUBCASE("default range sigma scales with max_value") {
    FilterSpec d = spec_of(FilterKind::Bilateral);
    FilterSpec explicit_spec = d;
    explicit_spec.sigma_range = 25.5;
    CHECK(bilateral_filter(g, d) == bilateral_filter(g, explicit_spec));
  }
}

TEST_CASE("apply_filter dispatch and spec checks") {
  CHECK(apply_filter(ImageGrid::filled(5, 5, 3, 255), spec_of(FilterKind::Median)) ==
        ImageGrid::filled(5, 5, 3, 255));
  CHECK(error_kind_of([] { lee_filter(kBump, FilterSpec::defaults(FilterKind::Kuan)); }) ==
        ErrorKind::InvalidParam);
  CHECK(error_kind_of([] { apply_filter(kBump, FilterSpec::defaults(FilterKind::Lee)); }) ==
        ErrorKind::WindowTooLarge);
  auto bad = spec_of(FilterKind::Frost);
  bad.damping = 0;
  CHECK(error_kind_of([&] { apply_filter(testing::random_grid(9, 9, 1), bad); }) ==
        ErrorKind::InvalidParam);
  auto zero_looks = spec_of(FilterKind::Lee);
  zero_looks.looks = 0;
  CHECK(error_kind_of([&] { apply_filter(testing::random_grid(9, 9, 1), zero_looks); }) ==
        ErrorKind::InvalidParam);
}

TEST_CASE("Lee improves PSNR on a speckled phantom") {
  const auto clean = make_phantom(256, 256, phantom::Quadrants{60, 110, 160, 210});
  const auto noisy = apply_multiplicative(clean, generate_speckle_field(256, 256, {1.0, 42}));
  const auto filtered = apply_filter(noisy, windowed(FilterKind::Lee, 3, 1.0));
  CHECK(psnr(clean, filtered) > psnr(clean, noisy));
}

TEST_CASE("every filter preserves shape and max_value") {
  const ImageGrid g = testing::random_grid(13, 9, 2, 0, 1000, 1000);
  for (auto kind : kAllKinds) {
    const auto out = apply_filter(g, spec_of(kind));
    CHECK(out.width() == 13);
    CHECK(out.height() == 9);
    CHECK(out.max_value() == 1000);
  }
}

TEST_CASE("range sanity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = testing::random_grid(16, 16, seed, 10, 240);
    const auto [lo, hi] = std::minmax_element(g.pixels().begin(), g.pixels().end());
    for (auto kind : {FilterKind::Frost, FilterKind::Gaussian, FilterKind::Bilateral}) {
      const auto out = apply_filter(g, spec_of(kind));
      for (double v : out.pixels()) {
        CHECK(v >= *lo - 1e-9);
        CHECK(v <= *hi + 1e-9);
      }
    }
    const std::set<double> values(g.pixels().begin(), g.pixels().end());
    const auto med = apply_filter(g, windowed(FilterKind::Median, 2));
    for (double v : med.pixels()) {
      CHECK(values.count(v) == 1);
    }
  }
}

TEST_CASE("interior translation equivariance") {
  const std::size_t dx = 3, dy = 2;
  const auto big = testing::random_grid(40, 36, 77, 20, 220);
  std::vector<double> shifted_px;
  const std::size_t w = big.width() - dx, h = big.height() - dy;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) shifted_px.push_back(big.at(x + dx, y + dy));
  }
  const ImageGrid shifted(w, h, shifted_px, 255.0);
  for (auto kind : kAllKinds) {
    const auto spec = spec_of(kind);
    const std::size_t margin =
        (kind == FilterKind::Gaussian || kind == FilterKind::Bilateral)
            ? gaussian_radius(spec.sigma_spatial)
            : spec.window_radius;
    const auto a = apply_filter(big, spec);
    const auto b = apply_filter(shifted, spec);
    for (std::size_t y = margin; y + margin < h; ++y) {
      for (std::size_t x = margin; x + margin < w; ++x) {
        CHECK(std::fabs(a.at(x + dx, y + dy) - b.at(x, y)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("output does not depend on the worker count") {
  const auto g = testing::random_grid(67, 53, 8);
  for (auto kind : kAllKinds) {
    set_thread_count(1);
    const auto serial = apply_filter(g, spec_of(kind));
    set_thread_count(4);
    const auto parallel = apply_filter(g, spec_of(kind));
    CHECK(serial == parallel);
  }
  set_thread_count(0);
}
