#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "despeckle/cli.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/raster.hpp"
#include "despeckle/synth.hpp"
#include "test_support.hpp"

using namespace despeckle;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run despeckle_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "despeckle");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const ImageGrid kBump(3, 3, {10, 10, 10, 10, 20, 10, 10, 10, 10}, 255.0);

}  // namespace

TEST_CASE("convert") {
  const auto dir = testing::scratch_dir("cli_convert");
  write_image(ImageGrid(3, 1, {0.25, 0.5, 0.75}, 1.0), dir / "s.sgrid", RasterFormat::SGRID);
  REQUIRE(despeckle_cli({"convert", (dir / "s.sgrid").string(), (dir / "s.png").string(),
                         "--quantize", "minmax"})
              .code == 0);
  CHECK(read_image(dir / "s.png") == ImageGrid(3, 1, {0, 128, 255}, 255));

  SUBCASE("integer round trip through SGRID") {
    const auto g = testing::random_integer_grid(9, 7, 2);
    write_image(g, dir / "a.png", RasterFormat::PNG8);
    CHECK(despeckle_cli({"convert", (dir / "a.png").string(), (dir / "b.sgrid").string()}).code == 0);
    CHECK(despeckle_cli({"convert", (dir / "b.sgrid").string(), (dir / "c.png").string()}).code == 0);
    CHECK(slurp(dir / "a.png") == slurp(dir / "c.png"));
  }
  SUBCASE("missing input") {
    const auto r = despeckle_cli({"convert", (dir / "nope.png").string(), (dir / "x.png").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.png") != std::string::npos);
  }
  SUBCASE("out-of-range export is a validation error with no partial file") {
    write_image(ImageGrid(1, 1, {300.5}, 255), dir / "hot.sgrid", RasterFormat::SGRID);
    CHECK(despeckle_cli({"convert", (dir / "hot.sgrid").string(), (dir / "hot.png").string()}).code == 1);
    CHECK_FALSE(fs::exists(dir / "hot.png"));
  }
}

TEST_CASE("speckle") {
  const auto dir = testing::scratch_dir("cli_speckle");
  write_image(make_phantom(256, 256, phantom::Constant{100}), dir / "c.sgrid", RasterFormat::SGRID);
  const auto in = (dir / "c.sgrid").string();
  REQUIRE(despeckle_cli({"speckle", in, (dir / "n1.sgrid").string(), "--looks", "4", "--seed", "42"}).code == 0);
  REQUIRE(despeckle_cli({"speckle", in, (dir / "n2.sgrid").string(), "--looks", "4", "--seed", "42"}).code == 0);
  CHECK(slurp(dir / "n1.sgrid") == slurp(dir / "n2.sgrid"));
  REQUIRE(despeckle_cli({"--seed", "42", "speckle", in, (dir / "n3.sgrid").string(), "--looks", "4"}).code == 0);
  CHECK(slurp(dir / "n1.sgrid") == slurp(dir / "n3.sgrid"));

  const double e = enl(read_image(dir / "n1.sgrid"));
  CHECK(e >= 3.6);
  CHECK(e <= 4.4);

  CHECK(despeckle_cli({"speckle", in, (dir / "z.sgrid").string(), "--looks", "0"}).code == 1);
}

TEST_CASE("filter") {
  const auto dir = testing::scratch_dir("cli_filter");
  write_image(kBump, dir / "bump.sgrid", RasterFormat::SGRID);
  const auto in = (dir / "bump.sgrid").string();
  REQUIRE(despeckle_cli({"filter", in, (dir / "lee.sgrid").string(), "--method", "lee",
                         "--window", "3", "--looks", "4"})
              .code == 0);
  CHECK(read_image(dir / "lee.sgrid").at(1, 1) == doctest::Approx(11.1111).epsilon(1e-5));

  const auto rejected = despeckle_cli(
      {"filter", in, (dir / "m.sgrid").string(), "--method", "median", "--sigma-range", "5"});
  CHECK(rejected.code == 1);
  CHECK(rejected.err.find("--sigma-range") != std::string::npos);

  write_image(ImageGrid::filled(8, 8, 77, 255), dir / "flat.png", RasterFormat::PNG8);
  REQUIRE(despeckle_cli({"filter", (dir / "flat.png").string(), (dir / "g.png").string(),
                         "--method", "gaussian", "--sigma-spatial", "1.0"})
              .code == 0);
  CHECK(read_image(dir / "g.png") == ImageGrid::filled(8, 8, 77, 255));

  CHECK(despeckle_cli({"filter", in, (dir / "w.sgrid").string(), "--method", "lee", "--window", "5"}).code == 1);
  CHECK(despeckle_cli({"filter", in, (dir / "w.sgrid").string(), "--method", "lee", "--window", "4"}).code == 1);
  CHECK(despeckle_cli({"filter", in, (dir / "w.sgrid").string(), "--method", "gaussian",
                       "--sigma-spatial", "-1"}).code == 1);
  CHECK(despeckle_cli({"filter", in, (dir / "w.sgrid").string(), "--method", "wiener"}).code == 1);
  CHECK(despeckle_cli({"filter", in, (dir / "w.sgrid").string(), "--method", "lee", "--bogus"}).code == 1);
  CHECK_FALSE(fs::exists(dir / "w.sgrid"));
}

TEST_CASE("metrics") {
  const auto dir = testing::scratch_dir("cli_metrics");
  const auto g = testing::random_integer_grid(16, 16, 4);
  write_image(g, dir / "a.png", RasterFormat::PNG8);
  const auto a = (dir / "a.png").string();
  const auto same = despeckle_cli({"metrics", a, "--ref", a});
  REQUIRE(same.code == 0);
  CHECK(same.out.find("psnr: inf") != std::string::npos);
  CHECK(same.out.find("mse: 0.000000") != std::string::npos);
  CHECK(same.out.find("ssim: 1.000000") != std::string::npos);

  const auto js = despeckle_cli({"metrics", a, "--ref", a, "--json", "--region", "0,0,8,8"});
  REQUIRE(js.code == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["psnr"] == "inf");
  CHECK(j["region"]["w"] == 8);

  CHECK(despeckle_cli({"metrics", a, "--ref", a, "--region", "10,10,8,8"}).code == 1);
  CHECK(despeckle_cli({"metrics", a, "--ref", a, "--region", "1,2,x,4"}).code == 1);
  CHECK(despeckle_cli({"metrics", a}).code == 1);

  write_image(testing::random_integer_grid(12, 12, 1), dir / "small.png", RasterFormat::PNG8);
  CHECK(despeckle_cli({"metrics", a, "--ref", (dir / "small.png").string()}).code == 1);

  SUBCASE("published MSE reproduces the published PSNR") {
    // Integer scene plus an alternating +/- sqrt(mse) offset.
    const double target_mse = 10.343083;
    const auto base = testing::random_integer_grid(16, 16, 9, 20, 200);
    std::vector<double> off(base.pixels().begin(), base.pixels().end());
    for (std::size_t i = 0; i < off.size(); ++i) {
      off[i] += (i % 2 ? 1 : -1) * std::sqrt(target_mse);
    }
    write_image(base, dir / "zero.sgrid", RasterFormat::SGRID);
    write_image(ImageGrid(16, 16, off, 255), dir / "off.sgrid", RasterFormat::SGRID);
    const auto r = despeckle_cli({"metrics", (dir / "off.sgrid").string(), "--ref",
                                  (dir / "zero.sgrid").string(), "--json"});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(std::fabs(report["psnr"].get<double>() - 37.984304) <= 0.0005);
  }
}

TEST_CASE("bench") {
  const auto dir = testing::scratch_dir("cli_bench");
  std::ofstream(dir / "cfg.json") << R"({
    "synthetic": {"width": 40, "height": 40, "looks": 1, "seed": 3},
    "filters": [{"label": "Lee Filter", "kind": "lee"}, {"label": "Median Filter", "kind": "median"}]
  })";
  const auto cfg = (dir / "cfg.json").string();
  const auto csv = despeckle_cli({"bench", cfg});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("Metric,Lee Filter,Median Filter\nPSNR,", 0) == 0);
  CHECK(csv.err.find("[bench] Lee Filter:") != std::string::npos);

  const auto js = despeckle_cli({"bench", cfg, "--format", "json"});
  REQUIRE(js.code == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["rows"].size() == 5);
  CHECK(j["values"][0].size() == 2);

  REQUIRE(despeckle_cli({"bench", cfg, "--output", (dir / "t.md").string(), "--format", "markdown"}).code == 0);
  CHECK(slurp(dir / "t.md").rfind("| Metric | Lee Filter | Median Filter |", 0) == 0);

  const auto reseeded = despeckle_cli({"--seed", "4", "bench", cfg});
  CHECK(reseeded.out != csv.out);

  std::ofstream(dir / "bad.json") << "{\"filters\": [";
  CHECK(despeckle_cli({"bench", (dir / "bad.json").string()}).code == 1);
  CHECK(despeckle_cli({"bench", (dir / "missing.json").string()}).code == 2);
  CHECK(despeckle_cli({"bench", cfg, "--format", "xml"}).code == 1);
}

TEST_CASE("global flags and usage") {
  CHECK(despeckle_cli({}).code == 1);
  CHECK(despeckle_cli({"--help"}).code == 0);
  CHECK(despeckle_cli({"frobnicate"}).code == 1);
  CHECK(despeckle_cli({"--threads", "-2", "metrics", "x.png"}).code == 1);
}
