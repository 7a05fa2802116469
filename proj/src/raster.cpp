#include "despeckle/raster.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace despeckle {

namespace {

constexpr char kSgridMagic[4] = {'S', 'G', 'R', '1'};
constexpr std::size_t kSgridHeader = 4 + 4 + 4 + 8;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoError, "error reading " + path.string());
  return bytes;
}

// --- SGRID ---------------------------------------------------------------

template <typename T>
T load_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(v);
}

template <typename T>
void store_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U v = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

ImageGrid decode_sgrid(const std::vector<unsigned char>& bytes,
                       const std::filesystem::path& path) {
  const auto corrupt = [&](const std::string& why) {
    return Error(ErrorKind::CorruptFile, path.string() + ": " + why);
  };
  if (bytes.size() < kSgridHeader || std::memcmp(bytes.data(), kSgridMagic, 4) != 0) {
    throw corrupt("missing SGR1 header");
  }
  const auto width = load_le<std::uint32_t>(bytes.data() + 4);
  const auto height = load_le<std::uint32_t>(bytes.data() + 8);
  const auto max_value = load_le<double>(bytes.data() + 12);
  if (width == 0 || height == 0) throw corrupt("zero dimension");
  if (!std::isfinite(max_value) || max_value <= 0.0) throw corrupt("invalid max_value");
  const std::uint64_t count = std::uint64_t{width} * height;
  if (bytes.size() != kSgridHeader + count * 4) {
    throw corrupt("payload length does not match " + std::to_string(width) + "x" +
                  std::to_string(height));
  }
  std::vector<double> pixels(count);
  const unsigned char* p = bytes.data() + kSgridHeader;
  for (std::uint64_t i = 0; i < count; ++i, p += 4) {
    const float v = load_le<float>(p);
    if (!std::isfinite(v)) throw corrupt("non-finite pixel at index " + std::to_string(i));
    pixels[i] = v;
  }
  return ImageGrid(width, height, std::move(pixels), max_value);
}

std::string encode_sgrid(const ImageGrid& grid) {
  if (grid.width() > std::numeric_limits<std::uint32_t>::max() ||
      grid.height() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::RangeError, "image too large for SGRID");
  }
  std::string out(kSgridMagic, 4);
  out.reserve(kSgridHeader + grid.size() * 4);
  store_le(out, static_cast<std::uint32_t>(grid.width()));
  store_le(out, static_cast<std::uint32_t>(grid.height()));
  store_le(out, grid.max_value());
  constexpr double kFloatMax = std::numeric_limits<float>::max();
  for (double v : grid.pixels()) {
    if (std::fabs(v) > kFloatMax) {
      throw Error(ErrorKind::RangeError, "pixel " + std::to_string(v) +
                                             " exceeds single-precision range");
    }
    store_le(out, static_cast<float>(v));
  }
  return out;
}

// --- PGM -----------------------------------------------------------------

ImageGrid decode_pgm(const std::vector<unsigned char>& bytes,
                     const std::filesystem::path& path) {
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_uint = [&]() -> std::uint64_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorKind::CorruptFile, path.string() + ": malformed PGM header");
    }
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1u << 30)) {
        throw Error(ErrorKind::CorruptFile, path.string() + ": PGM header value too large");
      }
    }
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorKind::CorruptFile, path.string() + ": not a PGM file");
  }
  if (bytes[1] != '5') {
    throw Error(ErrorKind::UnsupportedFormat,
                path.string() + ": only binary (P5) PGM is supported");
  }
  pos = 2;
  const auto width = read_uint();
  const auto height = read_uint();
  const auto maxval = read_uint();
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::CorruptFile, path.string() + ": zero dimension");
  }
  if (maxval == 0 || maxval > 255) {
    throw Error(ErrorKind::UnsupportedFormat,
                path.string() + ": only 8-bit PGM is supported");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorKind::CorruptFile, path.string() + ": malformed PGM header");
  }
  ++pos;
  const std::uint64_t count = width * height;
  if (bytes.size() - pos != count) {
    throw Error(ErrorKind::CorruptFile, path.string() + ": PGM payload length mismatch");
  }
  std::vector<double> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return ImageGrid(width, height, std::move(pixels), 255.0);
}

// --- PNG -----------------------------------------------------------------

struct PngReadState {
  const unsigned char* data;
  std::size_t size;
  std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->offset + length > state->size) png_error(png, "truncated PNG");
  std::memcpy(out, state->data + state->offset, length);
  state->offset += length;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void png_flush_noop(png_structp) {}

void png_silent_warning(png_structp, png_const_charp) {}

enum class PngStatus { Ok, Corrupt, NotGray, BadDepth };

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
};

// Keeps only trivially destructible locals because libpng reports errors via
// longjmp. `rows` receives the decoded samples, big-endian for 16-bit.
PngStatus decode_png_raw(PngReadState* state, PngHeader* header,
                         std::vector<unsigned char>* rows) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
  if (png == nullptr) return PngStatus::Corrupt;
  png_infop info = png_create_info_struct(png);
  png_bytep* row_ptrs = nullptr;
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return PngStatus::Corrupt;
  }
  if (setjmp(png_jmpbuf(png))) {
    delete[] row_ptrs;
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::Corrupt;
  }
  png_set_read_fn(png, state, png_read_from_memory);
  png_read_info(png, info);
  int color_type = 0;
  int interlace = 0;
  png_get_IHDR(png, info, &header->width, &header->height, &header->bit_depth,
               &color_type, &interlace, nullptr, nullptr);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::NotGray;
  }
  if (header->bit_depth != 8 && header->bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::BadDepth;
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngStatus::NotGray;
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  rows->resize(stride * header->height);
  row_ptrs = new png_bytep[header->height];
  for (png_uint_32 y = 0; y < header->height; ++y) row_ptrs[y] = rows->data() + y * stride;
  png_read_image(png, row_ptrs);
  png_read_end(png, nullptr);
  delete[] row_ptrs;
  row_ptrs = nullptr;
  png_destroy_read_struct(&png, &info, nullptr);
  return PngStatus::Ok;
}

ImageGrid decode_png(const std::vector<unsigned char>& bytes,
                     const std::filesystem::path& path) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorKind::CorruptFile, path.string() + ": not a PNG file");
  }
  PngReadState state{bytes.data(), bytes.size(), 0};
  PngHeader header;
  std::vector<unsigned char> rows;
  switch (decode_png_raw(&state, &header, &rows)) {
    case PngStatus::Ok: break;
    case PngStatus::Corrupt:
      throw Error(ErrorKind::CorruptFile, path.string() + ": corrupt PNG data");
    case PngStatus::NotGray:
      throw Error(ErrorKind::UnsupportedFormat,
                  path.string() + ": PNG must be single-channel grayscale");
    case PngStatus::BadDepth:
      throw Error(ErrorKind::UnsupportedFormat,
                  path.string() + ": unsupported PNG bit depth " +
                      std::to_string(header.bit_depth));
  }
  const std::size_t count = std::size_t{header.width} * header.height;
  std::vector<double> pixels(count);
  if (header.bit_depth == 8) {
    std::copy(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(count),
              pixels.begin());
    return ImageGrid(header.width, header.height, std::move(pixels), 255.0);
  }
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = static_cast<double>((rows[2 * i] << 8) | rows[2 * i + 1]);
  }
  return ImageGrid(header.width, header.height, std::move(pixels), 65535.0);
}

bool encode_png_raw(std::string* out, png_uint_32 width, png_uint_32 height,
                    int bit_depth, const std::vector<unsigned char>* samples) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = std::size_t{width} * (bit_depth / 8);
  for (png_uint_32 y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(samples->data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// Half-to-even rounding with the integer format's range rule.
std::vector<std::uint32_t> quantize_samples(const ImageGrid& grid, double ceiling,
                                            RasterFormat format) {
  std::vector<std::uint32_t> out(grid.size());
  const auto pixels = grid.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = pixels[i];
    if (v < 0.0 || v > ceiling) {
      throw Error(ErrorKind::RangeError,
                  "pixel value " + std::to_string(v) + " at (" +
                      std::to_string(i % grid.width()) + "," +
                      std::to_string(i / grid.width()) + ") is outside [0, " +
                      std::to_string(static_cast<int>(ceiling)) + "] for " +
                      std::string(to_string(format)));
    }
    out[i] = static_cast<std::uint32_t>(std::nearbyint(v));
  }
  return out;
}

std::string encode_png(const ImageGrid& grid, RasterFormat format) {
  const bool wide = format == RasterFormat::PNG16;
  const auto samples = quantize_samples(grid, wide ? 65535.0 : 255.0, format);
  std::vector<unsigned char> bytes;
  bytes.reserve(samples.size() * (wide ? 2 : 1));
  for (auto s : samples) {
    if (wide) bytes.push_back(static_cast<unsigned char>(s >> 8));
    bytes.push_back(static_cast<unsigned char>(s & 0xFFu));
  }
  if (grid.width() > 0x7FFFFFFF || grid.height() > 0x7FFFFFFF) {
    throw Error(ErrorKind::RangeError, "image too large for PNG");
  }
  std::string out;
  if (!encode_png_raw(&out, static_cast<png_uint_32>(grid.width()),
                      static_cast<png_uint_32>(grid.height()), wide ? 16 : 8, &bytes)) {
    throw Error(ErrorKind::IoError, "PNG encoding failed");
  }
  return out;
}

std::string encode_pgm(const ImageGrid& grid) {
  const auto samples = quantize_samples(grid, 255.0, RasterFormat::PGM);
  std::string out = "P5\n" + std::to_string(grid.width()) + " " +
                    std::to_string(grid.height()) + "\n255\n";
  out.reserve(out.size() + samples.size());
  for (auto s : samples) out.push_back(static_cast<char>(s));
  return out;
}

}  // namespace

std::string_view to_string(RasterFormat format) {
  switch (format) {
    case RasterFormat::PNG8: return "PNG8";
    case RasterFormat::PNG16: return "PNG16";
    case RasterFormat::PGM: return "PGM";
    case RasterFormat::SGRID: return "SGRID";
  }
  return "?";
}

RasterFormat parse_raster_format(std::string_view name) {
  const auto n = lower(name);
  if (n == "png" || n == "png8") return RasterFormat::PNG8;
  if (n == "png16") return RasterFormat::PNG16;
  if (n == "pgm") return RasterFormat::PGM;
  if (n == "sgrid") return RasterFormat::SGRID;
  throw Error(ErrorKind::UnsupportedFormat, "unknown raster format '" + std::string(name) + "'");
}

RasterFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  if (ext == ".png") return RasterFormat::PNG8;
  if (ext == ".pgm") return RasterFormat::PGM;
  if (ext == ".sgrid") return RasterFormat::SGRID;
  throw Error(ErrorKind::UnsupportedFormat,
              path.string() + ": cannot infer raster format from extension '" + ext + "'");
}

RasterFormat output_format_for(const std::filesystem::path& path, const ImageGrid& grid) {
  const auto format = format_from_extension(path);
  if (format == RasterFormat::PNG8 && grid.max_value() > 255.0) return RasterFormat::PNG16;
  return format;
}

ImageGrid read_image(const std::filesystem::path& path, std::optional<RasterFormat> format) {
  const auto fmt = format ? *format : format_from_extension(path);
  const auto bytes = read_bytes(path);
  switch (fmt) {
    case RasterFormat::PNG8:
    case RasterFormat::PNG16: return decode_png(bytes, path);
    case RasterFormat::PGM: return decode_pgm(bytes, path);
    case RasterFormat::SGRID: return decode_sgrid(bytes, path);
  }
  throw Error(ErrorKind::UnsupportedFormat, path.string());
}

void atomic_write_file(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  std::random_device rd;
  const auto tmp = fs::path(path).concat(".tmp" + std::to_string(rd() & 0xFFFFFFu));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::IoError, "error writing " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot move output into place at " + path.string());
  }
}

void write_image(const ImageGrid& grid, const std::filesystem::path& path,
                 RasterFormat format) {
  std::string bytes;
  switch (format) {
    case RasterFormat::PNG8:
    case RasterFormat::PNG16: bytes = encode_png(grid, format); break;
    case RasterFormat::PGM: bytes = encode_pgm(grid); break;
    case RasterFormat::SGRID: bytes = encode_sgrid(grid); break;
  }
  atomic_write_file(path, bytes);
}

ImageGrid crop(const ImageGrid& grid, const Region& region) {
  check_region(grid, region);
  std::vector<double> out;
  out.reserve(region.w * region.h);
  for (std::size_t y = region.y; y < region.y + region.h; ++y) {
    const auto row = grid.row(y).subspan(region.x, region.w);
    out.insert(out.end(), row.begin(), row.end());
  }
  return ImageGrid(region.w, region.h, std::move(out), grid.max_value());
}

ImageGrid quantize_for_display(const ImageGrid& grid, QuantizeMode mode) {
  const auto pixels = grid.pixels();
  const double top = grid.max_value();
  std::vector<double> out(pixels.size());
  if (mode == QuantizeMode::Clamp) {
    std::transform(pixels.begin(), pixels.end(), out.begin(),
                   [top](double v) { return std::clamp(v, 0.0, top); });
  } else {
    const auto [lo_it, hi_it] = std::minmax_element(pixels.begin(), pixels.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    if (span > 0.0) {
      std::transform(pixels.begin(), pixels.end(), out.begin(),
                     [&](double v) { return (v - lo) / span * top; });
    }
  }
  return ImageGrid(grid.width(), grid.height(), std::move(out), top);
}

ImageGrid rescale_to_8bit(const ImageGrid& grid) {
  if (grid.max_value() == 255.0) return grid;
  const double scale = 255.0 / grid.max_value();
  std::vector<double> out(grid.pixels().begin(), grid.pixels().end());
  for (auto& v : out) v *= scale;
  return ImageGrid(grid.width(), grid.height(), std::move(out), 255.0);
}

}  // namespace despeckle
