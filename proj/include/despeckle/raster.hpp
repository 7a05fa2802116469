#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "despeckle/image.hpp"

namespace despeckle {

enum class RasterFormat { PNG8, PNG16, PGM, SGRID };

std::string_view to_string(RasterFormat format);

/// Parses "png8", "png16", "pgm", "sgrid" (case-insensitive). "png" maps to PNG8.
RasterFormat parse_raster_format(std::string_view name);

/// Format implied by the file extension for reading. PNG bit depth is taken
/// from the file itself, so ".png" reports PNG8 here.
RasterFormat format_from_extension(const std::filesystem::path& path);

/// Format to use when writing `grid` to `path`: ".png" picks PNG16 for grids
/// whose max_value exceeds 255.
RasterFormat output_format_for(const std::filesystem::path& path,
                               const ImageGrid& grid);

ImageGrid read_image(const std::filesystem::path& path,
                     std::optional<RasterFormat> format = std::nullopt);

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial raster.
void write_image(const ImageGrid& grid, const std::filesystem::path& path,
                 RasterFormat format);

ImageGrid crop(const ImageGrid& grid, const Region& region);

enum class QuantizeMode { Clamp, MinMax };

ImageGrid quantize_for_display(const ImageGrid& grid, QuantizeMode mode);

/// Rescales [0, max_value] onto [0, 255] and sets max_value to 255.
ImageGrid rescale_to_8bit(const ImageGrid& grid);

/// Writes bytes to `path` atomically (temp file + rename).
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace despeckle
