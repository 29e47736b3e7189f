#include "explore/image_io.hpp"

#include <png.h>

#include <string>

namespace explore::image_io {

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw ImageIoError("write_png: unsupported channel count for '" + path.string() + "'");
  }
  const auto row_bytes = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.channels);
  if (image.data.size() != row_bytes * static_cast<std::size_t>(image.height)) {
    throw ImageIoError("write_png: buffer size mismatch for '" + path.string() + "'");
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (png_image_write_to_file(&png, path.c_str(), 0, image.data.data(), 0, nullptr) == 0) {
    const std::string message = png.message;
    png_image_free(&png);
    throw ImageIoError("write_png '" + path.string() + "': " + message);
  }
}

RasterImage read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&png, path.c_str()) == 0) {
    const std::string message = png.message;
    png_image_free(&png);
    throw ImageIoError("read_png '" + path.string() + "': " + message);
  }
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  RasterImage image{static_cast<int>(png.width), static_cast<int>(png.height), gray ? 1 : 3, {}};
  image.data.resize(PNG_IMAGE_SIZE(png));
  if (png_image_finish_read(&png, nullptr, image.data.data(), 0, nullptr) == 0) {
    const std::string message = png.message;
    png_image_free(&png);
    throw ImageIoError("read_png '" + path.string() + "': " + message);
  }
  return image;
}

void write_grid_png(const std::filesystem::path& path, const grid::OccupancyGrid& grid) {
  const grid::GridImage encoded = grid::encode(grid);
  write_png(path, RasterImage{encoded.width, encoded.height, 1, encoded.pixels});
}

void write_mask_png(const std::filesystem::path& path, const grid::GridImage& image) {
  RasterImage out{image.width, image.height, 1, std::vector<std::uint8_t>(image.mask.size())};
  for (std::size_t i = 0; i < image.mask.size(); ++i) {
    out.data[i] = image.mask[i] != 0 ? 255 : 0;
  }
  write_png(path, out);
}

void write_error_map_png(const std::filesystem::path& path, const grid::ErrorMap& map) {
  write_png(path, RasterImage{map.width, map.height, 3, grid::render_error_map(map)});
}

grid::GridImage read_grid_image(const std::filesystem::path& pixels, const std::filesystem::path& mask) {
  const RasterImage gray = read_png(pixels);
  const RasterImage bits = read_png(mask);
  if (gray.channels != 1 || bits.channels != 1) {
    throw ImageIoError("read_grid_image: expected single-channel images");
  }
  if (gray.width != bits.width || gray.height != bits.height) {
    throw grid::DimensionMismatch("read_grid_image: mask and image dimensions differ");
  }
  grid::GridImage image{gray.width, gray.height, gray.data, std::vector<std::uint8_t>(bits.data.size())};
  for (std::size_t i = 0; i < bits.data.size(); ++i) {
    image.mask[i] = bits.data[i] >= 128 ? 1 : 0;
  }
  return image;
}

}  // namespace explore::image_io
