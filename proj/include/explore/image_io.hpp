#ifndef EXPLORE_IMAGE_IO_HPP
#define EXPLORE_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "explore/grid.hpp"

namespace explore::image_io {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit image as stored on disk. Grid row 0 is written as the first PNG row.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 = gray, 3 = RGB
  std::vector<std::uint8_t> data;
};

void write_png(const std::filesystem::path& path, const RasterImage& image);
[[nodiscard]] RasterImage read_png(const std::filesystem::path& path);

/// Grayscale observation image (0/127/255).
void write_grid_png(const std::filesystem::path& path, const grid::OccupancyGrid& grid);
/// Inpainting mask as 8-bit 0/255.
void write_mask_png(const std::filesystem::path& path, const grid::GridImage& image);
void write_error_map_png(const std::filesystem::path& path, const grid::ErrorMap& map);

/// Reads a grayscale PNG plus its 0/255 mask into a GridImage (mask becomes 0/1).
[[nodiscard]] grid::GridImage read_grid_image(const std::filesystem::path& pixels, const std::filesystem::path& mask);

}  // namespace explore::image_io

#endif  // EXPLORE_IMAGE_IO_HPP
