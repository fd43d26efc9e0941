#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "memtrack/box.hpp"

namespace memtrack {

/// RGB image, row-major h x w x 3, values in [0, 1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, float fill = 0.0f)
      : width(w), height(h), pixels(w * h * 3, fill) {}

  float& at(std::size_t x, std::size_t y, std::size_t ch) { return pixels[(y * width + x) * 3 + ch]; }
  float at(std::size_t x, std::size_t y, std::size_t ch) const {
    return pixels[(y * width + x) * 3 + ch];
  }
  std::array<float, 3> mean_color() const;
  bool empty() const { return pixels.empty(); }

  friend bool operator==(const Image&, const Image&) = default;
};

/// A resized square crop together with the frame region it was taken from.
struct ImagePatch {
  Image pixels;
  double center_x = 0.0;
  double center_y = 0.0;
  double side = 0.0;  // crop side length in frame pixels

  /// Frame pixels per patch pixel.
  double frame_per_patch() const { return side / static_cast<double>(pixels.width); }
};

/// Square crop of `side` frame pixels centered at (cx, cy), bilinearly resized
/// to out_size x out_size. Area outside the frame takes the frame mean color.
ImagePatch crop_square(const Image& frame, double cx, double cy, double side, std::size_t out_size);

/// Side of the context-padded square around a box: with p = context*(w+h)/2,
/// side = sqrt((w + 2p)(h + 2p)).
double context_side(const BoundingBox& box, double context);

/// Context-padded crop around `box`, scaled by `scale` and resized to out_size.
ImagePatch crop_patch(const Image& frame, const BoundingBox& box, double context,
                      std::size_t out_size, double scale = 1.0);

/// Quantizes every channel to the nearest multiple of 1/255.
void quantize_8bit(Image& image);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace memtrack
