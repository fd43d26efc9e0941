#include "memtrack/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "memtrack/error.hpp"

namespace memtrack {

std::array<float, 3> Image::mean_color() const {
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < pixels.size(); ++i) acc[i % 3] += pixels[i];
  const double n = static_cast<double>(width * height);
  if (n == 0) return {0.f, 0.f, 0.f};
  return {static_cast<float>(acc[0] / n), static_cast<float>(acc[1] / n),
          static_cast<float>(acc[2] / n)};
}

ImagePatch crop_square(const Image& frame, double cx, double cy, double side, std::size_t out_size) {
  if (!(side > 0.0) || out_size == 0) throw TrackingFailure("crop: non-positive crop size");
  MEMTRACK_EXPECTS(!frame.empty(), "crop: empty frame");
  const auto fill = frame.mean_color();
  ImagePatch patch;
  patch.pixels = Image(out_size, out_size);
  patch.center_x = cx;
  patch.center_y = cy;
  patch.side = side;

  const double step = side / static_cast<double>(out_size);
  const double x0 = cx - side / 2.0;
  const double y0 = cy - side / 2.0;
  const auto w = static_cast<long>(frame.width);
  const auto h = static_cast<long>(frame.height);
  auto sample = [&](long x, long y, std::size_t ch) {
    return (x < 0 || y < 0 || x >= w || y >= h)
               ? fill[ch]
               : frame.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), ch);
  };
  for (std::size_t v = 0; v < out_size; ++v) {
    // Pixel i covers [i, i+1); its center sits at i + 0.5.
    const double sy = y0 + (static_cast<double>(v) + 0.5) * step - 0.5;
    const long iy = static_cast<long>(std::floor(sy));
    const double fy = sy - static_cast<double>(iy);
    for (std::size_t u = 0; u < out_size; ++u) {
      const double sx = x0 + (static_cast<double>(u) + 0.5) * step - 0.5;
      const long ix = static_cast<long>(std::floor(sx));
      const double fx = sx - static_cast<double>(ix);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - fx) * sample(ix, iy, ch) + fx * sample(ix + 1, iy, ch);
        const double bottom = (1.0 - fx) * sample(ix, iy + 1, ch) + fx * sample(ix + 1, iy + 1, ch);
        patch.pixels.at(u, v, ch) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return patch;
}

double context_side(const BoundingBox& box, double context) {
  const double pad = context * (box.width + box.height);  // = 2p
  return std::sqrt((box.width + pad) * (box.height + pad));
}

ImagePatch crop_patch(const Image& frame, const BoundingBox& box, double context,
                      std::size_t out_size, double scale) {
  if (!box.valid()) throw TrackingFailure("crop_patch: degenerate box " + format_box(box));
  return crop_square(frame, box.cx, box.cy, context_side(box, context) * scale, out_size);
}

void quantize_8bit(Image& image) {
  for (float& v : image.pixels) v = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0f;
}

Image read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw std::runtime_error("read_png: cannot open " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("read_png: " + path.string() + ": " + msg);
  }
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < buffer.size(); ++i) out.pixels[i] = static_cast<float>(buffer[i]) / 255.0f;
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(image.pixels.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.pixels[i], 0.0f, 1.0f) * 255.0f));
  }
  if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw std::runtime_error("write_png: " + path.string() + ": " + img.message);
  }
}

}  // namespace memtrack
