#pragma once

#include <cstddef>
#include <string>

#include "memtrack/box.hpp"
#include "memtrack/image.hpp"

namespace memtrack {

/// Random-access video with per-frame ground truth.
class VideoSource {
 public:
  virtual ~VideoSource() = default;
  virtual std::size_t length() const = 0;
  virtual Image frame(std::size_t index) const = 0;
  virtual BoundingBox truth(std::size_t index) const = 0;
  virtual std::string name() const { return "video"; }
};

}  // namespace memtrack
