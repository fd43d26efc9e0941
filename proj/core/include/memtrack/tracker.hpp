#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "memtrack/box.hpp"
#include "memtrack/config.hpp"
#include "memtrack/featnet.hpp"
#include "memtrack/image.hpp"
#include "memtrack/network.hpp"
#include "memtrack/video.hpp"

namespace memtrack {

/// Blend of the min-max normalized response with a centered 2-D Hann window:
/// (1 - factor) * normalized + factor * hann.
ResponseMap apply_window(const ResponseMap& response, double factor);

/// Outer product of two Hann windows, 1 at the center for odd sizes.
std::vector<double> hann2d(std::size_t rows, std::size_t cols);

/// Moves the box center by the peak's offset from the map center, converted
/// with `cell_stride` frame pixels per coarse cell and the upsample factor,
/// and multiplies width/height by `size_factor`. Ties take the lowest index.
BoundingBox locate(const ResponseMap& upsampled, const BoundingBox& current, double size_factor,
                   double cell_stride, std::size_t upsample);

/// s_t = (1 - gamma) s_prev + gamma s_new.
inline double smooth_scale(double previous, double candidate, double gamma) {
  return (1.0 - gamma) * previous + gamma * candidate;
}

/// Clamps the center into the frame and each side into [min_side, frame size].
BoundingBox clip_box(const BoundingBox& box, std::size_t frame_width, std::size_t frame_height,
                     double min_side);

struct TrackerState {
  SequenceState<float> sequence;
  BoundingBox box;
  BoundingBox initial_box;
  double scale = 1.0;
  std::size_t frame_index = 0;
};

/// Per-frame diagnostics for the memory/attention dumps.
struct StepReport {
  BoundingBox box;
  std::size_t best_scale = 0;
  double scale = 1.0;
  std::vector<float> attention;
  std::size_t attention_rows = 0;
  std::size_t attention_cols = 0;
  std::vector<float> read_weights;
  std::vector<float> write_weights;
  std::vector<float> access;
  std::vector<float> gates;
  float read_strength = 0.0f;
  float decay = 0.0f;
};

/// Online feed-forward tracker. Builds no gradient graph.
class Tracker {
 public:
  Tracker(MemTrackNetwork<float> network, TrackerConfig cfg);

  /// Extracts T_0 from the first frame, initializes controller and memory.
  void init(const Image& frame, const BoundingBox& box);
  /// Tracks one frame and writes the new template into memory.
  StepReport step(const Image& frame);

  const TrackerState& state() const;
  const MemTrackNetwork<float>& network() const { return network_; }
  const TrackerConfig& config() const { return cfg_; }
  /// The template used for matching on the latest step.
  const Tensor& last_final_template() const { return last_final_; }

 private:
  MemTrackNetwork<float> network_;
  TrackerConfig cfg_;
  std::optional<TrackerState> state_;
  std::mt19937_64 rng_{0};
  Tensor last_final_;
};

/// Runs a tracker over a whole sequence from the first ground-truth box;
/// returns one box per frame (frame 0 = the initialization box).
std::vector<BoundingBox> track_sequence(Tracker& tracker, const VideoSource& video);

}  // namespace memtrack
