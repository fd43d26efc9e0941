#include "memtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memtrack/error.hpp"

namespace memtrack {

std::vector<double> hann2d(std::size_t rows, std::size_t cols) {
  auto hann = [](std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
    }
    return w;
  };
  const auto wr = hann(rows), wc = hann(cols);
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = wr[r] * wc[c];
  }
  return out;
}

ResponseMap apply_window(const ResponseMap& response, double factor) {
  MEMTRACK_EXPECTS(factor >= 0.0 && factor <= 1.0, "apply_window: factor must lie in [0,1]");
  MEMTRACK_EXPECTS(!response.values.empty(), "apply_window: empty map");
  const auto [lo, hi] = std::minmax_element(response.values.begin(), response.values.end());
  const double range = *hi - *lo;
  const auto window = hann2d(response.rows, response.cols);
  ResponseMap out = response;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double normalized = range > 0.0 ? (response.values[i] - *lo) / range : 0.0;
    out.values[i] = (1.0 - factor) * normalized + factor * window[i];
  }
  return out;
}

BoundingBox locate(const ResponseMap& upsampled, const BoundingBox& current, double size_factor,
                   double cell_stride, std::size_t upsample) {
  MEMTRACK_EXPECTS(upsample >= 1, "locate: upsample factor must be >= 1");
  const std::size_t peak = upsampled.argmax();
  const double row = static_cast<double>(peak / upsampled.cols);
  const double col = static_cast<double>(peak % upsampled.cols);
  const double center_row = (static_cast<double>(upsampled.rows) - 1.0) / 2.0;
  const double center_col = (static_cast<double>(upsampled.cols) - 1.0) / 2.0;
  const double step = cell_stride / static_cast<double>(upsample);
  BoundingBox out = current;
  out.cx += (col - center_col) * step;
  out.cy += (row - center_row) * step;
  out.width *= size_factor;
  out.height *= size_factor;
  return out;
}

BoundingBox clip_box(const BoundingBox& box, std::size_t frame_width, std::size_t frame_height,
                     double min_side) {
  const double fw = static_cast<double>(frame_width), fh = static_cast<double>(frame_height);
  BoundingBox out = box;
  out.cx = std::clamp(out.cx, 0.0, fw);
  out.cy = std::clamp(out.cy, 0.0, fh);
  out.width = std::clamp(out.width, min_side, std::max(min_side, fw));
  out.height = std::clamp(out.height, min_side, std::max(min_side, fh));
  return out;
}

Tracker::Tracker(MemTrackNetwork<float> network, TrackerConfig cfg)
    : network_(std::move(network)), cfg_(std::move(cfg)) {
  cfg_.validate();
}

const TrackerState& Tracker::state() const {
  if (!state_) throw ContractViolation("tracker: not initialized");
  return *state_;
}

void Tracker::init(const Image& frame, const BoundingBox& box) {
  if (!box.valid()) throw TrackingFailure("tracker: degenerate initial box " + format_box(box));
  NoGradGuard no_grad;
  const auto& fc = network_.config().featnet;
  const auto patch = crop_patch(frame, box, fc.context, fc.object_size);
  const auto initial = network_.featnet().extract(patch);
  TrackerState st;
  st.sequence = network_.begin(initial);
  st.box = box;
  st.initial_box = box;
  st.scale = 1.0;
  st.frame_index = 0;
  state_ = std::move(st);
  rng_.seed(0);
  last_final_ = initial;
}

StepReport Tracker::step(const Image& frame) {
  if (!state_) throw ContractViolation("tracker: step before init");
  NoGradGuard no_grad;
  auto& st = *state_;
  const auto& net = network_;
  const auto& fc = net.config().featnet;
  const auto factors = cfg_.scale_factors();
  const std::size_t middle = factors.size() / 2;
  const double search_side =
      context_side(st.box, fc.context) * static_cast<double>(fc.search_size) / static_cast<double>(fc.object_size);

  std::vector<Tensor> features;
  features.reserve(factors.size());
  for (const double f : factors) {
    features.push_back(net.featnet().extract(crop_square(frame, st.box.cx, st.box.cy, search_side * f, fc.search_size)));
  }

  // The controller reads from the unscaled search region.
  const auto trace = net.read(st.sequence, features[middle], false, rng_);
  last_final_ = trace.final_template;

  std::size_t best = middle;
  ResponseMap best_map;
  double best_peak = -std::numeric_limits<double>::infinity();
  std::vector<ResponseMap> maps(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    maps[i] = upsample_response(to_response_map(net.featnet().respond(trace.final_template, features[i])), cfg_.upsample);
  }
  // Raw peaks pick the scale; the middle scale wins ties.
  best_peak = maps[middle].max();
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (maps[i].max() > best_peak) {
      best_peak = maps[i].max();
      best = i;
    }
  }
  best_map = apply_window(maps[best], cfg_.window_factor);

  const double new_scale = smooth_scale(st.scale, st.scale * factors[best], cfg_.scale_smooth);
  const double cell_stride = static_cast<double>(fc.total_stride()) * search_side * factors[best] /
                             static_cast<double>(fc.search_size);
  BoundingBox box = locate(best_map, st.box, new_scale / st.scale, cell_stride, cfg_.upsample);
  box = clip_box(box, frame.width, frame.height, cfg_.min_side);

  const auto object = net.featnet().extract(crop_patch(frame, box, fc.context, fc.object_size));
  net.write(st.sequence, trace, object);

  st.box = box;
  st.scale = new_scale;
  ++st.frame_index;

  StepReport report;
  report.box = box;
  report.best_scale = best;
  report.scale = new_scale;
  report.attention.assign(trace.attention.data().begin(), trace.attention.data().end());
  report.attention_rows = trace.grid_rows;
  report.attention_cols = trace.grid_cols;
  report.read_weights.assign(trace.read_weights.data().begin(), trace.read_weights.data().end());
  const auto& mem = st.sequence.memory;
  report.write_weights.assign(mem.last_write.data().begin(), mem.last_write.data().end());
  report.access.assign(mem.access.data().begin(), mem.access.data().end());
  report.gates.assign(trace.signals.gates.data().begin(), trace.signals.gates.data().end());
  report.read_strength = trace.signals.read_strength.item();
  report.decay = trace.signals.decay.item();
  return report;
}

std::vector<BoundingBox> track_sequence(Tracker& tracker, const VideoSource& video) {
  MEMTRACK_EXPECTS(video.length() >= 1, "track_sequence: empty video");
  std::vector<BoundingBox> boxes;
  boxes.reserve(video.length());
  const BoundingBox first = video.truth(0);
  tracker.init(video.frame(0), first);
  boxes.push_back(first);
  for (std::size_t i = 1; i < video.length(); ++i) boxes.push_back(tracker.step(video.frame(i)).box);
  return boxes;
}

}  // namespace memtrack
