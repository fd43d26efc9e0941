#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "memtrack/video.hpp"

namespace memtrack {

enum class Tier { Easy, Medium, DriftHeavy };
std::string to_string(Tier tier);
Tier parse_tier(const std::string& name);

struct OcclusionEvent {
  std::size_t start = 0;
  std::size_t duration = 0;
  double coverage = 0.5;  // fraction of the target area hidden
};

/// Everything that determines a synthetic sequence.
struct SyntheticSpec {
  std::size_t width = 160;
  std::size_t height = 160;
  std::size_t length = 120;
  std::uint64_t seed = 0;  // texture, background and jitter stream
  double start_x = 80.0;
  double start_y = 80.0;
  double target_width = 24.0;
  double target_height = 24.0;
  double velocity_x = 0.0;
  double velocity_y = 0.0;
  double jitter = 0.0;           // std-dev of per-frame positional noise, pixels
  double scale_amplitude = 0.0;  // relative size oscillation
  double scale_period = 60.0;    // frames
  double drift = 0.0;            // 0 = fixed appearance, 1 = fully morphed by the last frame
  std::vector<OcclusionEvent> occlusions;
  std::size_t distractors = 0;

  /// Throws ContractViolation when the spec cannot be rendered.
  void validate() const;
};

/// Spec of suite member `seed` at the given tier, deterministic in both.
SyntheticSpec tier_spec(Tier tier, std::uint64_t seed, std::size_t length = 120);

/// Renders frames on demand; ground truth is exact by construction and every
/// frame is quantized to 8 bits so it survives a PNG round trip unchanged.
class SyntheticVideo final : public VideoSource {
 public:
  explicit SyntheticVideo(SyntheticSpec spec, std::string name = "synthetic");

  std::size_t length() const override { return spec_.length; }
  Image frame(std::size_t index) const override;
  BoundingBox truth(std::size_t index) const override { return boxes_.at(index); }
  std::string name() const override { return name_; }
  const SyntheticSpec& spec() const { return spec_; }
  /// Occluder rectangle (x0, y0, x1, y1) on frame `index`, if any.
  std::vector<std::array<double, 4>> occluders(std::size_t index) const;

 private:
  struct Texture {
    std::array<float, 3> base{};
    std::array<std::array<float, 3>, 3> colors{};
    std::array<double, 3> freq_u{}, freq_v{}, phase{};
  };
  struct Mover {
    double x, y, w, h, vx, vy;
    Texture texture;
  };
  static std::array<float, 3> shade(const Texture& t, double u, double v);

  SyntheticSpec spec_;
  std::string name_;
  std::vector<BoundingBox> boxes_;
  Image background_;
  Texture start_look_, end_look_;
  std::vector<Mover> distractors_;
};

struct SuiteEntry {
  std::string name;
  Tier tier = Tier::Easy;
  SyntheticSpec spec;
};

/// The benchmark suite: seeds 0..count-1, tiers assigned in contiguous
/// blocks (easy, medium, drift-heavy).
std::vector<SuiteEntry> benchmark_suite(std::size_t count = 20, std::size_t length = 120);
/// Training sequences from a disjoint seed range, tiers interleaved.
std::vector<SuiteEntry> training_suite(std::size_t count, std::size_t length = 120, std::uint64_t first_seed = 1000);

}  // namespace memtrack
