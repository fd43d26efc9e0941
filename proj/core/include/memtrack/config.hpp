#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace memtrack {

struct ConvLayerSpec {
  std::size_t kernel = 3;
  std::size_t channels = 16;
  std::size_t stride = 1;
  bool relu = true;
  std::size_t pool = 0;  // average pool window (stride = window) after the layer; 0 = none

  friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

/// Fully-convolutional feature extractor layout.
///
/// The desk default maps a 36x36 object patch to a 6x6x16 template and a
/// 72x72 search patch to an 18x18x16 map (total stride 3), so the response
/// map is 13x13 with its center aligned to the search patch center.
struct FeatNetConfig {
  std::vector<ConvLayerSpec> layers{{3, 8, 3, true, 0}, {3, 16, 1, true, 0}, {5, 16, 1, false, 0}};
  std::size_t object_size = 36;
  std::size_t search_size = 72;
  std::size_t template_side = 6;
  std::size_t channels = 16;
  double context = 0.5;

  /// Spatial size of the feature map for a square input; 0 if the input is
  /// too small for the layer stack.
  std::size_t feature_size(std::size_t input) const;
  std::size_t total_stride() const;
  std::size_t search_feature_size() const { return feature_size(search_size); }
  std::size_t response_size() const { return search_feature_size() - template_side + 1; }
  /// Throws ConfigError when the layer table does not produce an n x n x c
  /// template from the object size.
  void validate() const;

  friend bool operator==(const FeatNetConfig&, const FeatNetConfig&) = default;
};

enum class Variant { Full, NoAtt, Queue, HardRead, NoRes };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
inline constexpr Variant kAllVariants[] = {Variant::Full, Variant::NoAtt, Variant::Queue,
                                           Variant::HardRead, Variant::NoRes};

struct ModelConfig {
  FeatNetConfig featnet;
  std::size_t hidden = 64;
  double keep_prob = 0.8;
  std::size_t memory_slots = 8;
  double access_decay = 0.99;
  Variant variant = Variant::Full;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrackerConfig {
  double scale_step = 1.05;
  std::size_t num_scales = 3;
  double scale_smooth = 0.6;
  double window_factor = 0.15;
  std::size_t upsample = 8;
  double min_side = 2.0;

  /// scale_step^k for k = -(num_scales-1)/2 .. (num_scales-1)/2, ascending.
  std::vector<double> scale_factors() const;
  void validate() const;
  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

struct TrainerConfig {
  std::size_t clip_length = 16;
  std::size_t batch_size = 8;
  double learning_rate = 1e-4;
  double lr_decay = 0.8;
  std::size_t lr_decay_every = 10000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 5.0;
  double label_radius = 2.0;
  double stretch = 0.05;
  double translate = 4.0;
  bool teacher_forcing = true;
  /// Back-propagate through templates written into memory.
  bool write_gradients = false;
  std::size_t steps = 2000;
  std::size_t log_every = 10;
  std::size_t checkpoint_every = 500;
  /// Threads evaluating clips of a batch; 0 = hardware concurrency.
  std::size_t workers = 0;

  void validate() const;
  friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

struct Config {
  ModelConfig model;
  TrackerConfig tracker;
  TrainerConfig trainer;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const Config&, const Config&) = default;
};

/// JSON text; missing keys keep their defaults.
Config config_from_json(const std::string& text);
std::string config_to_json(const Config& config);
Config load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const Config& config);

}  // namespace memtrack
