#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "memtrack/box.hpp"
#include "memtrack/config.hpp"
#include "memtrack/image.hpp"
#include "memtrack/network.hpp"
#include "memtrack/video.hpp"

namespace memtrack {

/// One training frame: augmented object and search patches, with the target
/// box expressed in search-patch pixels.
struct ClipFrame {
  Image object;
  Image search;
  BoundingBox truth;
  std::size_t source_index = 0;
};

/// Frame 0 supplies T_0 (its search patch is unused).
struct TrainingClip {
  std::vector<ClipFrame> frames;
  std::size_t length() const { return frames.size(); }
};

/// `count` indices in [0, length): without replacement when length >= count,
/// with replacement otherwise; always sorted ascending.
std::vector<std::size_t> sample_indices(std::size_t length, std::size_t count, std::mt19937_64& rng);

TrainingClip sample_clip(const VideoSource& video, const FeatNetConfig& featnet, const TrainerConfig& cfg,
                         std::mt19937_64& rng);

/// Balanced logistic loss: sum_i w_i log(1 + exp(-y_i s_i)) with the
/// positive and negative classes each carrying total weight 1/2 (all weight
/// on one class if the other is empty). `labels` holds +1 / -1.
template <class T>
BasicTensor<T> logistic_loss(const BasicTensor<T>& scores, const std::vector<int>& labels);

/// +1 within `radius` cells (Euclidean) of (row, col), -1 elsewhere.
std::vector<int> response_labels(std::size_t rows, std::size_t cols, double row, double col, double radius);

/// Logistic loss of a rows x cols response against labels around (row, col).
template <class T>
BasicTensor<T> response_loss(const BasicTensor<T>& response, double row, double col, double radius);

/// Response cell corresponding to a point in search-patch pixels.
std::pair<double, double> patch_to_cell(const FeatNetConfig& cfg, double x, double y);

/// Unrolls the network over a clip and returns the loss summed over frames
/// 1..T-1. Memory writes use ground-truth object crops under teacher forcing,
/// else crops around the predicted peak.
template <class T>
BasicTensor<T> clip_loss(const MemTrackNetwork<T>& network, const TrainingClip& clip, const TrainerConfig& cfg,
                         bool training, std::mt19937_64& rng);

double learning_rate_at(const TrainerConfig& cfg, std::size_t step);

/// Adam with bias-corrected moments.
struct OptimizerState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::size_t step = 0;
  double learning_rate = 0.0;
};

class Adam {
 public:
  Adam(const ParameterSet<float>& params, const TrainerConfig& cfg);
  /// Applies one update from the current gradients at learning rate `lr`.
  void update(ParameterSet<float>& params, double lr);
  const OptimizerState& state() const { return state_; }

 private:
  TrainerConfig cfg_;
  OptimizerState state_;
};

/// Rescales all gradients so their global L2 norm is at most `max_norm`;
/// returns the norm before clipping.
double clip_gradients(ParameterSet<float>& params, double max_norm);

struct StepResult {
  std::size_t step = 0;
  double loss = 0.0;            // summed over frames and clips
  double loss_per_frame = 0.0;  // same, divided by the number of scored frames
  double learning_rate = 0.0;
  double grad_norm = 0.0;
};

class Trainer {
 public:
  Trainer(MemTrackNetwork<float> network, TrainerConfig cfg, std::uint64_t seed);

  /// Forward/backward over every clip, then one optimizer update.
  StepResult train_step(const std::vector<TrainingClip>& batch);
  /// Samples a batch from `videos` using the trainer's own stream.
  std::vector<TrainingClip> sample_batch(const std::vector<const VideoSource*>& videos);

  const MemTrackNetwork<float>& network() const { return network_; }
  MemTrackNetwork<float>& network() { return network_; }
  std::size_t step() const { return step_; }
  const Adam& optimizer() const { return adam_; }

 private:
  double clip_gradient_pass(const TrainingClip& clip, std::size_t index, std::vector<std::vector<float>>& grads) const;

  MemTrackNetwork<float> network_;
  TrainerConfig cfg_;
  Adam adam_;
  std::uint64_t seed_;
  std::size_t step_ = 0;
  std::mt19937_64 data_rng_;
};

struct TrainingLog {
  std::vector<StepResult> steps;
  double wall_seconds = 0.0;
};

/// Trains for cfg.trainer.steps, writing log.csv, periodic checkpoints and
/// model.mtrk into `out_dir` (when non-empty). `on_step` sees every step.
TrainingLog run_training(Trainer& trainer, const Config& cfg, const std::vector<const VideoSource*>& videos,
                         const std::filesystem::path& out_dir,
                         const std::function<void(const StepResult&)>& on_step = {});

}  // namespace memtrack
