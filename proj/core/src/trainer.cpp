#include "memtrack/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "memtrack/checkpoint.hpp"
#include "memtrack/error.hpp"
#include "memtrack/featnet.hpp"
#include "memtrack/ops.hpp"

namespace memtrack {

std::vector<std::size_t> sample_indices(std::size_t length, std::size_t count, std::mt19937_64& rng) {
  MEMTRACK_EXPECTS(length > 0, "sample_indices: empty video");
  std::vector<std::size_t> out;
  out.reserve(count);
  if (length >= count) {
    // Partial Fisher-Yates: the first `count` entries are a uniform subset.
    std::vector<std::size_t> pool(length);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, length - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, length - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(pick(rng));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TrainingClip sample_clip(const VideoSource& video, const FeatNetConfig& fc, const TrainerConfig& cfg,
                         std::mt19937_64& rng) {
  MEMTRACK_EXPECTS(video.length() >= 1, "sample_clip: empty video '" + video.name() + "'");
  MEMTRACK_EXPECTS(video.length() >= 2, "sample_clip: video '" + video.name() + "' needs at least 2 frames");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto indices = sample_indices(video.length(), cfg.clip_length, rng);
  const double search_ratio = static_cast<double>(fc.search_size) / static_cast<double>(fc.object_size);

  TrainingClip clip;
  clip.frames.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Image frame = video.frame(indices[k]);
    const BoundingBox truth = video.truth(indices[k]);
    if (!truth.valid()) throw ContractViolation("sample_clip: invalid box in '" + video.name() + "'");
    ClipFrame cf;
    cf.source_index = indices[k];

    const double oside = context_side(truth, fc.context) * (1.0 + cfg.stretch * unit(rng));
    const double opx = oside / static_cast<double>(fc.object_size);
    const double ox = truth.cx + cfg.translate * unit(rng) * opx;
    const double oy = truth.cy + cfg.translate * unit(rng) * opx;
    cf.object = crop_square(frame, ox, oy, oside, fc.object_size).pixels;

    if (k > 0) {
      const BoundingBox prev = video.truth(indices[k - 1]);
      const double sside = context_side(prev, fc.context) * search_ratio * (1.0 + cfg.stretch * unit(rng));
      const double spx = sside / static_cast<double>(fc.search_size);
      const double sx = prev.cx + cfg.translate * unit(rng) * spx;
      const double sy = prev.cy + cfg.translate * unit(rng) * spx;
      cf.search = crop_square(frame, sx, sy, sside, fc.search_size).pixels;
      const double half = static_cast<double>(fc.search_size) / 2.0;
      cf.truth = {(truth.cx - sx) / spx + half, (truth.cy - sy) / spx + half, truth.width / spx,
                  truth.height / spx};
    }
    clip.frames.push_back(std::move(cf));
  }
  return clip;
}

template <class T>
BasicTensor<T> logistic_loss(const BasicTensor<T>& scores, const std::vector<int>& labels) {
  MEMTRACK_EXPECTS(scores.size() == labels.size(), "logistic_loss: score/label count mismatch");
  MEMTRACK_EXPECTS(!labels.empty(), "logistic_loss: empty input");
  std::size_t pos = 0;
  for (const int y : labels) {
    MEMTRACK_EXPECTS(y == 1 || y == -1, "logistic_loss: labels must be +1 or -1");
    pos += y == 1 ? 1 : 0;
  }
  const std::size_t neg = labels.size() - pos;
  const double wpos = neg == 0 ? 1.0 / static_cast<double>(pos) : (pos == 0 ? 0.0 : 0.5 / static_cast<double>(pos));
  const double wneg = pos == 0 ? 1.0 / static_cast<double>(neg) : (neg == 0 ? 0.0 : 0.5 / static_cast<double>(neg));
  std::vector<T> sign(labels.size()), weight(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sign[i] = static_cast<T>(-labels[i]);
    weight[i] = static_cast<T>(labels[i] == 1 ? wpos : wneg);
  }
  const auto flat = reshape(scores, Shape{scores.size()});
  const auto margins = softplus(mul(flat, BasicTensor<T>::vector(std::move(sign))));
  return sum(mul(margins, BasicTensor<T>::vector(std::move(weight))));
}

std::vector<int> response_labels(std::size_t rows, std::size_t cols, double row, double col, double radius) {
  std::vector<int> labels(rows * cols, -1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double dr = static_cast<double>(r) - row, dc = static_cast<double>(c) - col;
      if (std::sqrt(dr * dr + dc * dc) <= radius) labels[r * cols + c] = 1;
    }
  }
  return labels;
}

template <class T>
BasicTensor<T> response_loss(const BasicTensor<T>& response, double row, double col, double radius) {
  MEMTRACK_EXPECTS(response.rank() >= 2, "response_loss: expected a 2-D map");
  const std::size_t rows = response.dim(0), cols = response.dim(1);
  MEMTRACK_EXPECTS(row >= 0.0 && col >= 0.0 && row <= static_cast<double>(rows - 1) &&
                       col <= static_cast<double>(cols - 1),
                   "response_loss: target center outside the map");
  return logistic_loss(response, response_labels(rows, cols, row, col, radius));
}

std::pair<double, double> patch_to_cell(const FeatNetConfig& fc, double x, double y) {
  const double stride = static_cast<double>(fc.total_stride());
  const double half = static_cast<double>(fc.search_size) / 2.0;
  const double mid = (static_cast<double>(fc.response_size()) - 1.0) / 2.0;
  const double hi = static_cast<double>(fc.response_size() - 1);
  return {std::clamp((y - half) / stride + mid, 0.0, hi), std::clamp((x - half) / stride + mid, 0.0, hi)};
}

template <class T>
BasicTensor<T> clip_loss(const MemTrackNetwork<T>& network, const TrainingClip& clip, const TrainerConfig& cfg,
                         bool training, std::mt19937_64& rng) {
  MEMTRACK_EXPECTS(clip.length() >= 2, "clip_loss: clip needs at least 2 frames");
  const auto& net = network.featnet();
  const auto& fc = network.config().featnet;
  auto state = network.begin(net.extract(image_tensor<T>(clip.frames[0].object)));
  BasicTensor<T> total;
  for (std::size_t k = 1; k < clip.length(); ++k) {
    const auto& frame = clip.frames[k];
    const auto search = net.extract(image_tensor<T>(frame.search));
    const auto trace = network.read(state, search, training, rng);
    const auto response = net.respond(trace.final_template, search);
    const auto [row, col] = patch_to_cell(fc, frame.truth.cx, frame.truth.cy);
    const auto loss = response_loss(response, row, col, cfg.label_radius);
    total = total.defined() ? add(total, loss) : loss;
    if (k + 1 == clip.length()) break;  // nothing reads the last write

    BasicTensor<T> written;
    if (cfg.teacher_forcing) {
      written = net.extract(image_tensor<T>(frame.object));
    } else {
      const auto map = to_response_map(response);
      const std::size_t peak = map.argmax();
      const double stride = static_cast<double>(fc.total_stride());
      const double mid = (static_cast<double>(map.rows) - 1.0) / 2.0;
      const double half = static_cast<double>(fc.search_size) / 2.0;
      const BoundingBox predicted{half + (static_cast<double>(peak % map.cols) - mid) * stride,
                                  half + (static_cast<double>(peak / map.cols) - mid) * stride, frame.truth.width,
                                  frame.truth.height};
      written = net.extract(crop_patch(frame.search, predicted, fc.context, fc.object_size));
    }
    if (!cfg.write_gradients) written = written.detach();
    network.write(state, trace, written);
  }
  return total;
}

double learning_rate_at(const TrainerConfig& cfg, std::size_t step) {
  return cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(step / cfg.lr_decay_every));
}

Adam::Adam(const ParameterSet<float>& params, const TrainerConfig& cfg) : cfg_(cfg) {
  for (const auto& [name, t] : params) {
    state_.first.emplace_back(t.size(), 0.0);
    state_.second.emplace_back(t.size(), 0.0);
  }
  state_.learning_rate = cfg.learning_rate;
}

void Adam::update(ParameterSet<float>& params, double lr) {
  MEMTRACK_EXPECTS(lr > 0.0, "adam: learning rate must be positive");
  MEMTRACK_EXPECTS(params.size() == state_.first.size(), "adam: parameter count changed");
  ++state_.step;
  state_.learning_rate = lr;
  const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state_.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state_.step));
  std::size_t k = 0;
  for (const auto& entry : params) {
    auto t = entry.second;
    auto values = t.mutable_data();
    const auto grad = t.grad();
    auto& m = state_.first[k];
    auto& v = state_.second[k];
    MEMTRACK_EXPECTS(m.size() == values.size(), "adam: shape of '" + entry.first + "' changed");
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      values[i] = static_cast<float>(values[i] - lr * mhat / (std::sqrt(vhat) + cfg_.adam_epsilon));
    }
    ++k;
  }
}

double clip_gradients(ParameterSet<float>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, t] : params) {
    for (const float g : t.grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (const auto& [name, t] : params) {
      for (auto& g : t.node()->grad_buffer()) g = static_cast<float>(g * factor);
    }
  }
  return norm;
}

Trainer::Trainer(MemTrackNetwork<float> network, TrainerConfig cfg, std::uint64_t seed)
    : network_(std::move(network)),
      cfg_(std::move(cfg)),
      adam_(network_.parameters(), cfg_),
      seed_(seed),
      data_rng_(seed ^ 0x5851f42d4c957f2dULL) {
  cfg_.validate();
}

std::vector<TrainingClip> Trainer::sample_batch(const std::vector<const VideoSource*>& videos) {
  MEMTRACK_EXPECTS(!videos.empty(), "trainer: no training videos");
  std::uniform_int_distribution<std::size_t> pick(0, videos.size() - 1);
  std::vector<TrainingClip> batch;
  batch.reserve(cfg_.batch_size);
  for (std::size_t i = 0; i < cfg_.batch_size; ++i) {
    batch.push_back(sample_clip(*videos[pick(data_rng_)], network_.config().featnet, cfg_, data_rng_));
  }
  return batch;
}

// Runs one clip on a private copy of the parameters so clips can proceed in
// parallel; the caller sums the copies' gradients in clip order.
double Trainer::clip_gradient_pass(const TrainingClip& clip, std::size_t index,
                                   std::vector<std::vector<float>>& grads) const {
  MemTrackNetwork<float> local(network_.config(), network_.parameters().cast<float>());
  std::mt19937_64 rng(seed_ + 0x9e3779b97f4a7c15ULL * (step_ + 1) + index);
  const auto loss = clip_loss(local, clip, cfg_, true, rng);
  backward(loss);
  grads.clear();
  for (const auto& [name, t] : local.parameters()) grads.emplace_back(t.grad().begin(), t.grad().end());
  return loss.item();
}

StepResult Trainer::train_step(const std::vector<TrainingClip>& batch) {
  MEMTRACK_EXPECTS(!batch.empty(), "train_step: empty batch");
  for (const auto& clip : batch) {
    MEMTRACK_EXPECTS(clip.length() == batch.front().length(), "train_step: clip lengths differ");
  }

  std::vector<double> losses(batch.size(), 0.0);
  std::vector<std::vector<std::vector<float>>> grads(batch.size());
  std::vector<std::string> failures(batch.size());
  auto run = [&](std::size_t i) {
    try {
      losses[i] = clip_gradient_pass(batch[i], i, grads[i]);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };
  std::size_t workers = cfg_.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg_.workers;
  workers = std::min(workers, batch.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < batch.size(); i += workers) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  double total = 0.0;
  for (double l : losses) total += l;
  std::ostringstream diag;
  bool bad = !std::isfinite(total);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!failures[i].empty() || !std::isfinite(losses[i])) {
      bad = true;
      diag << "\n  clip " << i << ": loss " << losses[i] << (failures[i].empty() ? "" : " (" + failures[i] + ")");
    }
  }
  auto& params = network_.parameters();
  params.zero_grad();
  if (!bad) {
    std::size_t k = 0;
    for (const auto& [name, t] : params) {
      auto& g = t.node()->grad_buffer();
      for (const auto& clip_grads : grads) {
        const auto& src = clip_grads[k];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
      }
      for (const float x : g) {
        if (!std::isfinite(x)) {
          bad = true;
          diag << "\n  non-finite gradient in " << name;
          break;
        }
      }
      ++k;
    }
  }
  if (bad) {
    std::ostringstream msg;
    msg << "train step " << step_ << ": non-finite loss or gradient (lr " << learning_rate_at(cfg_, step_) << ")"
        << diag.str();
    for (const auto& [name, t] : params) {
      double maxabs = 0.0;
      for (const float x : t.data()) maxabs = std::max(maxabs, static_cast<double>(std::abs(x)));
      msg << "\n  |" << name << "|max = " << maxabs;
    }
    throw NonFiniteLoss(msg.str());
  }

  StepResult result;
  result.step = step_;
  result.loss = total;
  result.loss_per_frame = total / static_cast<double>(batch.size() * (batch.front().length() - 1));
  result.learning_rate = learning_rate_at(cfg_, step_);
  result.grad_norm = clip_gradients(params, cfg_.clip_norm);
  adam_.update(params, result.learning_rate);
  params.zero_grad();
  ++step_;
  return result;
}

TrainingLog run_training(Trainer& trainer, const Config& cfg, const std::vector<const VideoSource*>& videos,
                         const std::filesystem::path& out_dir,
                         const std::function<void(const StepResult&)>& on_step) {
  TrainingLog log;
  std::ofstream csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir / "log.csv");
    if (!csv) throw std::runtime_error("cannot write " + (out_dir / "log.csv").string());
    csv << "step,loss,loss_per_frame,lr,grad_norm,wall_time\n";
    csv.precision(9);
  }
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  while (trainer.step() < cfg.trainer.steps) {
    const auto batch = trainer.sample_batch(videos);
    const auto r = trainer.train_step(batch);
    log.steps.push_back(r);
    if (csv.is_open()) {
      csv << r.step << ',' << r.loss << ',' << r.loss_per_frame << ',' << r.learning_rate << ',' << r.grad_norm << ','
          << elapsed() << '\n';
      if (cfg.trainer.log_every > 0 && trainer.step() % cfg.trainer.log_every == 0) csv.flush();
    }
    if (on_step) on_step(r);
    if (!out_dir.empty() && cfg.trainer.checkpoint_every > 0 && trainer.step() % cfg.trainer.checkpoint_every == 0 &&
        trainer.step() < cfg.trainer.steps) {
      char name[32];
      std::snprintf(name, sizeof name, "ckpt_%06zu.mtrk", trainer.step());
      save_checkpoint(out_dir / name, make_checkpoint(trainer.network(), cfg, trainer.step()));
    }
  }
  log.wall_seconds = elapsed();
  if (!out_dir.empty()) save_checkpoint(out_dir / "model.mtrk", make_checkpoint(trainer.network(), cfg, trainer.step()));
  return log;
}

template BasicTensor<float> logistic_loss(const BasicTensor<float>&, const std::vector<int>&);
template BasicTensor<double> logistic_loss(const BasicTensor<double>&, const std::vector<int>&);
template BasicTensor<float> response_loss(const BasicTensor<float>&, double, double, double);
template BasicTensor<double> response_loss(const BasicTensor<double>&, double, double, double);
template BasicTensor<float> clip_loss(const MemTrackNetwork<float>&, const TrainingClip&, const TrainerConfig&, bool,
                                      std::mt19937_64&);
template BasicTensor<double> clip_loss(const MemTrackNetwork<double>&, const TrainingClip&, const TrainerConfig&, bool,
                                       std::mt19937_64&);

}  // namespace memtrack
