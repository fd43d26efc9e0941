#include "memtrack/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "memtrack/error.hpp"

namespace memtrack {

using nlohmann::json;

std::size_t FeatNetConfig::feature_size(std::size_t input) const {
  std::size_t size = input;
  for (const auto& layer : layers) {
    if (layer.kernel == 0 || layer.stride == 0 || size < layer.kernel) return 0;
    size = (size - layer.kernel) / layer.stride + 1;
    if (layer.pool > 0) {
      if (size < layer.pool) return 0;
      size = (size - layer.pool) / layer.pool + 1;
    }
  }
  return size;
}

std::size_t FeatNetConfig::total_stride() const {
  std::size_t stride = 1;
  for (const auto& layer : layers) {
    stride *= layer.stride;
    if (layer.pool > 0) stride *= layer.pool;
  }
  return stride;
}

void FeatNetConfig::validate() const {
  if (layers.empty()) throw ConfigError("featnet: no layers");
  if (layers.back().channels != channels) {
    throw ConfigError("featnet: last layer has " + std::to_string(layers.back().channels) +
                      " channels, template needs " + std::to_string(channels));
  }
  const std::size_t obj = feature_size(object_size);
  if (obj != template_side) {
    throw ConfigError("featnet: object input " + std::to_string(object_size) + " maps to " +
                      std::to_string(obj) + " cells, expected template side " +
                      std::to_string(template_side));
  }
  if (feature_size(search_size) < template_side) {
    throw ConfigError("featnet: search features smaller than the template");
  }
  if (!(context >= 0.0)) throw ConfigError("featnet: context must be non-negative");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoAtt: return "noatt";
    case Variant::Queue: return "queue";
    case Variant::HardRead: return "hardread";
    case Variant::NoRes: return "nores";
  }
  return "full";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (full, noatt, queue, hardread, nores)");
}

void ModelConfig::validate() const {
  featnet.validate();
  if (hidden == 0) throw ConfigError("model: hidden size must be positive");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ConfigError("model: keep_prob outside (0,1]");
  if (memory_slots == 0) throw ConfigError("model: need at least one memory slot");
  if (!(access_decay > 0.0 && access_decay < 1.0)) throw ConfigError("model: access_decay outside (0,1)");
}

std::vector<double> TrackerConfig::scale_factors() const {
  std::vector<double> out;
  const double half = (static_cast<double>(num_scales) - 1.0) / 2.0;
  for (std::size_t i = 0; i < num_scales; ++i) {
    out.push_back(std::pow(scale_step, static_cast<double>(i) - half));
  }
  return out;
}

void TrackerConfig::validate() const {
  if (!(scale_step >= 1.0)) throw ConfigError("tracker: scale_step must be >= 1");
  if (num_scales == 0 || num_scales % 2 == 0) throw ConfigError("tracker: num_scales must be odd");
  if (!(scale_smooth > 0.0 && scale_smooth <= 1.0)) throw ConfigError("tracker: scale_smooth outside (0,1]");
  if (!(window_factor >= 0.0 && window_factor <= 1.0)) throw ConfigError("tracker: window_factor outside [0,1]");
  if (upsample == 0) throw ConfigError("tracker: upsample must be >= 1");
}

void TrainerConfig::validate() const {
  if (clip_length < 2) throw ConfigError("trainer: clip_length must be >= 2");
  if (batch_size == 0) throw ConfigError("trainer: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("trainer: learning_rate must be positive");
  if (lr_decay_every == 0) throw ConfigError("trainer: lr_decay_every must be positive");
  if (!(label_radius > 0.0)) throw ConfigError("trainer: label_radius must be positive");
}

void Config::validate() const {
  model.validate();
  tracker.validate();
  trainer.validate();
}

namespace {

template <class V>
void read(const json& j, const char* key, V& out) {
  if (j.contains(key)) out = j.at(key).get<V>();
}

json layer_json(const ConvLayerSpec& l) {
  return {{"kernel", l.kernel}, {"channels", l.channels}, {"stride", l.stride}, {"relu", l.relu},
          {"pool", l.pool}};
}

}  // namespace

Config config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Config cfg;
  try {
    read(root, "seed", cfg.seed);
    if (root.contains("model")) {
      const json& m = root["model"];
      read(m, "hidden", cfg.model.hidden);
      read(m, "keep_prob", cfg.model.keep_prob);
      read(m, "memory_slots", cfg.model.memory_slots);
      read(m, "access_decay", cfg.model.access_decay);
      if (m.contains("variant")) cfg.model.variant = parse_variant(m["variant"].get<std::string>());
      if (m.contains("featnet")) {
        const json& f = m["featnet"];
        auto& fc = cfg.model.featnet;
        read(f, "object_size", fc.object_size);
        read(f, "search_size", fc.search_size);
        read(f, "template_side", fc.template_side);
        read(f, "channels", fc.channels);
        read(f, "context", fc.context);
        if (f.contains("layers")) {
          fc.layers.clear();
          for (const json& l : f["layers"]) {
            ConvLayerSpec spec;
            read(l, "kernel", spec.kernel);
            read(l, "channels", spec.channels);
            read(l, "stride", spec.stride);
            read(l, "relu", spec.relu);
            read(l, "pool", spec.pool);
            fc.layers.push_back(spec);
          }
        }
      }
    }
    if (root.contains("tracker")) {
      const json& t = root["tracker"];
      read(t, "scale_step", cfg.tracker.scale_step);
      read(t, "num_scales", cfg.tracker.num_scales);
      read(t, "scale_smooth", cfg.tracker.scale_smooth);
      read(t, "window_factor", cfg.tracker.window_factor);
      read(t, "upsample", cfg.tracker.upsample);
      read(t, "min_side", cfg.tracker.min_side);
    }
    if (root.contains("trainer")) {
      const json& t = root["trainer"];
      auto& tc = cfg.trainer;
      read(t, "clip_length", tc.clip_length);
      read(t, "batch_size", tc.batch_size);
      read(t, "learning_rate", tc.learning_rate);
      read(t, "lr_decay", tc.lr_decay);
      read(t, "lr_decay_every", tc.lr_decay_every);
      read(t, "adam_beta1", tc.adam_beta1);
      read(t, "adam_beta2", tc.adam_beta2);
      read(t, "adam_epsilon", tc.adam_epsilon);
      read(t, "clip_norm", tc.clip_norm);
      read(t, "label_radius", tc.label_radius);
      read(t, "stretch", tc.stretch);
      read(t, "translate", tc.translate);
      read(t, "teacher_forcing", tc.teacher_forcing);
      read(t, "write_gradients", tc.write_gradients);
      read(t, "steps", tc.steps);
      read(t, "log_every", tc.log_every);
      read(t, "checkpoint_every", tc.checkpoint_every);
      read(t, "workers", tc.workers);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const Config& cfg) {
  json layers = json::array();
  for (const auto& l : cfg.model.featnet.layers) layers.push_back(layer_json(l));
  const auto& fc = cfg.model.featnet;
  const auto& tc = cfg.trainer;
  json root = {
      {"seed", cfg.seed},
      {"model",
       {{"hidden", cfg.model.hidden},
        {"keep_prob", cfg.model.keep_prob},
        {"memory_slots", cfg.model.memory_slots},
        {"access_decay", cfg.model.access_decay},
        {"variant", to_string(cfg.model.variant)},
        {"featnet",
         {{"object_size", fc.object_size},
          {"search_size", fc.search_size},
          {"template_side", fc.template_side},
          {"channels", fc.channels},
          {"context", fc.context},
          {"layers", layers}}}}},
      {"tracker",
       {{"scale_step", cfg.tracker.scale_step},
        {"num_scales", cfg.tracker.num_scales},
        {"scale_smooth", cfg.tracker.scale_smooth},
        {"window_factor", cfg.tracker.window_factor},
        {"upsample", cfg.tracker.upsample},
        {"min_side", cfg.tracker.min_side}}},
      {"trainer",
       {{"clip_length", tc.clip_length},
        {"batch_size", tc.batch_size},
        {"learning_rate", tc.learning_rate},
        {"lr_decay", tc.lr_decay},
        {"lr_decay_every", tc.lr_decay_every},
        {"adam_beta1", tc.adam_beta1},
        {"adam_beta2", tc.adam_beta2},
        {"adam_epsilon", tc.adam_epsilon},
        {"clip_norm", tc.clip_norm},
        {"label_radius", tc.label_radius},
        {"stretch", tc.stretch},
        {"translate", tc.translate},
        {"teacher_forcing", tc.teacher_forcing},
        {"write_gradients", tc.write_gradients},
        {"steps", tc.steps},
        {"log_every", tc.log_every},
        {"checkpoint_every", tc.checkpoint_every},
        {"workers", tc.workers}}}};
  return root.dump(2);
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const std::filesystem::path& path, const Config& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write " + path.string());
  out << config_to_json(config) << '\n';
}

}  // namespace memtrack
