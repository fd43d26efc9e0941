#pragma once

#include <cstdint>
#include <random>

#include "memtrack/attention.hpp"
#include "memtrack/config.hpp"
#include "memtrack/controller.hpp"
#include "memtrack/featnet.hpp"
#include "memtrack/memory.hpp"
#include "memtrack/parameters.hpp"

namespace memtrack {

/// Per-sequence recurrent state: initial template, controller and memory.
template <class T>
struct SequenceState {
  BasicTensor<T> initial_template;
  ControllerState<T> controller;
  MemoryState<T> memory;
  std::size_t steps = 0;
};

/// Result of the read half of a frame: what the controller attended to,
/// the signals it emitted and the template used for matching.
template <class T>
struct ReadTrace {
  BasicTensor<T> attention;  // L weights
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  ControlSignals<T> signals;
  BasicTensor<T> read_weights;
  BasicTensor<T> retrieved;
  BasicTensor<T> final_template;
};

/// The dynamic memory network: shared feature extractor, attentional LSTM
/// controller and addressable template memory, for one ablation variant.
template <class T>
class MemTrackNetwork {
 public:
  MemTrackNetwork(ModelConfig cfg, ParameterSet<T> params);

  /// Freshly initialized single-precision network.
  static MemTrackNetwork<float> create(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParameterSet<T>& parameters() const { return params_; }
  ParameterSet<T>& parameters() { return params_; }
  const FeatNet<T>& featnet() const { return featnet_; }
  const Controller<T>& controller() const { return controller_; }
  const AttentionParams<T>& attention() const { return attention_; }

  template <class U>
  MemTrackNetwork<U> cast() const {
    return MemTrackNetwork<U>(cfg_, params_.template cast<U>());
  }

  /// Controller initialized from T_0, memory zeroed.
  SequenceState<T> begin(const BasicTensor<T>& initial_template) const;
  /// Attend, advance the controller, read memory and form the final template.
  ReadTrace<T> read(SequenceState<T>& state, const BasicTensor<T>& search_features, bool training,
                    std::mt19937_64& rng) const;
  /// Write the new template using the signals of the preceding read.
  void write(SequenceState<T>& state, const ReadTrace<T>& trace, const BasicTensor<T>& new_template) const;

 private:
  ModelConfig cfg_;
  ParameterSet<T> params_;
  FeatNet<T> featnet_;
  AttentionParams<T> attention_;
  Controller<T> controller_;
};

}  // namespace memtrack
