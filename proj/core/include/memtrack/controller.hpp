#pragma once

#include <array>
#include <cstddef>
#include <random>

#include "memtrack/parameters.hpp"
#include "memtrack/tensor.hpp"

namespace memtrack {

template <class T>
struct ControllerState {
  BasicTensor<T> hidden;  // 1 x d_h
  BasicTensor<T> cell;    // 1 x d_h
};

/// Everything the controller emits per step to drive the memory.
template <class T>
struct ControlSignals {
  BasicTensor<T> read_key;       // c
  BasicTensor<T> read_strength;  // 1, >= 1
  BasicTensor<T> residual_gate;  // c, in (0,1)
  BasicTensor<T> gates;          // 3: write, read, allocation (softmax)
  BasicTensor<T> decay;          // 1, in (0,1)

  T write_gate() const { return gates.at(0); }
  T read_gate() const { return gates.at(1); }
  T allocation_gate() const { return gates.at(2); }
};

/// Creates controller parameters: orthogonal LSTM weights, forget-gate bias
/// 1, other biases 0, unit layer-norm gains, fan-in uniform heads.
void register_controller(std::size_t channels, std::size_t hidden, ParameterSet<float>& params,
                         std::mt19937_64& rng);

/// LSTM memory controller with per-gate layer normalization.
template <class T>
class Controller {
 public:
  Controller(const ParameterSet<T>& params, std::size_t channels, std::size_t hidden,
             double keep_prob);

  std::size_t hidden_size() const { return hidden_; }
  std::size_t channels() const { return channels_; }

  /// h_0 / c_0 from a global n x n average pool of the template through two
  /// separate tanh layers.
  ControllerState<T> init_state(const BasicTensor<T>& initial_template) const;
  /// One LSTM step on input a_t (1 x c). Dropout on h_t only when training.
  ControllerState<T> step(const BasicTensor<T>& input, const ControllerState<T>& state,
                          bool training, std::mt19937_64& rng) const;
  ControlSignals<T> emit(const BasicTensor<T>& hidden) const;

 private:
  struct Gate {
    BasicTensor<T> weight;  // (c + d_h) x d_h
    BasicTensor<T> gain;
    BasicTensor<T> bias;
  };
  struct Head {
    BasicTensor<T> weight;
    BasicTensor<T> bias;
  };
  BasicTensor<T> apply(const Head& head, const BasicTensor<T>& hidden) const;

  std::size_t channels_;
  std::size_t hidden_;
  double keep_prob_;
  Head init_hidden_, init_cell_;
  std::array<Gate, 4> gates_;  // input, forget, output, candidate
  Head key_, strength_, residual_, mix_, decay_;
};

}  // namespace memtrack
