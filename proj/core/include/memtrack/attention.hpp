#pragma once

#include <cstddef>
#include <random>

#include "memtrack/parameters.hpp"
#include "memtrack/tensor.hpp"

namespace memtrack {

/// Pooled sliding-window patches of a search feature map: L rows of length c.
template <class T>
struct PatchGrid {
  BasicTensor<T> vectors;  // L x c
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t count() const { return rows * cols; }
};

/// Row i is the channel-wise mean of the i-th n x n window (stride 1).
template <class T>
PatchGrid<T> pool_patches(const BasicTensor<T>& search_features, std::size_t n);

template <class T>
struct AttentionParams {
  BasicTensor<T> score;    // d_a x 1   (W^a)
  BasicTensor<T> hidden;   // d_h x d_a (W^h)
  BasicTensor<T> feature;  // c x d_a   (W^f)
  BasicTensor<T> bias;     // d_a

  static AttentionParams bind(const ParameterSet<T>& params);
};

/// Fan-in scaled uniform weights, zero bias; d_a = d_h.
void register_attention(std::size_t channels, std::size_t hidden, ParameterSet<float>& params,
                        std::mt19937_64& rng);

template <class T>
struct Attended {
  BasicTensor<T> feature;  // 1 x c
  BasicTensor<T> weights;  // L
};

/// Soft attention over the patch grid conditioned on the previous hidden
/// state (1 x d_h): scores W^a tanh(W^h h + W^f f_i + b), softmax, weighted sum.
template <class T>
Attended<T> attend(const PatchGrid<T>& grid, const BasicTensor<T>& previous_hidden,
                   const AttentionParams<T>& params);

/// Plain average of all patch vectors (1 x c).
template <class T>
BasicTensor<T> attend_no_att(const PatchGrid<T>& grid);

}  // namespace memtrack
