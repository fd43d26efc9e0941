#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "memtrack/tensor.hpp"

namespace memtrack {

// Elementwise arithmetic. Binary forms require equal shapes.
template <class T> BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T> BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T> BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <class T> BasicTensor<T> tanh(const BasicTensor<T>& x);
template <class T> BasicTensor<T> sigmoid(const BasicTensor<T>& x);
template <class T> BasicTensor<T> relu(const BasicTensor<T>& x);
/// log(1 + exp(x)), evaluated without overflow.
template <class T> BasicTensor<T> softplus(const BasicTensor<T>& x);

/// a*x + b with constant a, b.
template <class T> BasicTensor<T> affine(const BasicTensor<T>& x, T a, T b);
/// x * s for a one-element tensor s.
template <class T> BasicTensor<T> scale_by(const BasicTensor<T>& x, const BasicTensor<T>& s);
/// Adds `bias` along the last axis of x (bias length = last dimension).
template <class T> BasicTensor<T> add_bias(const BasicTensor<T>& x, const BasicTensor<T>& bias);
/// Multiplies every position of x by `gain` along the last axis.
template <class T> BasicTensor<T> scale_channels(const BasicTensor<T>& x, const BasicTensor<T>& gain);

/// [m x k] * [k x p] -> [m x p].
template <class T> BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Numerically shifted softmax over all elements (shape preserved).
template <class T> BasicTensor<T> softmax(const BasicTensor<T>& x);

/// Mean pooling of an h x w x c map with a square window.
template <class T>
BasicTensor<T> avg_pool(const BasicTensor<T>& x, std::size_t window, std::size_t stride);

/// Valid (unpadded) convolution. x is h x w x cin, kernels k x k x cin x cout.
template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& kernels, std::size_t stride);

inline constexpr double kCosineEpsilon = 1e-8;

/// x.y / max(|x||y|, 1e-8); returns a one-element tensor.
template <class T>
BasicTensor<T> cosine_similarity(const BasicTensor<T>& x, const BasicTensor<T>& y);

inline constexpr double kLayerNormEpsilon = 1e-5;

/// Normalizes all elements of x to zero mean / unit variance, then applies
/// elementwise gain and bias of the same size.
template <class T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gain,
                          const BasicTensor<T>& bias);

/// Inverted dropout: kept values are scaled by 1/keep_prob while training;
/// identity otherwise.
template <class T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double keep_prob, bool training,
                       std::mt19937_64& rng);

template <class T> BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape);
template <class T> BasicTensor<T> sum(const BasicTensor<T>& x);
template <class T> BasicTensor<T> mean(const BasicTensor<T>& x);
/// Flattens and concatenates its inputs into one vector.
template <class T> BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts);
/// One element as a one-element tensor.
template <class T> BasicTensor<T> element(const BasicTensor<T>& x, std::size_t index);
/// sum_j weights[j] * items[j]; all items share a shape.
template <class T>
BasicTensor<T> weighted_sum(const BasicTensor<T>& weights, const std::vector<BasicTensor<T>>& items);

}  // namespace memtrack
