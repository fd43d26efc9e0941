#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "memtrack/config.hpp"
#include "memtrack/image.hpp"
#include "memtrack/parameters.hpp"
#include "memtrack/tensor.hpp"

namespace memtrack {

/// Plain 2-D score map used on the inference side (no graph).
struct ResponseMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  /// Row-major index of the first maximum (lowest index on ties).
  std::size_t argmax() const;
  double max() const;
};

template <class T>
ResponseMap to_response_map(const BasicTensor<T>& map2d);

/// Patch pixels as an h x w x 3 tensor.
template <class T>
BasicTensor<T> image_tensor(const Image& image);

/// Sliding inner product of an n x n x c template over h x w x c search
/// features; returns an (h-n+1) x (w-n+1) map. Differentiable in both inputs.
template <class T>
BasicTensor<T> cross_correlate(const BasicTensor<T>& templ, const BasicTensor<T>& search);

/// Bicubic (Keys, a = -0.5) upsampling onto a (size-1)*factor+1 grid whose
/// every factor-th sample coincides with an input cell.
ResponseMap upsample_response(const ResponseMap& response, std::size_t factor);

/// Creates the extractor's parameters: conv weights He-uniform, zero biases,
/// and a scalar response gain/bias pair.
void register_featnet(const FeatNetConfig& cfg, ParameterSet<float>& params, std::mt19937_64& rng);

/// Shared-weight extractor for object and search patches.
template <class T>
class FeatNet {
 public:
  FeatNet(FeatNetConfig cfg, const ParameterSet<T>& params);

  const FeatNetConfig& config() const { return cfg_; }
  /// h x w x 3 patch -> feature map. Object-sized input yields n x n x c.
  BasicTensor<T> extract(const BasicTensor<T>& patch) const;
  BasicTensor<T> extract(const ImagePatch& patch) const { return extract(image_tensor<T>(patch.pixels)); }
  /// Cross-correlation followed by the learned scalar gain and bias.
  BasicTensor<T> respond(const BasicTensor<T>& templ, const BasicTensor<T>& search_features) const;

 private:
  struct Layer {
    ConvLayerSpec spec;
    BasicTensor<T> weight;
    BasicTensor<T> bias;
  };
  FeatNetConfig cfg_;
  std::vector<Layer> layers_;
  BasicTensor<T> gain_;
  BasicTensor<T> offset_;
};

}  // namespace memtrack
