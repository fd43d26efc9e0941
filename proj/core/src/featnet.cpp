#include "memtrack/featnet.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "memtrack/error.hpp"
#include "memtrack/ops.hpp"

namespace memtrack {

std::size_t ResponseMap::argmax() const {
  MEMTRACK_EXPECTS(!values.empty(), "response: empty map");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double ResponseMap::max() const { return values[argmax()]; }

template <class T>
ResponseMap to_response_map(const BasicTensor<T>& map2d) {
  MEMTRACK_EXPECTS(map2d.rank() == 2, "response: expected a 2-D map");
  ResponseMap out;
  out.rows = map2d.dim(0);
  out.cols = map2d.dim(1);
  out.values.assign(map2d.data().begin(), map2d.data().end());
  return out;
}

template <class T>
BasicTensor<T> image_tensor(const Image& image) {
  std::vector<T> values(image.pixels.begin(), image.pixels.end());
  return BasicTensor<T>(Shape{image.height, image.width, 3}, std::move(values));
}

template <class T>
BasicTensor<T> cross_correlate(const BasicTensor<T>& templ, const BasicTensor<T>& search) {
  MEMTRACK_EXPECTS(templ.rank() == 3 && search.rank() == 3,
                   "cross_correlate: expected h x w x c inputs");
  MEMTRACK_EXPECTS(templ.dim(2) == search.dim(2),
                   "cross_correlate: template has " + std::to_string(templ.dim(2)) +
                       " channels, search has " + std::to_string(search.dim(2)));
  const Shape& ts = templ.shape();
  auto kernel = reshape(templ, Shape{ts[0], ts[1], ts[2], 1});
  auto out = conv2d(search, kernel, 1);
  return reshape(out, Shape{out.dim(0), out.dim(1)});
}

namespace {

double keys_cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
  if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
  return 0.0;
}

}  // namespace

ResponseMap upsample_response(const ResponseMap& response, std::size_t factor) {
  MEMTRACK_EXPECTS(factor >= 1, "upsample_response: factor must be >= 1");
  MEMTRACK_EXPECTS(response.rows > 0 && response.cols > 0, "upsample_response: empty map");
  if (factor == 1) return response;
  ResponseMap out;
  out.rows = (response.rows - 1) * factor + 1;
  out.cols = (response.cols - 1) * factor + 1;
  out.values.assign(out.rows * out.cols, 0.0);

  // Separable weights for one axis: for each output index, 4 taps.
  auto taps = [factor](std::size_t out_len, std::size_t in_len) {
    std::vector<std::array<std::pair<std::size_t, double>, 4>> w(out_len);
    for (std::size_t o = 0; o < out_len; ++o) {
      const double pos = static_cast<double>(o) / static_cast<double>(factor);
      const auto base = static_cast<long>(std::floor(pos));
      for (long k = 0; k < 4; ++k) {
        const long idx = base - 1 + k;
        const long clamped = std::clamp(idx, 0L, static_cast<long>(in_len) - 1);
        w[o][static_cast<std::size_t>(k)] = {static_cast<std::size_t>(clamped),
                                             keys_cubic(pos - static_cast<double>(idx))};
      }
    }
    return w;
  };
  const auto wr = taps(out.rows, response.rows);
  const auto wc = taps(out.cols, response.cols);

  // Columns first, then rows.
  std::vector<double> tmp(response.rows * out.cols, 0.0);
  for (std::size_t r = 0; r < response.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      double acc = 0.0;
      for (const auto& [idx, weight] : wc[c]) acc += weight * response.at(r, idx);
      tmp[r * out.cols + c] = acc;
    }
  }
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      double acc = 0.0;
      for (const auto& [idx, weight] : wr[r]) acc += weight * tmp[idx * out.cols + c];
      out.at(r, c) = acc;
    }
  }
  return out;
}

void register_featnet(const FeatNetConfig& cfg, ParameterSet<float>& params, std::mt19937_64& rng) {
  cfg.validate();
  std::size_t in_channels = 3;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const auto& layer = cfg.layers[i];
    const std::size_t fan_in = layer.kernel * layer.kernel * in_channels;
    const auto w = init::uniform(fan_in * layer.channels, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
    const std::string prefix = "featnet.conv" + std::to_string(i);
    params.add(prefix + ".weight", Shape{layer.kernel, layer.kernel, in_channels, layer.channels},
               std::vector<float>(w.begin(), w.end()));
    params.add(prefix + ".bias", Shape{layer.channels}, std::vector<float>(layer.channels, 0.0f));
    in_channels = layer.channels;
  }
  const double cells = static_cast<double>(cfg.template_side * cfg.template_side * cfg.channels);
  params.add("featnet.response.gain", Shape{1}, {static_cast<float>(1.0 / cells)});
  params.add("featnet.response.bias", Shape{1}, {0.0f});
}

template <class T>
FeatNet<T>::FeatNet(FeatNetConfig cfg, const ParameterSet<T>& params) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t in_channels = 3;
  for (std::size_t i = 0; i < cfg_.layers.size(); ++i) {
    const std::string prefix = "featnet.conv" + std::to_string(i);
    Layer layer{cfg_.layers[i], params.get(prefix + ".weight"), params.get(prefix + ".bias")};
    const Shape expected{layer.spec.kernel, layer.spec.kernel, in_channels, layer.spec.channels};
    if (layer.weight.shape() != expected) {
      throw ContractViolation("featnet: " + prefix + ".weight has shape " +
                              shape_string(layer.weight.shape()) + ", config needs " +
                              shape_string(expected));
    }
    layers_.push_back(std::move(layer));
    in_channels = cfg_.layers[i].channels;
  }
  gain_ = params.get("featnet.response.gain");
  offset_ = params.get("featnet.response.bias");
}

template <class T>
BasicTensor<T> FeatNet<T>::extract(const BasicTensor<T>& patch) const {
  MEMTRACK_EXPECTS(patch.rank() == 3 && patch.dim(2) == 3, "featnet: expected an h x w x 3 patch");
  const std::size_t side = patch.dim(0);
  MEMTRACK_EXPECTS(patch.dim(1) == side && (side == cfg_.object_size || side == cfg_.search_size),
                   "featnet: patch " + shape_string(patch.shape()) + " matches neither object (" +
                       std::to_string(cfg_.object_size) + ") nor search (" +
                       std::to_string(cfg_.search_size) + ") size");
  BasicTensor<T> x = patch;
  for (const auto& layer : layers_) {
    x = add_bias(conv2d(x, layer.weight, layer.spec.stride), layer.bias);
    if (layer.spec.relu) x = relu(x);
    if (layer.spec.pool > 0) x = avg_pool(x, layer.spec.pool, layer.spec.pool);
  }
  return x;
}

template <class T>
BasicTensor<T> FeatNet<T>::respond(const BasicTensor<T>& templ, const BasicTensor<T>& search_features) const {
  auto raw = cross_correlate(templ, search_features);
  const std::size_t cells = raw.size();
  auto scaled = scale_by(raw, gain_);
  auto bias = reshape(add_bias(BasicTensor<T>::zeros(Shape{cells, 1}), offset_), raw.shape());
  return add(scaled, bias);
}

template class FeatNet<float>;
template class FeatNet<double>;
template ResponseMap to_response_map(const BasicTensor<float>&);
template ResponseMap to_response_map(const BasicTensor<double>&);
template BasicTensor<float> image_tensor(const Image&);
template BasicTensor<double> image_tensor(const Image&);
template BasicTensor<float> cross_correlate(const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> cross_correlate(const BasicTensor<double>&, const BasicTensor<double>&);

}  // namespace memtrack
