#include "memtrack/attention.hpp"

#include <cmath>

#include "memtrack/error.hpp"
#include "memtrack/ops.hpp"

namespace memtrack {

template <class T>
PatchGrid<T> pool_patches(const BasicTensor<T>& search_features, std::size_t n) {
  MEMTRACK_EXPECTS(search_features.rank() == 3, "pool_patches: expected h x w x c features");
  auto pooled = avg_pool(search_features, n, 1);
  PatchGrid<T> grid;
  grid.rows = pooled.dim(0);
  grid.cols = pooled.dim(1);
  grid.vectors = reshape(pooled, Shape{grid.rows * grid.cols, pooled.dim(2)});
  return grid;
}

template <class T>
AttentionParams<T> AttentionParams<T>::bind(const ParameterSet<T>& params) {
  return {params.get("attention.score"), params.get("attention.hidden"),
          params.get("attention.feature"), params.get("attention.bias")};
}

void register_attention(std::size_t channels, std::size_t hidden, ParameterSet<float>& params,
                        std::mt19937_64& rng) {
  const std::size_t att = hidden;
  auto make = [&](const char* name, std::size_t fan_in, std::size_t fan_out) {
    const auto v = init::uniform(fan_in * fan_out, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
    params.add(name, Shape{fan_in, fan_out}, std::vector<float>(v.begin(), v.end()));
  };
  make("attention.score", att, 1);
  make("attention.hidden", hidden, att);
  make("attention.feature", channels, att);
  params.add("attention.bias", Shape{att}, std::vector<float>(att, 0.0f));
}

template <class T>
Attended<T> attend(const PatchGrid<T>& grid, const BasicTensor<T>& previous_hidden,
                   const AttentionParams<T>& params) {
  MEMTRACK_EXPECTS(grid.count() >= 1, "attend: empty patch grid");
  const std::size_t att = params.bias.size();
  auto from_hidden = reshape(matmul(previous_hidden, params.hidden), Shape{att});
  auto shared = add(from_hidden, params.bias);
  auto activation = tanh(add_bias(matmul(grid.vectors, params.feature), shared));
  auto scores = reshape(matmul(activation, params.score), Shape{grid.count()});
  auto alpha = softmax(scores);
  auto feature = matmul(reshape(alpha, Shape{1, grid.count()}), grid.vectors);
  return {feature, alpha};
}

template <class T>
BasicTensor<T> attend_no_att(const PatchGrid<T>& grid) {
  MEMTRACK_EXPECTS(grid.count() >= 1, "attend_no_att: empty patch grid");
  const T w = T(1) / static_cast<T>(grid.count());
  return matmul(BasicTensor<T>::full(Shape{1, grid.count()}, w), grid.vectors);
}

template PatchGrid<float> pool_patches(const BasicTensor<float>&, std::size_t);
template PatchGrid<double> pool_patches(const BasicTensor<double>&, std::size_t);
template struct AttentionParams<float>;
template struct AttentionParams<double>;
template Attended<float> attend(const PatchGrid<float>&, const BasicTensor<float>&,
                                const AttentionParams<float>&);
template Attended<double> attend(const PatchGrid<double>&, const BasicTensor<double>&,
                                 const AttentionParams<double>&);
template BasicTensor<float> attend_no_att(const PatchGrid<float>&);
template BasicTensor<double> attend_no_att(const PatchGrid<double>&);

}  // namespace memtrack
