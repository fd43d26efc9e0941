#include "memtrack/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "memtrack/error.hpp"

namespace memtrack {

namespace {

using detail::make_result;
using detail::Node;

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ContractViolation(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                            " vs " + shape_string(b.shape()));
  }
}

template <class T>
bool wants(const Node<T>& self, std::size_t i) {
  return self.inputs[i]->requires_grad;
}

// Unary op whose derivative is a function of (input, output).
template <class T, class F, class D>
BasicTensor<T> unary(const BasicTensor<T>& x, F f, D dfdx) {
  std::vector<T> out(x.size());
  auto in = x.data();
  std::transform(in.begin(), in.end(), out.begin(), f);
  return make_result<T>(x.shape(), std::move(out), {x}, [dfdx](Node<T>& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * dfdx(xv[i], self.value[i]);
  });
}

template <class T>
T stable_softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <class T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!wants(self, k)) continue;
      auto& g = self.inputs[k]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <class T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    if (wants(self, 0)) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <class T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (wants(self, 0)) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

template <class T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
  return unary(x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  return unary(x, [](T v) { return stable_sigmoid(v); }, [](T, T y) { return y * (T(1) - y); });
}

template <class T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  // Subgradient convention: relu'(0) = 0.
  return unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
BasicTensor<T> softplus(const BasicTensor<T>& x) {
  return unary(x, [](T v) { return stable_softplus(v); }, [](T v, T) { return stable_sigmoid(v); });
}

template <class T>
BasicTensor<T> affine(const BasicTensor<T>& x, T a, T b) {
  return unary(x, [a, b](T v) { return a * v + b; }, [a](T, T) { return a; });
}

template <class T>
BasicTensor<T> scale_by(const BasicTensor<T>& x, const BasicTensor<T>& s) {
  MEMTRACK_EXPECTS(s.size() == 1, "scale_by: scale must have one element");
  const T factor = s.item();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor;
  return make_result<T>(x.shape(), std::move(out), {x, s}, [](Node<T>& self) {
    const auto& xv = self.inputs[0]->value;
    const T factor = self.inputs[1]->value[0];
    if (wants(self, 0)) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
    }
    if (wants(self, 1)) {
      T acc = 0;
      for (std::size_t i = 0; i < xv.size(); ++i) acc += self.grad[i] * xv[i];
      self.inputs[1]->grad_buffer()[0] += acc;
    }
  });
}

template <class T>
BasicTensor<T> add_bias(const BasicTensor<T>& x, const BasicTensor<T>& bias) {
  MEMTRACK_EXPECTS(x.rank() >= 1, "add_bias: rank-0 input");
  const std::size_t c = x.shape().back();
  MEMTRACK_EXPECTS(bias.size() == c, "add_bias: bias length " + std::to_string(bias.size()) +
                                         " != last dimension " + std::to_string(c));
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] + bias.data()[i % c];
  return make_result<T>(x.shape(), std::move(out), {x, bias}, [c](Node<T>& self) {
    if (wants(self, 0)) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % c] += self.grad[i];
    }
  });
}

template <class T>
BasicTensor<T> scale_channels(const BasicTensor<T>& x, const BasicTensor<T>& gain) {
  MEMTRACK_EXPECTS(x.rank() >= 1, "scale_channels: rank-0 input");
  const std::size_t c = x.shape().back();
  MEMTRACK_EXPECTS(gain.size() == c, "scale_channels: gain length " + std::to_string(gain.size()) +
                                         " != channel count " + std::to_string(c));
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * gain.data()[i % c];
  return make_result<T>(x.shape(), std::move(out), {x, gain}, [c](Node<T>& self) {
    const auto& xv = self.inputs[0]->value;
    const auto& gv = self.inputs[1]->value;
    if (wants(self, 0)) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * gv[i % c];
    }
    if (wants(self, 1)) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < xv.size(); ++i) g[i % c] += self.grad[i] * xv[i];
    }
  });
}

template <class T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  MEMTRACK_EXPECTS(a.rank() == 2 && b.rank() == 2, "matmul: operands must be matrices, got " +
                                                       shape_string(a.shape()) + " and " +
                                                       shape_string(b.shape()));
  const auto m = static_cast<Eigen::Index>(a.dim(0));
  const auto k = static_cast<Eigen::Index>(a.dim(1));
  const auto p = static_cast<Eigen::Index>(b.dim(1));
  MEMTRACK_EXPECTS(b.dim(0) == a.dim(1), "matmul: inner dimensions differ, " +
                                             shape_string(a.shape()) + " x " +
                                             shape_string(b.shape()));
  std::vector<T> out(static_cast<std::size_t>(m * p));
  Eigen::Map<RowMat<T>>(out.data(), m, p).noalias() =
      Eigen::Map<const RowMat<T>>(a.data().data(), m, k) *
      Eigen::Map<const RowMat<T>>(b.data().data(), k, p);
  return make_result<T>(Shape{a.dim(0), b.dim(1)}, std::move(out), {a, b}, [m, k, p](Node<T>& self) {
    Eigen::Map<const RowMat<T>> dc(self.grad.data(), m, p);
    if (wants(self, 0)) {
      Eigen::Map<RowMat<T>> da(self.inputs[0]->grad_buffer().data(), m, k);
      da.noalias() += dc * Eigen::Map<const RowMat<T>>(self.inputs[1]->value.data(), k, p).transpose();
    }
    if (wants(self, 1)) {
      Eigen::Map<RowMat<T>> db(self.inputs[1]->grad_buffer().data(), k, p);
      db.noalias() += Eigen::Map<const RowMat<T>>(self.inputs[0]->value.data(), m, k).transpose() * dc;
    }
  });
}

template <class T>
BasicTensor<T> softmax(const BasicTensor<T>& x) {
  MEMTRACK_EXPECTS(x.size() > 0, "softmax: empty input");
  auto in = x.data();
  const T peak = *std::max_element(in.begin(), in.end());
  std::vector<T> out(in.size());
  T total = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - peak);
    total += out[i];
  }
  for (T& v : out) v /= total;
  return make_result<T>(x.shape(), std::move(out), {x}, [](Node<T>& self) {
    const auto& y = self.value;
    T dot = 0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += self.grad[i] * y[i];
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < y.size(); ++i) g[i] += y[i] * (self.grad[i] - dot);
  });
}

template <class T>
BasicTensor<T> avg_pool(const BasicTensor<T>& x, std::size_t window, std::size_t stride) {
  MEMTRACK_EXPECTS(x.rank() == 3, "avg_pool: expected h x w x c, got " + shape_string(x.shape()));
  MEMTRACK_EXPECTS(window >= 1 && stride >= 1, "avg_pool: window and stride must be positive");
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  MEMTRACK_EXPECTS(window <= h && window <= w, "avg_pool: window " + std::to_string(window) +
                                                   " exceeds spatial extent " +
                                                   shape_string(x.shape()));
  const std::size_t ho = (h - window) / stride + 1;
  const std::size_t wo = (w - window) / stride + 1;
  const T inv = T(1) / static_cast<T>(window * window);
  auto in = x.data();
  std::vector<T> out(ho * wo * c, T(0));
  for (std::size_t oy = 0; oy < ho; ++oy) {
    for (std::size_t ox = 0; ox < wo; ++ox) {
      T* dst = &out[(oy * wo + ox) * c];
      for (std::size_t dy = 0; dy < window; ++dy) {
        for (std::size_t dx = 0; dx < window; ++dx) {
          const T* src = &in[((oy * stride + dy) * w + ox * stride + dx) * c];
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
        }
      }
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] *= inv;
    }
  }
  return make_result<T>(Shape{ho, wo, c}, std::move(out), {x},
                        [=](Node<T>& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::size_t oy = 0; oy < ho; ++oy) {
                            for (std::size_t ox = 0; ox < wo; ++ox) {
                              const T* src = &self.grad[(oy * wo + ox) * c];
                              for (std::size_t dy = 0; dy < window; ++dy) {
                                for (std::size_t dx = 0; dx < window; ++dx) {
                                  T* dst = &g[((oy * stride + dy) * w + ox * stride + dx) * c];
                                  for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch] * inv;
                                }
                              }
                            }
                          }
                        });
}

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& kernels, std::size_t stride) {
  MEMTRACK_EXPECTS(x.rank() == 3, "conv2d: input must be h x w x c, got " + shape_string(x.shape()));
  MEMTRACK_EXPECTS(kernels.rank() == 4, "conv2d: kernels must be k x k x cin x cout, got " +
                                            shape_string(kernels.shape()));
  MEMTRACK_EXPECTS(stride >= 1, "conv2d: stride must be positive");
  const std::size_t h = x.dim(0), w = x.dim(1), cin = x.dim(2);
  const std::size_t kh = kernels.dim(0), kw = kernels.dim(1), cout = kernels.dim(3);
  MEMTRACK_EXPECTS(kernels.dim(2) == cin, "conv2d: kernel expects " +
                                              std::to_string(kernels.dim(2)) +
                                              " input channels, input has " + std::to_string(cin));
  MEMTRACK_EXPECTS(kh <= h && kw <= w, "conv2d: kernel " + shape_string(kernels.shape()) +
                                           " larger than input " + shape_string(x.shape()));
  const std::size_t ho = (h - kh) / stride + 1;
  const std::size_t wo = (w - kw) / stride + 1;
  const std::size_t patch = kh * kw * cin;

  // im2col: one row per output position.
  auto cols = std::make_shared<std::vector<T>>(ho * wo * patch);
  auto in = x.data();
  for (std::size_t oy = 0; oy < ho; ++oy) {
    for (std::size_t ox = 0; ox < wo; ++ox) {
      T* row = &(*cols)[(oy * wo + ox) * patch];
      for (std::size_t dy = 0; dy < kh; ++dy) {
        const T* src = &in[((oy * stride + dy) * w + ox * stride) * cin];
        std::copy(src, src + kw * cin, row + dy * kw * cin);
      }
    }
  }
  const auto rows = static_cast<Eigen::Index>(ho * wo);
  const auto pk = static_cast<Eigen::Index>(patch);
  const auto co = static_cast<Eigen::Index>(cout);
  std::vector<T> out(ho * wo * cout);
  Eigen::Map<RowMat<T>>(out.data(), rows, co).noalias() =
      Eigen::Map<const RowMat<T>>(cols->data(), rows, pk) *
      Eigen::Map<const RowMat<T>>(kernels.data().data(), pk, co);

  return make_result<T>(Shape{ho, wo, cout}, std::move(out), {x, kernels}, [=](Node<T>& self) {
    Eigen::Map<const RowMat<T>> dout(self.grad.data(), rows, co);
    if (wants(self, 1)) {
      Eigen::Map<RowMat<T>> dk(self.inputs[1]->grad_buffer().data(), pk, co);
      dk.noalias() += Eigen::Map<const RowMat<T>>(cols->data(), rows, pk).transpose() * dout;
    }
    if (wants(self, 0)) {
      RowMat<T> dcols =
          dout * Eigen::Map<const RowMat<T>>(self.inputs[1]->value.data(), pk, co).transpose();
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox) {
          const T* row = dcols.data() + (oy * wo + ox) * patch;
          for (std::size_t dy = 0; dy < kh; ++dy) {
            T* dst = &g[((oy * stride + dy) * w + ox * stride) * cin];
            const T* src = row + dy * kw * cin;
            for (std::size_t i = 0; i < kw * cin; ++i) dst[i] += src[i];
          }
        }
      }
    }
  });
}

template <class T>
BasicTensor<T> cosine_similarity(const BasicTensor<T>& x, const BasicTensor<T>& y) {
  MEMTRACK_EXPECTS(x.size() == y.size(), "cosine_similarity: length mismatch " +
                                             std::to_string(x.size()) + " vs " +
                                             std::to_string(y.size()));
  auto xv = x.data();
  auto yv = y.data();
  T dot = 0, xx = 0, yy = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    dot += xv[i] * yv[i];
    xx += xv[i] * xv[i];
    yy += yv[i] * yv[i];
  }
  const T nx = std::sqrt(xx), ny = std::sqrt(yy);
  const bool guarded = nx * ny < static_cast<T>(kCosineEpsilon);
  const T denom = guarded ? static_cast<T>(kCosineEpsilon) : nx * ny;
  const T c = std::clamp(dot / denom, T(-1), T(1));
  return make_result<T>(Shape{1}, std::vector<T>{c}, {x, y},
                        [guarded, denom, nx, ny, c](Node<T>& self) {
                          const T g = self.grad[0];
                          const auto& xv = self.inputs[0]->value;
                          const auto& yv = self.inputs[1]->value;
                          // d/dx (x.y / (|x||y|)) = y/den - c x/|x|^2; guarded: y/eps.
                          const T cx = guarded ? T(0) : c / (nx * nx);
                          const T cy = guarded ? T(0) : c / (ny * ny);
                          if (wants(self, 0)) {
                            auto& gx = self.inputs[0]->grad_buffer();
                            for (std::size_t i = 0; i < gx.size(); ++i)
                              gx[i] += g * (yv[i] / denom - cx * xv[i]);
                          }
                          if (wants(self, 1)) {
                            auto& gy = self.inputs[1]->grad_buffer();
                            for (std::size_t i = 0; i < gy.size(); ++i)
                              gy[i] += g * (xv[i] / denom - cy * yv[i]);
                          }
                        });
}

template <class T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gain,
                          const BasicTensor<T>& bias) {
  const std::size_t n = x.size();
  MEMTRACK_EXPECTS(n >= 2, "layer_norm: need at least two elements");
  MEMTRACK_EXPECTS(gain.size() == n && bias.size() == n,
                   "layer_norm: gain/bias must match input size " + std::to_string(n));
  auto xv = x.data();
  const T mu = std::accumulate(xv.begin(), xv.end(), T(0)) / static_cast<T>(n);
  T var = 0;
  for (const T v : xv) var += (v - mu) * (v - mu);
  var /= static_cast<T>(n);
  const bool floored = var < static_cast<T>(kLayerNormEpsilon);
  const T sigma = std::sqrt(floored ? static_cast<T>(kLayerNormEpsilon) : var);
  auto normalized = std::make_shared<std::vector<T>>(n);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    (*normalized)[i] = (xv[i] - mu) / sigma;
    out[i] = (*normalized)[i] * gain.data()[i] + bias.data()[i];
  }
  return make_result<T>(x.shape(), std::move(out), {x, gain, bias},
                        [n, sigma, floored, normalized](Node<T>& self) {
                          const auto& xhat = *normalized;
                          const auto& gv = self.inputs[1]->value;
                          if (wants(self, 1)) {
                            auto& gg = self.inputs[1]->grad_buffer();
                            for (std::size_t i = 0; i < n; ++i) gg[i] += self.grad[i] * xhat[i];
                          }
                          if (wants(self, 2)) {
                            auto& gb = self.inputs[2]->grad_buffer();
                            for (std::size_t i = 0; i < n; ++i) gb[i] += self.grad[i];
                          }
                          if (!wants(self, 0)) return;
                          std::vector<T> dxhat(n);
                          T mean_d = 0, mean_dx = 0;
                          for (std::size_t i = 0; i < n; ++i) {
                            dxhat[i] = self.grad[i] * gv[i];
                            mean_d += dxhat[i];
                            mean_dx += dxhat[i] * xhat[i];
                          }
                          mean_d /= static_cast<T>(n);
                          mean_dx /= static_cast<T>(n);
                          // With the variance floored, sigma is a constant.
                          if (floored) mean_dx = 0;
                          auto& gx = self.inputs[0]->grad_buffer();
                          for (std::size_t i = 0; i < n; ++i)
                            gx[i] += (dxhat[i] - mean_d - xhat[i] * mean_dx) / sigma;
                        });
}

template <class T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double keep_prob, bool training,
                       std::mt19937_64& rng) {
  MEMTRACK_EXPECTS(keep_prob > 0.0 && keep_prob <= 1.0,
                   "dropout: keep probability must lie in (0, 1]");
  if (!training || keep_prob == 1.0) return x;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto mask = std::make_shared<std::vector<T>>(x.size());
  const T kept = static_cast<T>(1.0 / keep_prob);
  for (T& m : *mask) m = uniform(rng) < keep_prob ? kept : T(0);
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * (*mask)[i];
  return make_result<T>(x.shape(), std::move(out), {x}, [mask](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*mask)[i];
  });
}

template <class T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  MEMTRACK_EXPECTS(numel(shape) == x.size(), "reshape: cannot view " + shape_string(x.shape()) +
                                                 " as " + shape_string(shape));
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), {x}, [](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <class T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  auto v = x.data();
  const T total = std::accumulate(v.begin(), v.end(), T(0));
  return make_result<T>(Shape{1}, std::vector<T>{total}, {x}, [](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (T& gi : g) gi += self.grad[0];
  });
}

template <class T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  MEMTRACK_EXPECTS(x.size() > 0, "mean: empty input");
  return affine(sum(x), T(1) / static_cast<T>(x.size()), T(0));
}

template <class T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts) {
  MEMTRACK_EXPECTS(!parts.empty(), "concat: no inputs");
  std::vector<T> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  const std::size_t total = out.size();
  return make_result<T>(Shape{total}, std::move(out), parts, [offsets](Node<T>& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      if (!wants(self, k)) continue;
      auto& g = self.inputs[k]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[k] + i];
    }
  });
}

template <class T>
BasicTensor<T> element(const BasicTensor<T>& x, std::size_t index) {
  MEMTRACK_EXPECTS(index < x.size(), "element: index out of range");
  return make_result<T>(Shape{1}, std::vector<T>{x.data()[index]}, {x}, [index](Node<T>& self) {
    self.inputs[0]->grad_buffer()[index] += self.grad[0];
  });
}

template <class T>
BasicTensor<T> weighted_sum(const BasicTensor<T>& weights, const std::vector<BasicTensor<T>>& items) {
  MEMTRACK_EXPECTS(!items.empty(), "weighted_sum: no items");
  MEMTRACK_EXPECTS(weights.size() == items.size(), "weighted_sum: " +
                                                       std::to_string(weights.size()) +
                                                       " weights for " +
                                                       std::to_string(items.size()) + " items");
  const Shape& shape = items.front().shape();
  std::vector<T> out(items.front().size(), T(0));
  for (std::size_t j = 0; j < items.size(); ++j) {
    MEMTRACK_EXPECTS(items[j].shape() == shape, "weighted_sum: items differ in shape");
    const T wj = weights.data()[j];
    auto v = items[j].data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += wj * v[i];
  }
  std::vector<BasicTensor<T>> inputs;
  inputs.reserve(items.size() + 1);
  inputs.push_back(weights);
  inputs.insert(inputs.end(), items.begin(), items.end());
  return make_result<T>(shape, std::move(out), std::move(inputs), [](Node<T>& self) {
    const std::size_t count = self.inputs.size() - 1;
    const auto& wv = self.inputs[0]->value;
    for (std::size_t j = 0; j < count; ++j) {
      const auto& item = *self.inputs[j + 1];
      if (wants(self, 0)) {
        T acc = 0;
        for (std::size_t i = 0; i < item.value.size(); ++i) acc += self.grad[i] * item.value[i];
        self.inputs[0]->grad_buffer()[j] += acc;
      }
      if (wants(self, j + 1)) {
        auto& g = self.inputs[j + 1]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * wv[j];
      }
    }
  });
}

#define MEMTRACK_INSTANTIATE_OPS(T)                                                          \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> tanh(const BasicTensor<T>&);                                       \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                    \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                       \
  template BasicTensor<T> softplus(const BasicTensor<T>&);                                   \
  template BasicTensor<T> affine(const BasicTensor<T>&, T, T);                               \
  template BasicTensor<T> scale_by(const BasicTensor<T>&, const BasicTensor<T>&);            \
  template BasicTensor<T> add_bias(const BasicTensor<T>&, const BasicTensor<T>&);            \
  template BasicTensor<T> scale_channels(const BasicTensor<T>&, const BasicTensor<T>&);      \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);              \
  template BasicTensor<T> softmax(const BasicTensor<T>&);                                    \
  template BasicTensor<T> avg_pool(const BasicTensor<T>&, std::size_t, std::size_t);         \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, std::size_t); \
  template BasicTensor<T> cosine_similarity(const BasicTensor<T>&, const BasicTensor<T>&);   \
  template BasicTensor<T> layer_norm(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                     const BasicTensor<T>&);                                 \
  template BasicTensor<T> dropout(const BasicTensor<T>&, double, bool, std::mt19937_64&);    \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                             \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                        \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                       \
  template BasicTensor<T> concat(const std::vector<BasicTensor<T>>&);                        \
  template BasicTensor<T> element(const BasicTensor<T>&, std::size_t);                       \
  template BasicTensor<T> weighted_sum(const BasicTensor<T>&, const std::vector<BasicTensor<T>>&);

MEMTRACK_INSTANTIATE_OPS(float)
MEMTRACK_INSTANTIATE_OPS(double)

}  // namespace memtrack
