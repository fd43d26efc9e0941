#include "memtrack/controller.hpp"

#include <cmath>
#include <string>

#include "memtrack/error.hpp"
#include "memtrack/ops.hpp"

namespace memtrack {

namespace {

constexpr const char* kGateNames[4] = {"input", "forget", "output", "candidate"};

void add_dense(ParameterSet<float>& params, const std::string& name, std::size_t in,
               std::size_t out, std::mt19937_64& rng) {
  const auto w = init::uniform(in * out, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  params.add(name + ".weight", Shape{in, out}, std::vector<float>(w.begin(), w.end()));
  params.add(name + ".bias", Shape{out}, std::vector<float>(out, 0.0f));
}

}  // namespace

void register_controller(std::size_t channels, std::size_t hidden, ParameterSet<float>& params,
                         std::mt19937_64& rng) {
  add_dense(params, "controller.init_hidden", channels, hidden, rng);
  add_dense(params, "controller.init_cell", channels, hidden, rng);
  for (std::size_t g = 0; g < 4; ++g) {
    const std::string prefix = std::string("controller.lstm.") + kGateNames[g];
    // Input and recurrent blocks are orthogonalized separately.
    auto wx = init::orthogonal(channels, hidden, rng);
    auto wh = init::orthogonal(hidden, hidden, rng);
    std::vector<float> w;
    w.reserve((channels + hidden) * hidden);
    w.insert(w.end(), wx.begin(), wx.end());
    w.insert(w.end(), wh.begin(), wh.end());
    params.add(prefix + ".weight", Shape{channels + hidden, hidden}, std::move(w));
    params.add(prefix + ".gain", Shape{hidden}, std::vector<float>(hidden, 1.0f));
    params.add(prefix + ".bias", Shape{hidden}, std::vector<float>(hidden, g == 1 ? 1.0f : 0.0f));
  }
  add_dense(params, "controller.read_key", hidden, channels, rng);
  add_dense(params, "controller.read_strength", hidden, 1, rng);
  add_dense(params, "controller.residual_gate", hidden, channels, rng);
  add_dense(params, "controller.gates", hidden, 3, rng);
  add_dense(params, "controller.decay", hidden, 1, rng);
}

template <class T>
Controller<T>::Controller(const ParameterSet<T>& params, std::size_t channels, std::size_t hidden,
                          double keep_prob)
    : channels_(channels), hidden_(hidden), keep_prob_(keep_prob) {
  auto head = [&](const std::string& name) {
    return Head{params.get(name + ".weight"), params.get(name + ".bias")};
  };
  init_hidden_ = head("controller.init_hidden");
  init_cell_ = head("controller.init_cell");
  for (std::size_t g = 0; g < 4; ++g) {
    const std::string prefix = std::string("controller.lstm.") + kGateNames[g];
    gates_[g] = Gate{params.get(prefix + ".weight"), params.get(prefix + ".gain"),
                     params.get(prefix + ".bias")};
    MEMTRACK_EXPECTS(gates_[g].weight.shape() == (Shape{channels + hidden, hidden}),
                     "controller: " + prefix + ".weight has shape " +
                         shape_string(gates_[g].weight.shape()));
  }
  key_ = head("controller.read_key");
  strength_ = head("controller.read_strength");
  residual_ = head("controller.residual_gate");
  mix_ = head("controller.gates");
  decay_ = head("controller.decay");
}

template <class T>
BasicTensor<T> Controller<T>::apply(const Head& head, const BasicTensor<T>& hidden) const {
  return add_bias(matmul(hidden, head.weight), head.bias);
}

template <class T>
ControllerState<T> Controller<T>::init_state(const BasicTensor<T>& initial_template) const {
  MEMTRACK_EXPECTS(initial_template.rank() == 3 && initial_template.dim(0) == initial_template.dim(1),
                   "controller: initial template must be n x n x c");
  MEMTRACK_EXPECTS(initial_template.dim(2) == channels_, "controller: template channel mismatch");
  auto pooled = reshape(avg_pool(initial_template, initial_template.dim(0), 1), Shape{1, channels_});
  return {tanh(apply(init_hidden_, pooled)), tanh(apply(init_cell_, pooled))};
}

template <class T>
ControllerState<T> Controller<T>::step(const BasicTensor<T>& input, const ControllerState<T>& state,
                                       bool training, std::mt19937_64& rng) const {
  MEMTRACK_EXPECTS(input.size() == channels_, "controller: input has " +
                                                  std::to_string(input.size()) +
                                                  " values, expected " + std::to_string(channels_));
  MEMTRACK_EXPECTS(state.hidden.size() == hidden_ && state.cell.size() == hidden_,
                   "controller: state size mismatch");
  auto joined = reshape(concat<T>({input, state.hidden}), Shape{1, channels_ + hidden_});
  std::array<BasicTensor<T>, 4> pre;
  for (std::size_t g = 0; g < 4; ++g) {
    pre[g] = layer_norm(matmul(joined, gates_[g].weight), reshape(gates_[g].gain, Shape{1, hidden_}),
                        reshape(gates_[g].bias, Shape{1, hidden_}));
  }
  auto in_gate = sigmoid(pre[0]);
  auto forget = sigmoid(pre[1]);
  auto out_gate = sigmoid(pre[2]);
  auto candidate = tanh(pre[3]);
  auto cell = add(mul(forget, state.cell), mul(in_gate, candidate));
  auto hidden = mul(out_gate, tanh(cell));
  hidden = dropout(hidden, keep_prob_, training, rng);
  return {hidden, cell};
}

template <class T>
ControlSignals<T> Controller<T>::emit(const BasicTensor<T>& hidden) const {
  ControlSignals<T> s;
  s.read_key = reshape(apply(key_, hidden), Shape{channels_});
  s.read_strength = affine(softplus(reshape(apply(strength_, hidden), Shape{1})), T(1), T(1));
  s.residual_gate = sigmoid(reshape(apply(residual_, hidden), Shape{channels_}));
  s.gates = softmax(reshape(apply(mix_, hidden), Shape{3}));
  s.decay = sigmoid(reshape(apply(decay_, hidden), Shape{1}));
  return s;
}

template struct ControllerState<float>;
template struct ControllerState<double>;
template struct ControlSignals<float>;
template struct ControlSignals<double>;
template class Controller<float>;
template class Controller<double>;

}  // namespace memtrack
