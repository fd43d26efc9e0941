#include "memtrack/network.hpp"

#include "memtrack/error.hpp"
#include "memtrack/ops.hpp"

namespace memtrack {

template <class T>
MemTrackNetwork<T>::MemTrackNetwork(ModelConfig cfg, ParameterSet<T> params)
    : cfg_(std::move(cfg)),
      params_(std::move(params)),
      featnet_(cfg_.featnet, params_),
      attention_(AttentionParams<T>::bind(params_)),
      controller_(params_, cfg_.featnet.channels, cfg_.hidden, cfg_.keep_prob) {
  cfg_.validate();
}

template <class T>
MemTrackNetwork<float> MemTrackNetwork<T>::create(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ParameterSet<float> params;
  register_featnet(cfg.featnet, params, rng);
  register_attention(cfg.featnet.channels, cfg.hidden, params, rng);
  register_controller(cfg.featnet.channels, cfg.hidden, params, rng);
  return MemTrackNetwork<float>(cfg, std::move(params));
}

template <class T>
SequenceState<T> MemTrackNetwork<T>::begin(const BasicTensor<T>& initial_template) const {
  const auto& fc = cfg_.featnet;
  MEMTRACK_EXPECTS(initial_template.shape() == (Shape{fc.template_side, fc.template_side, fc.channels}),
                   "network: initial template has shape " + shape_string(initial_template.shape()));
  SequenceState<T> state;
  state.initial_template = initial_template;
  state.controller = controller_.init_state(initial_template);
  state.memory = MemoryState<T>::zeros(cfg_.memory_slots, fc.template_side, fc.channels);
  return state;
}

template <class T>
ReadTrace<T> MemTrackNetwork<T>::read(SequenceState<T>& state, const BasicTensor<T>& search_features,
                                      bool training, std::mt19937_64& rng) const {
  const auto grid = pool_patches(search_features, cfg_.featnet.template_side);
  ReadTrace<T> trace;
  trace.grid_rows = grid.rows;
  trace.grid_cols = grid.cols;

  BasicTensor<T> attended;
  if (cfg_.variant == Variant::NoAtt) {
    attended = attend_no_att(grid);
    trace.attention = BasicTensor<T>::full(Shape{grid.count()}, T(1) / static_cast<T>(grid.count()));
  } else {
    auto att = attend(grid, state.controller.hidden, attention_);
    attended = att.feature;
    trace.attention = att.weights;
  }

  state.controller = controller_.step(attended, state.controller, training, rng);
  trace.signals = controller_.emit(state.controller.hidden);

  auto& memory = state.memory;
  const std::size_t slots = memory.size();
  switch (cfg_.variant) {
    case Variant::Queue: {
      trace.retrieved = queue_read(memory);
      std::vector<T> w(slots, T(0));
      for (std::size_t j = 0; j < memory.queue_count; ++j) w[j] = T(1) / static_cast<T>(memory.queue_count);
      trace.read_weights = BasicTensor<T>::vector(std::move(w));
      break;
    }
    case Variant::HardRead: {
      auto hard = hard_read(memory, slot_keys(memory), trace.signals.read_key);
      trace.retrieved = hard.retrieved;
      auto onehot = BasicTensor<T>::zeros(Shape{slots});
      onehot.mutable_data()[hard.index] = T(1);
      trace.read_weights = onehot;
      break;
    }
    default: {
      trace.read_weights = read_weights(slot_keys(memory), trace.signals.read_key, trace.signals.read_strength);
      trace.retrieved = memtrack::read(memory, trace.read_weights);
      break;
    }
  }
  memory.last_read = trace.read_weights;

  const auto gate = cfg_.variant == Variant::NoRes
                        ? BasicTensor<T>::full(Shape{cfg_.featnet.channels}, T(1))
                        : trace.signals.residual_gate;
  trace.final_template = combine(state.initial_template, trace.retrieved, gate);
  return trace;
}

template <class T>
void MemTrackNetwork<T>::write(SequenceState<T>& state, const ReadTrace<T>& trace,
                               const BasicTensor<T>& new_template) const {
  auto& memory = state.memory;
  BasicTensor<T> write_w;
  if (cfg_.variant == Variant::Queue) {
    auto onehot = BasicTensor<T>::zeros(Shape{memory.size()});
    onehot.mutable_data()[memory.queue_cursor] = T(1);
    write_w = onehot;
    queue_write(memory, new_template);
  } else {
    const auto allocation = allocation_weight(memory.access);
    write_w = write_weight(trace.signals.gates, trace.read_weights, allocation);
    memory.slots = memtrack::write(memory.slots, write_w, trace.signals.gates, trace.signals.decay, new_template);
  }
  // The access vector only feeds the allocation argmin, so it carries no graph.
  memory.access = update_access(memory.access, trace.read_weights.detach(), write_w.detach(),
                                cfg_.access_decay)
                      .detach();
  memory.last_write = write_w;
  ++state.steps;
}

template class MemTrackNetwork<float>;
template class MemTrackNetwork<double>;
template struct SequenceState<float>;
template struct SequenceState<double>;
template struct ReadTrace<float>;
template struct ReadTrace<double>;

}  // namespace memtrack
