#include "memtrack/memory.hpp"

#include <cmath>

#include "memtrack/error.hpp"
#include "memtrack/ops.hpp"

namespace memtrack {

template <class T>
MemoryState<T> MemoryState<T>::zeros(std::size_t slot_count, std::size_t side, std::size_t channels) {
  MEMTRACK_EXPECTS(slot_count >= 1, "memory: need at least one slot");
  MemoryState m;
  m.slots.assign(slot_count, BasicTensor<T>::zeros(Shape{side, side, channels}));
  m.access = BasicTensor<T>::zeros(Shape{slot_count});
  m.last_read = BasicTensor<T>::zeros(Shape{slot_count});
  m.last_write = BasicTensor<T>::zeros(Shape{slot_count});
  return m;
}

template <class T>
std::vector<BasicTensor<T>> slot_keys(const MemoryState<T>& memory) {
  std::vector<BasicTensor<T>> keys;
  keys.reserve(memory.size());
  for (const auto& slot : memory.slots) {
    auto pooled = avg_pool(slot, slot.dim(0), 1);
    keys.push_back(reshape(pooled, Shape{slot.dim(2)}));
  }
  return keys;
}

template <class T>
BasicTensor<T> read_weights(const std::vector<BasicTensor<T>>& keys, const BasicTensor<T>& read_key,
                            const BasicTensor<T>& strength) {
  MEMTRACK_EXPECTS(!keys.empty(), "read_weights: no memory keys");
  MEMTRACK_EXPECTS(strength.size() == 1 && strength.item() >= T(1) - T(1e-6),
                   "read_weights: read strength must be >= 1");
  std::vector<BasicTensor<T>> sims;
  sims.reserve(keys.size());
  for (const auto& key : keys) sims.push_back(cosine_similarity(read_key, key));
  return softmax(scale_by(concat(sims), strength));
}

template <class T>
BasicTensor<T> read(const MemoryState<T>& memory, const BasicTensor<T>& weights) {
  return weighted_sum(weights, memory.slots);
}

std::size_t hard_read_index(const std::vector<std::vector<double>>& keys,
                            const std::vector<double>& read_key) {
  MEMTRACK_EXPECTS(!keys.empty(), "hard_read: no memory keys");
  std::size_t best = 0;
  double best_sim = -2.0;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    auto a = Tensord::vector(keys[j]);
    auto b = Tensord::vector(read_key);
    const double sim = cosine_similarity(b, a).item();
    if (sim > best_sim) {
      best_sim = sim;
      best = j;
    }
  }
  return best;
}

template <class T>
HardRead<T> hard_read(const MemoryState<T>& memory, const std::vector<BasicTensor<T>>& keys,
                      const BasicTensor<T>& read_key) {
  std::vector<std::vector<double>> plain;
  plain.reserve(keys.size());
  for (const auto& k : keys) plain.emplace_back(k.data().begin(), k.data().end());
  const std::size_t index =
      hard_read_index(plain, std::vector<double>(read_key.data().begin(), read_key.data().end()));
  return {memory.slots[index], index};
}

template <class T>
BasicTensor<T> combine(const BasicTensor<T>& initial, const BasicTensor<T>& retrieved,
                       const BasicTensor<T>& residual_gate) {
  MEMTRACK_EXPECTS(initial.shape() == retrieved.shape(), "combine: template shapes differ");
  return add(initial, scale_channels(retrieved, residual_gate));
}

template <class T>
BasicTensor<T> allocation_weight(const BasicTensor<T>& access) {
  auto values = access.data();
  MEMTRACK_EXPECTS(!values.empty(), "allocation_weight: empty access vector");
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] < values[best]) best = j;
  }
  auto out = BasicTensor<T>::zeros(Shape{values.size()});
  out.mutable_data()[best] = T(1);
  return out;
}

template <class T>
BasicTensor<T> write_weight(const BasicTensor<T>& gates, const BasicTensor<T>& read_weight,
                            const BasicTensor<T>& allocation) {
  MEMTRACK_EXPECTS(gates.size() == 3, "write_weight: expected three gates");
  MEMTRACK_EXPECTS(read_weight.size() == allocation.size(), "write_weight: length mismatch");
  return add(scale_by(read_weight, element(gates, 1)), scale_by(allocation, element(gates, 2)));
}

template <class T>
BasicTensor<T> update_access(const BasicTensor<T>& previous, const BasicTensor<T>& read_weight,
                             const BasicTensor<T>& write_weight, double decay) {
  MEMTRACK_EXPECTS(decay > 0.0 && decay < 1.0, "update_access: decay must lie in (0,1)");
  return add(add(affine(previous, static_cast<T>(decay), T(0)), read_weight), write_weight);
}

template <class T>
BasicTensor<T> erase_factor(const BasicTensor<T>& gates, const BasicTensor<T>& decay) {
  return add(mul(decay, element(gates, 1)), element(gates, 2));
}

template <class T>
std::vector<BasicTensor<T>> write(const std::vector<BasicTensor<T>>& slots,
                                  const BasicTensor<T>& write_weight, const BasicTensor<T>& gates,
                                  const BasicTensor<T>& decay, const BasicTensor<T>& new_template) {
  MEMTRACK_EXPECTS(write_weight.size() == slots.size(), "write: weight length != slot count");
  MEMTRACK_EXPECTS(decay.size() == 1, "write: decay must be a scalar");
  const auto erase = erase_factor(gates, decay);
  std::vector<BasicTensor<T>> out;
  out.reserve(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    MEMTRACK_EXPECTS(slots[j].shape() == new_template.shape(), "write: template shape mismatch");
    auto amount = mul(element(write_weight, j), erase);
    auto keep = affine(amount, T(-1), T(1));
    out.push_back(add(scale_by(slots[j], keep), scale_by(new_template, amount)));
  }
  return out;
}

template <class T>
void queue_write(MemoryState<T>& memory, const BasicTensor<T>& new_template) {
  MEMTRACK_EXPECTS(!memory.slots.empty(), "queue_write: memory has no slots");
  memory.slots[memory.queue_cursor] = new_template;
  memory.queue_cursor = (memory.queue_cursor + 1) % memory.slots.size();
  memory.queue_count = std::min(memory.queue_count + 1, memory.slots.size());
}

template <class T>
BasicTensor<T> queue_read(const MemoryState<T>& memory) {
  if (memory.queue_count == 0) return BasicTensor<T>::zeros(memory.slots.front().shape());
  // Slots fill from index 0, so the occupied ones are the first queue_count.
  std::vector<BasicTensor<T>> items(memory.slots.begin(),
                                    memory.slots.begin() + static_cast<long>(memory.queue_count));
  auto w = BasicTensor<T>::full(Shape{items.size()}, T(1) / static_cast<T>(items.size()));
  return weighted_sum(w, items);
}

#define MEMTRACK_INSTANTIATE_MEMORY(T)                                                             \
  template struct MemoryState<T>;                                                                  \
  template std::vector<BasicTensor<T>> slot_keys(const MemoryState<T>&);                           \
  template BasicTensor<T> read_weights(const std::vector<BasicTensor<T>>&, const BasicTensor<T>&,  \
                                       const BasicTensor<T>&);                                     \
  template BasicTensor<T> read(const MemoryState<T>&, const BasicTensor<T>&);                      \
  template HardRead<T> hard_read(const MemoryState<T>&, const std::vector<BasicTensor<T>>&,        \
                                 const BasicTensor<T>&);                                           \
  template BasicTensor<T> combine(const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                  const BasicTensor<T>&);                                          \
  template BasicTensor<T> allocation_weight(const BasicTensor<T>&);                                \
  template BasicTensor<T> write_weight(const BasicTensor<T>&, const BasicTensor<T>&,               \
                                       const BasicTensor<T>&);                                     \
  template BasicTensor<T> update_access(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                        const BasicTensor<T>&, double);                            \
  template BasicTensor<T> erase_factor(const BasicTensor<T>&, const BasicTensor<T>&);              \
  template std::vector<BasicTensor<T>> write(const std::vector<BasicTensor<T>>&,                   \
                                             const BasicTensor<T>&, const BasicTensor<T>&,         \
                                             const BasicTensor<T>&, const BasicTensor<T>&);        \
  template void queue_write(MemoryState<T>&, const BasicTensor<T>&);                               \
  template BasicTensor<T> queue_read(const MemoryState<T>&);

MEMTRACK_INSTANTIATE_MEMORY(float)
MEMTRACK_INSTANTIATE_MEMORY(double)

}  // namespace memtrack
