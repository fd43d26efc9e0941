#pragma once

#include <cstddef>
#include <vector>

#include "memtrack/controller.hpp"
#include "memtrack/tensor.hpp"

namespace memtrack {

/// External template memory: N slots of n x n x c plus addressing history.
template <class T>
struct MemoryState {
  std::vector<BasicTensor<T>> slots;
  BasicTensor<T> access;      // w^u, N, >= 0
  BasicTensor<T> last_read;   // w^r of the latest read
  BasicTensor<T> last_write;  // w^w of the latest write
  std::size_t queue_cursor = 0;
  std::size_t queue_count = 0;

  /// All slots and vectors zero.
  static MemoryState zeros(std::size_t slot_count, std::size_t side, std::size_t channels);
  std::size_t size() const { return slots.size(); }
};

/// Global average pool of every slot: N keys of length c.
template <class T>
std::vector<BasicTensor<T>> slot_keys(const MemoryState<T>& memory);

/// softmax_j(strength * C(key, slot_key_j)).
template <class T>
BasicTensor<T> read_weights(const std::vector<BasicTensor<T>>& keys, const BasicTensor<T>& read_key,
                            const BasicTensor<T>& strength);

/// sum_j w(j) M(j).
template <class T>
BasicTensor<T> read(const MemoryState<T>& memory, const BasicTensor<T>& weights);

/// Slot with the highest cosine similarity to the key (lowest index on ties).
std::size_t hard_read_index(const std::vector<std::vector<double>>& keys, const std::vector<double>& read_key);

template <class T>
struct HardRead {
  BasicTensor<T> retrieved;
  std::size_t index = 0;
};

template <class T>
HardRead<T> hard_read(const MemoryState<T>& memory, const std::vector<BasicTensor<T>>& keys,
                      const BasicTensor<T>& read_key);

/// T_0 + r (.) T_retr, the gate scaling each channel of the retrieved template.
template <class T>
BasicTensor<T> combine(const BasicTensor<T>& initial, const BasicTensor<T>& retrieved,
                       const BasicTensor<T>& residual_gate);

/// One-hot at argmin of the access vector (lowest index on ties). The result
/// is a constant: no gradient flows through the argmin.
template <class T>
BasicTensor<T> allocation_weight(const BasicTensor<T>& access);

/// g^w * 0 + g^r * w^r + g^a * w^a for gates = [g^w, g^r, g^a].
template <class T>
BasicTensor<T> write_weight(const BasicTensor<T>& gates, const BasicTensor<T>& read_weight,
                            const BasicTensor<T>& allocation);

/// lambda * w^u_prev + w^r + w^w.
template <class T>
BasicTensor<T> update_access(const BasicTensor<T>& previous, const BasicTensor<T>& read_weight,
                             const BasicTensor<T>& write_weight, double decay);

/// e = d^r g^r + g^a.
template <class T>
BasicTensor<T> erase_factor(const BasicTensor<T>& gates, const BasicTensor<T>& decay);

/// M'(j) = M(j) (1 - w^w(j) e) + w^w(j) e T_new for every slot.
template <class T>
std::vector<BasicTensor<T>> write(const std::vector<BasicTensor<T>>& slots,
                                  const BasicTensor<T>& write_weight, const BasicTensor<T>& gates,
                                  const BasicTensor<T>& decay, const BasicTensor<T>& new_template);

/// FIFO write for the queue ablation: store at the cursor, advance mod N.
template <class T>
void queue_write(MemoryState<T>& memory, const BasicTensor<T>& new_template);

/// Mean of the occupied slots; zeros while the queue is empty.
template <class T>
BasicTensor<T> queue_read(const MemoryState<T>& memory);

}  // namespace memtrack
