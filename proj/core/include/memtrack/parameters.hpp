#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memtrack/tensor.hpp"

namespace memtrack {

/// Ordered collection of named trainable leaves.
template <class T>
class ParameterSet {
 public:
  using Entry = std::pair<std::string, BasicTensor<T>>;

  /// Registers a new leaf (marked as requiring gradients) and returns it.
  BasicTensor<T> add(std::string name, Shape shape, std::vector<T> values);
  const BasicTensor<T>& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  /// Gradients of all parameters concatenated in registration order.
  std::vector<T> flat_grad() const;

  template <class U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& [name, t] : entries_) {
      out.add(name, t.shape(), std::vector<U>(t.data().begin(), t.data().end()));
    }
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

namespace init {

std::vector<double> uniform(std::size_t count, double bound, std::mt19937_64& rng);
/// Rows x cols matrix with orthonormal columns (or rows, whichever is fewer).
std::vector<double> orthogonal(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

}  // namespace init

}  // namespace memtrack
