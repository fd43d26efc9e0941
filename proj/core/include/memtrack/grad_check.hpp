#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "memtrack/tensor.hpp"

namespace memtrack {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;   // at the worst coordinate
  double numeric = 0.0;
};

template <class T>
using ScalarFn = std::function<BasicTensor<T>(const std::vector<BasicTensor<T>>&)>;

/// Compares reverse-mode gradients of a deterministic scalar function with
/// central differences (f(x+eps) - f(x-eps)) / (2 eps), perturbing every
/// coordinate of every input leaf in place. The error per coordinate is
/// |g_ad - g_fd| / max(1e-6, |g_ad| + |g_fd|); the report holds the maximum.
template <class T>
GradCheckReport grad_check(const ScalarFn<T>& fn, std::vector<BasicTensor<T>> inputs,
                           double eps = 1e-3);

}  // namespace memtrack
