#include "memtrack/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "memtrack/error.hpp"

namespace memtrack {

template <class T>
GradCheckReport grad_check(const ScalarFn<T>& fn, std::vector<BasicTensor<T>> inputs, double eps) {
  for (const auto& in : inputs) {
    MEMTRACK_EXPECTS(in.is_leaf() && in.requires_grad(),
                     "grad_check: inputs must be leaves that require gradients");
  }
  for (auto& in : inputs) in.zero_grad();
  backward(fn(inputs));

  std::vector<std::vector<T>> analytic;
  analytic.reserve(inputs.size());
  for (const auto& in : inputs) analytic.emplace_back(in.grad().begin(), in.grad().end());

  GradCheckReport report;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T original = values[i];
      values[i] = static_cast<T>(original + eps);
      const double plus = static_cast<double>(fn(inputs).item());
      values[i] = static_cast<T>(original - eps);
      const double minus = static_cast<double>(fn(inputs).item());
      values[i] = original;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double ad = static_cast<double>(analytic[k][i]);
      const double err = std::abs(ad - numeric) / std::max(1e-6, std::abs(ad) + std::abs(numeric));
      if (err > report.max_relative_error) {
        report = {err, k, i, ad, numeric};
      }
    }
  }
  return report;
}

template GradCheckReport grad_check(const ScalarFn<float>&, std::vector<BasicTensor<float>>, double);
template GradCheckReport grad_check(const ScalarFn<double>&, std::vector<BasicTensor<double>>,
                                    double);

}  // namespace memtrack
