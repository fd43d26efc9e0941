#include "memtrack/parameters.hpp"

#include <Eigen/QR>
#include <algorithm>

#include "memtrack/error.hpp"

namespace memtrack {

template <class T>
BasicTensor<T> ParameterSet<T>::add(std::string name, Shape shape, std::vector<T> values) {
  MEMTRACK_EXPECTS(!contains(name), "parameters: duplicate name " + name);
  BasicTensor<T> t(std::move(shape), std::move(values), true);
  entries_.emplace_back(std::move(name), t);
  return t;
}

template <class T>
const BasicTensor<T>& ParameterSet<T>::get(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.first == name) return e.second;
  }
  throw ContractViolation("parameters: no parameter named " + std::string(name));
}

template <class T>
bool ParameterSet<T>::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.first == name; });
}

template <class T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <class T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

template <class T>
std::vector<T> ParameterSet<T>::flat_grad() const {
  std::vector<T> out;
  out.reserve(element_count());
  for (const auto& e : entries_) {
    auto g = e.second.grad();
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

template class ParameterSet<float>;
template class ParameterSet<double>;

namespace init {

std::vector<double> uniform(std::size_t count, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> out(count);
  for (double& v : out) v = dist(rng);
  return out;
}

std::vector<double> orthogonal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const std::size_t big = std::max(rows, cols), small = std::min(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(small));
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  // Sign fix so the result is uniformly distributed.
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[i * cols + j] = rows >= cols ? q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
                                       : q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

}  // namespace init

}  // namespace memtrack
