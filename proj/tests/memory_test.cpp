#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "memtrack/error.hpp"
#include "memtrack/memory.hpp"
#include "memory_oracle.hpp"
#include "test_util.hpp"

namespace memtrack {
namespace {

using testing::random_const;
using testing::random_leaf;

Tensord vec(std::vector<double> v) { return Tensord::vector(std::move(v)); }

MemoryState<double> random_memory(std::size_t slots, std::size_t n, std::size_t c, std::mt19937_64& rng) {
  auto m = MemoryState<double>::zeros(slots, n, c);
  for (auto& s : m.slots) s = random_const({n, n, c}, rng);
  return m;
}

Tensord random_simplex(std::size_t k, std::mt19937_64& rng, double spread = 2.0) {
  return softmax(random_const({k}, rng, -spread, spread));
}

void expect_equal(const Tensord& a, const Tensord& b, double tol) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.at(i), b.at(i), tol) << "at " << i;
}

TEST(SlotKeys, Oracles) {
  std::mt19937_64 rng(1);
  auto m = MemoryState<double>::zeros(3, 4, 2);
  m.slots[1] = Tensord::full({4, 4, 2}, 0.7);
  m.slots[2] = random_const({4, 4, 2}, rng);
  const auto keys = slot_keys(m);
  ASSERT_EQ(keys.size(), 3u);
  for (double v : keys[0].data()) EXPECT_EQ(v, 0.0);
  for (double v : keys[1].data()) EXPECT_NEAR(v, 0.7, 1e-12);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double mean = 0.0;
    for (std::size_t p = 0; p < 16; ++p) mean += m.slots[2].at(p * 2 + ch);
    EXPECT_NEAR(keys[2].at(ch), mean / 16.0, 1e-12);
  }
}

TEST(ReadWeights, Examples) {
  const auto fresh = read_weights<double>({Tensord::zeros({3}), Tensord::zeros({3}), Tensord::zeros({3}),
                                           Tensord::zeros({3})},
                                          vec({0.3, -1.0, 2.0}), Tensord::scalar(3.0));
  for (double w : fresh.data()) EXPECT_NEAR(w, 0.25, 1e-12);

  const auto two = read_weights<double>({vec({1, 0}), vec({0, 1})}, vec({1, 0}), Tensord::vector({1.0}));
  EXPECT_NEAR(two.at(0), std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-12);
  EXPECT_NEAR(two.at(0), 0.7311, 1e-4);
  EXPECT_NEAR(two.at(1), 0.2689, 1e-4);

  const auto sharp = read_weights<double>({vec({1, 0}), vec({0, 1}), vec({-1, 0})}, vec({1, 0}),
                                          Tensord::vector({50.0}));
  EXPECT_GE(sharp.at(0), 1.0 - 1e-6);

  EXPECT_THROW(read_weights<double>({vec({1, 0})}, vec({1, 0}), Tensord::vector({0.5})), ContractViolation);
}

TEST(Read, Examples) {
  std::mt19937_64 rng(2);
  const auto m = random_memory(3, 2, 3, rng);
  const auto one_hot = read(m, vec({0, 1, 0}));
  for (std::size_t i = 0; i < one_hot.size(); ++i) EXPECT_EQ(one_hot.at(i), m.slots[1].at(i));

  auto same = m;
  same.slots = {m.slots[0], m.slots[0], m.slots[0]};
  expect_equal(read(same, random_simplex(3, rng)), m.slots[0], 1e-12);

  auto pair = MemoryState<double>::zeros(2, 2, 3);
  pair.slots = {m.slots[0], m.slots[2]};
  const auto mean = read(pair, vec({0.5, 0.5}));
  for (std::size_t i = 0; i < mean.size(); ++i)
    EXPECT_NEAR(mean.at(i), 0.5 * (m.slots[0].at(i) + m.slots[2].at(i)), 1e-12);
}

TEST(HardRead, Examples) {
  std::mt19937_64 rng(3);
  auto m = random_memory(4, 2, 3, rng);
  const auto keys = slot_keys(m);
  const auto k = keys[2];
  const auto hr = hard_read(m, keys, k);
  EXPECT_EQ(hr.index, 2u);
  for (std::size_t i = 0; i < hr.retrieved.size(); ++i) EXPECT_EQ(hr.retrieved.at(i), m.slots[2].at(i));

  const auto zero = MemoryState<double>::zeros(4, 2, 3);
  EXPECT_EQ(hard_read(zero, slot_keys(zero), vec({1, 2, 3})).index, 0u);
  EXPECT_EQ(hard_read_index({{1, 0}, {2, 0}, {0, 1}}, {1, 0}), 0u);  // tie in cosine, lowest index

  // Cross-check: when the best similarity is well separated the sharp soft
  // read collapses onto the same slot.
  const auto w = read_weights(std::vector<Tensord>{vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})}, vec({0.1, 1, 0}),
                              Tensord::vector({50.0}));
  EXPECT_EQ(hard_read_index({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0.1, 1, 0}), 1u);
  EXPECT_GE(w.at(1), 1.0 - 1e-6);
}

TEST(Combine, Examples) {
  std::mt19937_64 rng(4);
  const auto t0 = random_const({3, 3, 4}, rng);
  const auto retr = random_const({3, 3, 4}, rng);
  expect_equal(combine(t0, retr, Tensord::zeros({4})), t0, 0.0);
  const auto full = combine(t0, retr, Tensord::full({4}, 1.0));
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full.at(i), t0.at(i) + retr.at(i), 1e-15);
  const auto mask = combine(t0, retr, vec({1, 0, 0, 0}));
  for (std::size_t i = 0; i < mask.size(); ++i)
    EXPECT_NEAR(mask.at(i), t0.at(i) + (i % 4 == 0 ? retr.at(i) : 0.0), 1e-15);
  EXPECT_THROW(combine(t0, random_const({3, 3, 3}, rng), vec({1, 0, 0})), ContractViolation);
}

TEST(Allocation, Examples) {
  const auto a = allocation_weight(vec({0.5, 0.1, 0.3, 0.9}));
  EXPECT_EQ(std::vector<double>(a.data().begin(), a.data().end()), (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(allocation_weight(vec({0.2, 0.2, 0.2})).at(0), 1.0);
  EXPECT_EQ(allocation_weight(vec({0.1, 0.2, 0.3})).at(0), 1.0);
  auto leaf = Tensord::vector({0.4, 0.2}, true);
  EXPECT_FALSE(allocation_weight(leaf).requires_grad());
}

TEST(WriteWeight, Examples) {
  const auto wr = vec({0.5, 0.5});
  const auto wa = vec({1, 0});
  const auto none = write_weight(vec({1, 0, 0}), wr, wa);
  for (double v : none.data()) EXPECT_EQ(v, 0.0);
  expect_equal(write_weight(vec({0, 1, 0}), wr, wa), wr, 0.0);
  const auto mixed = write_weight(vec({0.2, 0.5, 0.3}), wr, wa);
  EXPECT_NEAR(mixed.at(0), 0.55, 1e-12);
  EXPECT_NEAR(mixed.at(1), 0.25, 1e-12);
}

TEST(Access, Examples) {
  expect_equal(update_access(Tensord::zeros({3}), vec({1, 0, 0}), vec({1, 0, 0}), 0.99), vec({2, 0, 0}), 0.0);
  expect_equal(update_access(vec({1, 2, 3}), Tensord::zeros({3}), Tensord::zeros({3}), 0.99), vec({0.99, 1.98, 2.97}),
               1e-12);
  EXPECT_THROW(update_access(vec({1}), vec({1}), vec({1}), 1.0), ContractViolation);
}

TEST(Access, BoundedByGeometricSeries) {
  std::mt19937_64 rng(5);
  auto access = Tensord::zeros({4});
  double peak = 0.0;
  for (int t = 0; t < 10000; ++t) {
    // Worst case hammers slot 0; the random half spreads mass elsewhere.
    const bool worst = t % 2 == 0 || t > 5000;
    const auto wr = worst ? vec({1, 0, 0, 0}) : random_simplex(4, rng);
    auto ww = worst ? vec({1, 0, 0, 0}) : affine(random_simplex(4, rng), 0.7, 0.0);
    access = update_access(access, wr, ww, 0.99);
    for (double v : access.data()) peak = std::max(peak, v);
  }
  EXPECT_LE(peak, 200.0);
  EXPECT_GT(peak, 199.0);
}

TEST(Write, Examples) {
  std::mt19937_64 rng(6);
  const auto m = random_memory(3, 2, 2, rng);
  const auto tnew = random_const({2, 2, 2}, rng);
  const auto d = Tensord::vector({0.5});

  const auto same = write(m.slots, Tensord::zeros({3}), vec({0.2, 0.5, 0.3}), d, tnew);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < same[j].size(); ++i) EXPECT_EQ(same[j].at(i), m.slots[j].at(i));

  const auto replaced = write(m.slots, vec({0, 1, 0}), vec({0, 0, 1}), d, tnew);
  expect_equal(replaced[1], tnew, 1e-15);
  expect_equal(replaced[0], m.slots[0], 0.0);

  const auto blended = write(m.slots, vec({0, 0, 1}), vec({0, 1, 0}), d, tnew);
  for (std::size_t i = 0; i < tnew.size(); ++i)
    EXPECT_NEAR(blended[2].at(i), 0.5 * m.slots[2].at(i) + 0.5 * tnew.at(i), 1e-15);

  EXPECT_NEAR(erase_factor(vec({0.2, 0.5, 0.3}), d).item(), 0.55, 1e-15);
  EXPECT_THROW(write(m.slots, vec({0, 1}), vec({0, 0, 1}), d, tnew), ContractViolation);
}

TEST(Write, IncrementalMatchesDirectEvaluation) {
  EXPECT_LE(testing::memory_write_oracle_error(7, 100, 50), 1e-6);
}

TEST(Write, SlotsStayInConvexEnvelope) {
  const std::size_t N = 4, n = 2, c = 3, size = n * n * c;
  std::mt19937_64 rng(8);
  for (int seq = 0; seq < 50; ++seq) {
    auto m = random_memory(N, n, c, rng);
    std::vector<std::vector<double>> lo(N, std::vector<double>(size)), hi = lo;
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = 0; i < size; ++i) lo[j][i] = hi[j][i] = m.slots[j].at(i);
    auto access = Tensord::zeros({N});
    for (int t = 0; t < 30; ++t) {
      const auto tnew = random_const({n, n, c}, rng, -2.0, 2.0);
      const auto gates = random_simplex(3, rng);
      const auto wr = random_simplex(N, rng);
      const auto ww = write_weight(gates, wr, allocation_weight(access));
      access = update_access(access, wr, ww, 0.99);
      m.slots = write(m.slots, ww, gates, Tensord::vector({random_const({1}, rng, 0.0, 1.0).item()}), tnew);
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < size; ++i) {
          lo[j][i] = std::min(lo[j][i], tnew.at(i));
          hi[j][i] = std::max(hi[j][i], tnew.at(i));
          ASSERT_GE(m.slots[j].at(i), lo[j][i] - 1e-12);
          ASSERT_LE(m.slots[j].at(i), hi[j][i] + 1e-12);
        }
    }
  }
}

TEST(Write, ClosedWriteGateLeavesMemoryBitwise) {
  std::mt19937_64 rng(9);
  auto m = random_memory(4, 2, 3, rng);
  const auto initial = m;
  auto access = Tensord::zeros({4});
  for (int t = 0; t < 40; ++t) {
    const auto gates = vec({1, 0, 0});
    const auto wr = read_weights(slot_keys(m), random_const({3}, rng), Tensord::vector({2.0}));
    const auto ww = write_weight(gates, wr, allocation_weight(access));
    access = update_access(access, wr, ww, 0.99);
    m.slots = write(m.slots, ww, gates, Tensord::vector({0.3}), random_const({2, 2, 3}, rng));
  }
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(m.slots[j].at(i), initial.slots[j].at(i));
}

TEST(Queue, Fifo) {
  auto m = MemoryState<double>::zeros(3, 1, 2);
  EXPECT_EQ(queue_read(m).at(0), 0.0);
  for (int k = 1; k <= 3; ++k) queue_write(m, Tensord::full({1, 1, 2}, k));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m.slots[j].at(0), static_cast<double>(j + 1));
  EXPECT_NEAR(queue_read(m).at(1), 2.0, 1e-15);
  queue_write(m, Tensord::full({1, 1, 2}, 10.0));
  EXPECT_EQ(m.slots[0].at(0), 10.0);
  EXPECT_NEAR(queue_read(m).at(0), 5.0, 1e-15);

  auto partial = MemoryState<double>::zeros(4, 1, 1);
  queue_write(partial, Tensord::full({1, 1, 1}, 2.0));
  queue_write(partial, Tensord::full({1, 1, 1}, 4.0));
  EXPECT_NEAR(queue_read(partial).at(0), 3.0, 1e-15);
}

TEST(MemoryGradient, AddressingAndWrite) {
  std::mt19937_64 rng(10);
  for (int instance = 0; instance < 5; ++instance) {
    const std::size_t N = 3, n = 2, c = 3;
    std::vector<Tensord> slots;
    for (std::size_t j = 0; j < N; ++j) slots.push_back(random_leaf({n, n, c}, rng));
    const auto key = random_leaf({c}, rng);
    const auto beta = Tensord::vector({1.5 + random_const({1}, rng, 0, 1).item()}, true);
    const auto logits = random_leaf({3}, rng);
    const auto decay = Tensord::vector({0.4}, true);
    const auto t0 = random_leaf({n, n, c}, rng);
    const auto gate = random_leaf({c}, rng, 0.1, 0.9);
    const auto tnew = random_leaf({n, n, c}, rng);
    const auto prev = random_leaf({N}, rng, 0.0, 3.0);
    const auto alloc = vec({0, 1, 0});

    std::vector<Tensord> inputs = slots;
    for (const auto& t : {key, beta, logits, decay, t0, gate, tnew, prev}) inputs.push_back(t);
    const auto report = grad_check<double>(
        [&](const std::vector<Tensord>&) {
          MemoryState<double> m;
          m.slots = slots;
          const auto gates = softmax(logits);
          const auto wr = read_weights(slot_keys(m), key, beta);
          const auto final_t = combine(t0, read(m, wr), gate);
          const auto ww = write_weight(gates, wr, alloc);
          const auto written = write(m.slots, ww, gates, decay, tnew);
          Tensord total = add(testing::project(final_t, 1), testing::project(update_access(prev, wr, ww, 0.99), 2));
          for (std::size_t j = 0; j < N; ++j) total = add(total, testing::project(written[j], 10 + j));
          return total;
        },
        inputs, 1e-5);
    EXPECT_LE(report.max_relative_error, 1e-3) << "input " << report.worst_input;
  }
}

}  // namespace
}  // namespace memtrack
