#include <gtest/gtest.h>

#include <cmath>

#include "memtrack/error.hpp"
#include "memtrack/synthetic.hpp"
#include "memtrack/tracker.hpp"
#include "test_util.hpp"

namespace memtrack {
namespace {

ResponseMap map_of(std::size_t rows, std::size_t cols, std::vector<double> v) { return {rows, cols, std::move(v)}; }

TEST(Hann, CenteredPeak) {
  const auto w = hann2d(5, 7);
  EXPECT_DOUBLE_EQ(w[2 * 7 + 3], 1.0);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(w[r * 7 + c], w[(4 - r) * 7 + (6 - c)], 1e-15);
  EXPECT_EQ(hann2d(1, 1)[0], 1.0);
}

TEST(ApplyWindow, Examples) {
  std::mt19937_64 rng(1);
  const auto v = testing::uniform_values(81, rng, -3.0, 5.0);
  const auto base = map_of(9, 9, v);
  const auto plain = apply_window(base, 0.0);
  for (std::size_t i = 0; i < 81; ++i)
    for (std::size_t j = 0; j < 81; ++j) EXPECT_EQ(v[i] < v[j], plain.values[i] < plain.values[j]);
  EXPECT_DOUBLE_EQ(plain.max(), 1.0);
  EXPECT_EQ(apply_window(base, 1.0).argmax(), 4u * 9 + 4);

  std::vector<double> twin(81, 0.0);
  twin[4 * 9 + 4] = 2.0;
  twin[1 * 9 + 7] = 2.0;
  for (double f : {1e-3, 0.15, 0.5, 0.9}) EXPECT_EQ(apply_window(map_of(9, 9, twin), f).argmax(), 4u * 9 + 4);
  EXPECT_THROW(apply_window(base, 1.5), ContractViolation);
}

TEST(Locate, Examples) {
  const BoundingBox box{50.0, 40.0, 20.0, 10.0};
  std::vector<double> v(17 * 17, 0.0);
  v[8 * 17 + 8] = 1.0;
  EXPECT_EQ(locate(map_of(17, 17, v), box, 1.0, 6.0, 8), box);

  // One coarse cell right on a x8 map is 8 fine cells.
  std::vector<double> right(33 * 33, 0.0);
  right[16 * 33 + 24] = 1.0;
  const auto moved = locate(map_of(33, 33, right), box, 1.05, 6.0, 8);
  EXPECT_NEAR(moved.cx, 56.0, 1e-12);
  EXPECT_NEAR(moved.cy, 40.0, 1e-12);
  EXPECT_NEAR(moved.width, 21.0, 1e-12);
  EXPECT_NEAR(moved.height, 10.5, 1e-12);

  // Ties: the first corner in row-major order wins.
  std::vector<double> sym(9, 0.0);
  sym[0] = sym[8] = 1.0;
  const auto tied = locate(map_of(3, 3, sym), box, 1.0, 4.0, 1);
  EXPECT_NEAR(tied.cx, 46.0, 1e-12);
  EXPECT_NEAR(tied.cy, 36.0, 1e-12);
}

TEST(Smoothing, Examples) {
  EXPECT_NEAR(smooth_scale(1.0, 1.05, 0.6), 1.03, 1e-12);
  EXPECT_EQ(smooth_scale(0.8, 0.8, 0.6), 0.8);
}

TEST(ClipBox, Examples) {
  const auto c = clip_box({-5.0, 200.0, 1.0, 500.0}, 160, 120, 2.0);
  EXPECT_EQ(c.cx, 0.0);
  EXPECT_EQ(c.cy, 120.0);
  EXPECT_EQ(c.width, 2.0);
  EXPECT_EQ(c.height, 120.0);
  const BoundingBox inside{30.0, 30.0, 10.0, 12.0};
  EXPECT_EQ(clip_box(inside, 160, 120, 2.0), inside);
}

TEST(TrackerConfig, ScaleFactors) {
  const auto f = TrackerConfig{}.scale_factors();
  ASSERT_EQ(f.size(), 3u);
  EXPECT_NEAR(f[0], 1.0 / 1.05, 1e-12);
  EXPECT_EQ(f[1], 1.0);
  EXPECT_NEAR(f[2], 1.05, 1e-12);
}

SyntheticSpec static_spec() {
  SyntheticSpec s;
  s.length = 21;
  s.seed = 7;
  return s;
}

class TrackerFixture : public ::testing::Test {
 protected:
  Config cfg;
  SyntheticVideo video{static_spec()};
  Tracker make() const { return Tracker(MemTrackNetwork<float>::create(cfg.model, 3), cfg.tracker); }
};

TEST_F(TrackerFixture, InitIsDeterministic) {
  auto a = make(), b = make();
  a.init(video.frame(0), video.truth(0));
  b.init(video.frame(0), video.truth(0));
  const auto& t0 = a.state().sequence.initial_template;
  const auto& fc = cfg.model.featnet;
  EXPECT_EQ(t0.shape(), (Shape{fc.template_side, fc.template_side, fc.channels}));
  ASSERT_EQ(t0.size(), b.state().sequence.initial_template.size());
  for (std::size_t i = 0; i < t0.size(); ++i) EXPECT_EQ(t0.at(i), b.state().sequence.initial_template.at(i));
  for (std::size_t i = 0; i < cfg.model.hidden; ++i)
    EXPECT_EQ(a.state().sequence.controller.hidden.at(i), b.state().sequence.controller.hidden.at(i));
  EXPECT_EQ(a.state().scale, 1.0);
  EXPECT_FALSE(t0.requires_grad());
}

TEST_F(TrackerFixture, DegenerateBoxFails) {
  auto t = make();
  EXPECT_THROW(t.init(video.frame(0), {80.0, 80.0, 0.0, 10.0}), TrackingFailure);
  EXPECT_THROW(t.step(video.frame(1)), std::logic_error);
}

TEST_F(TrackerFixture, FirstStepMatchesInitialTemplate) {
  auto t = make();
  t.init(video.frame(0), video.truth(0));
  const auto report = t.step(video.frame(1));
  const auto& t0 = t.state().sequence.initial_template;
  const auto& fin = t.last_final_template();
  ASSERT_EQ(fin.shape(), t0.shape());
  for (std::size_t i = 0; i < t0.size(); ++i) ASSERT_EQ(fin.at(i), t0.at(i));
  for (float u : t.state().sequence.memory.access.data()) EXPECT_GT(u, 0.0f);
  EXPECT_FALSE(fin.requires_grad());
  EXPECT_EQ(report.read_weights.size(), cfg.model.memory_slots);
  EXPECT_EQ(report.attention.size(), report.attention_rows * report.attention_cols);
  EXPECT_EQ(t.state().frame_index, 1u);
}

TEST_F(TrackerFixture, StaticTargetStaysLocked) {
  auto t = make();
  const auto boxes = track_sequence(t, video);
  ASSERT_EQ(boxes.size(), video.length());
  EXPECT_EQ(boxes[0], video.truth(0));
  for (std::size_t i = 1; i < boxes.size(); ++i) EXPECT_GE(iou(boxes[i], video.truth(i)), 0.6) << "frame " << i;
  // Memory has a fixed number of slots however long the run.
  EXPECT_EQ(t.state().sequence.memory.size(), cfg.model.memory_slots);
}

TEST_F(TrackerFixture, TrajectoriesAreBitwiseRepeatable) {
  SyntheticVideo moving(tier_spec(Tier::Medium, 4, 25));
  auto a = make(), b = make();
  const auto ra = track_sequence(a, moving), rb = track_sequence(b, moving);
  EXPECT_EQ(ra, rb);
  // Re-initializing resets everything.
  EXPECT_EQ(track_sequence(a, moving), ra);
}

}  // namespace
}  // namespace memtrack
