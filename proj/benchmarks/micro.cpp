// Micro-benchmarks at the desk configuration.
#include <benchmark/benchmark.h>

#include "memtrack/config.hpp"
#include "memtrack/featnet.hpp"
#include "memtrack/network.hpp"
#include "memtrack/synthetic.hpp"
#include "memtrack/tracker.hpp"
#include "memtrack/trainer.hpp"

using namespace memtrack;

namespace {

void BM_ExtractSearch(benchmark::State& state) {
  const Config cfg;
  const auto net = MemTrackNetwork<float>::create(cfg.model, 1);
  const SyntheticVideo video(tier_spec(Tier::Medium, 1));
  const auto patch = crop_patch(video.frame(0), video.truth(0), cfg.model.featnet.context, cfg.model.featnet.search_size);
  NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(net.featnet().extract(patch));
}
BENCHMARK(BM_ExtractSearch)->Unit(benchmark::kMillisecond);

void BM_TrackerStep(benchmark::State& state) {
  const Config cfg;
  const SyntheticVideo video(tier_spec(Tier::Medium, 2));
  std::vector<Image> frames;
  for (std::size_t i = 0; i < video.length(); ++i) frames.push_back(video.frame(i));
  Tracker tracker(MemTrackNetwork<float>::create(cfg.model, 2), cfg.tracker);
  tracker.init(frames[0], video.truth(0));
  std::size_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tracker.step(frames[i]));
    if (++i == frames.size()) {
      state.PauseTiming();
      tracker.init(frames[0], video.truth(0));
      i = 1;
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_TrackerStep)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  Config cfg;
  cfg.trainer.batch_size = static_cast<std::size_t>(state.range(0));
  const auto entries = training_suite(4);
  std::vector<SyntheticVideo> videos;
  for (const auto& e : entries) videos.emplace_back(e.spec, e.name);
  std::vector<const VideoSource*> sources;
  for (const auto& v : videos) sources.push_back(&v);
  Trainer trainer(MemTrackNetwork<float>::create(cfg.model, 3), cfg.trainer, 3);
  const auto batch = trainer.sample_batch(sources);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(batch));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
