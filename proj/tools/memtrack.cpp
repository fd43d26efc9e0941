// memtrack command-line front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "memtrack/bench.hpp"
#include "memtrack/checkpoint.hpp"
#include "memtrack/error.hpp"
#include "memtrack/evaluation.hpp"
#include "memtrack/synthetic.hpp"
#include "memtrack/tracker.hpp"
#include "memtrack/trainer.hpp"

namespace fs = std::filesystem;
using namespace memtrack;

namespace {

void emit(const CsvTable& table, const std::string& out) {
  if (out.empty()) {
    std::cout << to_csv(table);
  } else {
    write_csv(out, table);
    std::cerr << "wrote " << out << '\n';
  }
}

std::vector<const VideoSource*> select(const Suite& suite, const std::string& tier) {
  return tier.empty() ? suite.all() : suite.tier(parse_tier(tier));
}

int cmd_generate(const std::string& out, std::size_t count, std::size_t length, bool training, std::uint64_t first) {
  const auto entries = training ? training_suite(count, length, first) : benchmark_suite(count, length);
  write_suite(out, entries);
  std::cerr << "wrote " << entries.size() << " sequences to " << out << '\n';
  return 0;
}

int cmd_train(const std::string& data, const std::string& config_path, const std::string& out,
              const std::string& variant, std::size_t slots, std::size_t steps, std::size_t workers) {
  Config cfg = config_path.empty() ? Config{} : load_config(config_path);
  if (!variant.empty()) cfg.model.variant = parse_variant(variant);
  if (slots) cfg.model.memory_slots = slots;
  if (steps) cfg.trainer.steps = steps;
  if (workers) cfg.trainer.workers = workers;
  cfg.validate();
  const auto suite = load_suite(data);
  Trainer trainer(MemTrackNetwork<float>::create(cfg.model, cfg.seed), cfg.trainer, cfg.seed);
  double window = 0.0;
  const auto log = run_training(trainer, cfg, suite.all(), out, [&](const StepResult& r) {
    window += r.loss_per_frame;
    if (cfg.trainer.log_every && (r.step + 1) % cfg.trainer.log_every == 0) {
      std::fprintf(stderr, "step %6zu  loss/frame %.4f  lr %.2e  |g| %.3f\n", r.step + 1,
                   window / static_cast<double>(cfg.trainer.log_every), r.learning_rate, r.grad_norm);
      window = 0.0;
    }
  });
  save_config(fs::path(out) / "config.json", cfg);
  std::fprintf(stderr, "trained %zu steps in %.1f s -> %s\n", log.steps.size(), log.wall_seconds,
               (fs::path(out) / "model.mtrk").c_str());
  return 0;
}

int cmd_track(const std::string& model, const std::string& sequence, const std::string& config_path,
              const std::string& out, const std::string& init, const std::string& dump_memory,
              const std::string& dump_attention) {
  const auto ckpt = load_checkpoint(model);
  const TrackerConfig tcfg = config_path.empty() ? ckpt.config.tracker : load_config(config_path).tracker;
  DiskSequence video(sequence);
  Tracker tracker(network_from_checkpoint(ckpt), tcfg);
  const BoundingBox first = init.empty() ? video.truth(0) : parse_box(init);

  std::ofstream mem_out, att_out;
  const std::size_t slots = ckpt.config.model.memory_slots;
  if (!dump_memory.empty()) {
    mem_out.open(dump_memory);
    mem_out << "frame";
    for (const char* prefix : {"read", "write", "access"}) {
      for (std::size_t j = 0; j < slots; ++j) mem_out << ',' << prefix << j;
    }
    mem_out << ",gate_write,gate_read,gate_alloc,read_strength,decay,scale\n";
  }
  if (!dump_attention.empty()) att_out.open(dump_attention);
  std::vector<BoundingBox> boxes{first};
  tracker.init(video.frame(0), first);
  for (std::size_t i = 1; i < video.length(); ++i) {
    const auto report = tracker.step(video.frame(i));
    boxes.push_back(report.box);
    if (mem_out.is_open()) {
      mem_out << i;
      for (const auto* v : {&report.read_weights, &report.write_weights, &report.access}) {
        for (const float x : *v) mem_out << ',' << format_number(x);
      }
      for (const float g : report.gates) mem_out << ',' << format_number(g);
      mem_out << ',' << format_number(report.read_strength) << ',' << format_number(report.decay) << ','
              << format_number(report.scale) << '\n';
    }
    if (att_out.is_open()) {
      // One grid per frame: a row per attention-grid row.
      if (i == 1) {
        att_out << "frame,row";
        for (std::size_t c = 0; c < report.attention_cols; ++c) att_out << ",c" << c;
        att_out << '\n';
      }
      for (std::size_t r = 0; r < report.attention_rows; ++r) {
        att_out << i << ',' << r;
        for (std::size_t c = 0; c < report.attention_cols; ++c) {
          att_out << ',' << format_number(report.attention[r * report.attention_cols + c]);
        }
        att_out << '\n';
      }
    }
  }
  if (out.empty()) {
    for (const auto& b : boxes) std::cout << format_box(b) << '\n';
  } else {
    write_boxes(out, boxes);
  }
  return 0;
}

int cmd_eval(const std::string& results, const std::string& truth, const std::string& curves,
             const std::string& frames) {
  const auto r = evaluate(read_boxes(results), read_boxes(truth));
  std::printf("auc %.4f\nprecision@20 %.4f\nmean_iou %.4f\nframes %zu\n", r.auc, r.precision_at(20.0), r.mean_iou(),
              r.ious.size());
  if (!curves.empty()) write_csv(curves, curves_table(r));
  if (!frames.empty()) write_csv(frames, frames_table(r));
  return 0;
}

int cmd_bench(const std::string& ckpt_path, const std::string& suite_dir, const std::string& tier,
              const std::string& out, std::size_t workers) {
  const auto ckpt = load_checkpoint(ckpt_path);
  const auto suite = load_suite(suite_dir);
  const auto report = run_benchmark(network_from_checkpoint(ckpt), ckpt.config.tracker, select(suite, tier), workers);
  emit(bench_table(report), out);
  std::fprintf(stderr, "mean auc %.4f  precision@20 %.4f  mean iou %.4f\n", report.mean_auc, report.mean_precision20,
               report.mean_iou);
  return 0;
}

int cmd_ablate(const std::string& ckpt_dir, const std::string& suite_dir, const std::string& tier,
               const std::string& out, const std::vector<std::string>& names, std::size_t workers) {
  std::vector<Variant> variants;
  for (const auto& n : names) variants.push_back(parse_variant(n));
  if (variants.empty()) variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
  const auto suite = load_suite(suite_dir);
  emit(ablation_table(run_ablation(variants, select(suite, tier), ckpt_dir, workers)), out);
  return 0;
}

int cmd_sweep(const std::string& ckpt_dir, const std::string& suite_dir, const std::string& tier,
              const std::string& out, std::vector<std::size_t> sizes, std::size_t workers) {
  if (sizes.empty()) sizes = kSweepSizes;
  const auto suite = load_suite(suite_dir);
  emit(sweep_table(memory_size_sweep(sizes, select(suite, tier), ckpt_dir, workers)), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memory-augmented template tracker"};
  app.require_subcommand(1);

  std::string out, data, config, model, sequence, init, dump_memory, dump_attention, results, truth, curves, frames,
      ckpt, suite, tier, ckpt_dir, variant;
  std::size_t count = 20, length = 120, slots = 0, steps = 0, workers = 0;
  std::uint64_t first_seed = 1000;
  bool training = false;
  std::vector<std::string> variants;
  std::vector<std::size_t> sizes;

  auto* gen = app.add_subcommand("generate", "render a synthetic suite to disk");
  gen->add_option("--out", out, "suite directory")->required();
  gen->add_option("--count", count, "number of sequences");
  gen->add_option("--length", length, "frames per sequence");
  gen->add_flag("--training", training, "use the training seed range with interleaved tiers");
  gen->add_option("--first-seed", first_seed, "first seed of the training range");

  auto* train = app.add_subcommand("train", "train a network on a suite directory");
  train->add_option("--data", data, "suite directory")->required();
  train->add_option("--config", config, "JSON config");
  train->add_option("--out", out, "checkpoint directory")->required();
  train->add_option("--variant", variant, "full|noatt|queue|hardread|nores");
  train->add_option("--memory-slots", slots, "override the memory size");
  train->add_option("--steps", steps, "override the step count");
  train->add_option("--workers", workers, "threads per batch");

  auto* track = app.add_subcommand("track", "track one sequence directory");
  track->add_option("--model", model, "checkpoint")->required();
  track->add_option("--sequence", sequence, "sequence directory")->required();
  track->add_option("--config", config, "JSON config (tracker section overrides the checkpoint's)");
  track->add_option("--out", out, "result boxes (default stdout)");
  track->add_option("--init", init, "initial box x,y,w,h (default: first ground-truth line)");
  track->add_option("--dump-memory", dump_memory, "CSV of per-frame memory addressing");
  track->add_option("--dump-attention", dump_attention, "CSV of per-frame attention grids");

  auto* eval = app.add_subcommand("eval", "score a result file against ground truth");
  eval->add_option("--results", results, "x,y,w,h per line")->required();
  eval->add_option("--truth", truth, "x,y,w,h per line")->required();
  eval->add_option("--curves", curves, "write precision/success curves CSV");
  eval->add_option("--frames", frames, "write per-frame errors CSV");

  auto* bench = app.add_subcommand("bench", "evaluate one checkpoint over a suite");
  bench->add_option("--ckpt", ckpt, "checkpoint")->required();
  bench->add_option("--suite", suite, "suite directory")->required();
  bench->add_option("--tier", tier, "easy|medium|drift");
  bench->add_option("--out", out, "CSV output (default stdout)");
  bench->add_option("--workers", workers, "parallel sequences");

  auto* ablate = app.add_subcommand("ablate", "rank variant checkpoints <ckpt-dir>/<variant>.mtrk");
  ablate->add_option("--ckpt-dir", ckpt_dir, "checkpoint directory")->required();
  ablate->add_option("--suite", suite, "suite directory")->required();
  ablate->add_option("--tier", tier, "easy|medium|drift");
  ablate->add_option("--variants", variants, "subset of variants");
  ablate->add_option("--out", out, "CSV output (default stdout)");
  ablate->add_option("--workers", workers, "parallel sequences");

  auto* sweep = app.add_subcommand("sweep", "AUC per memory size from <ckpt-dir>/mem<N>.mtrk");
  sweep->add_option("--ckpt-dir", ckpt_dir, "checkpoint directory")->required();
  sweep->add_option("--suite", suite, "suite directory")->required();
  sweep->add_option("--tier", tier, "easy|medium|drift");
  sweep->add_option("--sizes", sizes, "memory sizes (default 1 2 4 8 16)");
  sweep->add_option("--out", out, "CSV output (default stdout)");
  sweep->add_option("--workers", workers, "parallel sequences");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(out, count, length, training, first_seed);
    if (*train) return cmd_train(data, config, out, variant, slots, steps, workers);
    if (*track) return cmd_track(model, sequence, config, out, init, dump_memory, dump_attention);
    if (*eval) return cmd_eval(results, truth, curves, frames);
    if (*bench) return cmd_bench(ckpt, suite, tier, out, workers);
    if (*ablate) return cmd_ablate(ckpt_dir, suite, tier, out, variants, workers);
    if (*sweep) return cmd_sweep(ckpt_dir, suite, tier, out, sizes, workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
