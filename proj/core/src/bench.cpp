#include "memtrack/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "memtrack/checkpoint.hpp"
#include "memtrack/error.hpp"
#include "memtrack/tracker.hpp"

namespace memtrack {

using nlohmann::json;

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "%05zu.png", index + 1);
  return dir / "img" / name;
}

DiskSequence::DiskSequence(std::filesystem::path dir) : dir_(std::move(dir)) {
  name_ = dir_.filename().string();
  if (name_.empty()) name_ = dir_.parent_path().filename().string();
  boxes_ = read_boxes((dir_ / "groundtruth.txt").string());
  if (boxes_.empty()) throw std::runtime_error(dir_.string() + ": empty groundtruth.txt");
}

Image DiskSequence::frame(std::size_t index) const {
  MEMTRACK_EXPECTS(index < boxes_.size(), "sequence " + name_ + ": frame index out of range");
  return read_png(frame_path(dir_, index));
}

void write_sequence(const std::filesystem::path& dir, const VideoSource& video) {
  std::filesystem::create_directories(dir / "img");
  std::vector<BoundingBox> boxes;
  for (std::size_t i = 0; i < video.length(); ++i) {
    write_png(frame_path(dir, i), video.frame(i));
    boxes.push_back(video.truth(i));
  }
  write_boxes((dir / "groundtruth.txt").string(), boxes);
}

std::vector<const VideoSource*> Suite::all() const {
  std::vector<const VideoSource*> out;
  for (const auto& v : videos) out.push_back(v.get());
  return out;
}

std::vector<const VideoSource*> Suite::tier(Tier t) const {
  std::vector<const VideoSource*> out;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (tiers[i] == t) out.push_back(videos[i].get());
  }
  return out;
}

Suite make_suite(const std::vector<SuiteEntry>& entries) {
  Suite s;
  for (const auto& e : entries) {
    s.videos.push_back(std::make_unique<SyntheticVideo>(e.spec, e.name));
    s.tiers.push_back(e.tier);
  }
  return s;
}

void write_suite(const std::filesystem::path& dir, const std::vector<SuiteEntry>& entries) {
  std::filesystem::create_directories(dir);
  json index = json::array();
  for (const auto& e : entries) {
    write_sequence(dir / e.name, SyntheticVideo(e.spec, e.name));
    index.push_back({{"name", e.name}, {"tier", to_string(e.tier)}, {"seed", e.spec.seed}, {"frames", e.spec.length}});
  }
  std::ofstream out(dir / "suite.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "suite.json").string());
  out << json{{"sequences", index}}.dump(2) << '\n';
}

Suite load_suite(const std::filesystem::path& dir) {
  Suite s;
  const auto index_path = dir / "suite.json";
  if (std::filesystem::exists(index_path)) {
    std::ifstream in(index_path);
    json index;
    try {
      index = json::parse(in);
      for (const auto& e : index.at("sequences")) {
        s.videos.push_back(std::make_unique<DiskSequence>(dir / e.at("name").get<std::string>()));
        s.tiers.push_back(parse_tier(e.value("tier", std::string("easy"))));
      }
    } catch (const json::exception& e) {
      throw std::runtime_error(index_path.string() + ": " + e.what());
    }
    return s;
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "groundtruth.txt")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    s.videos.push_back(std::make_unique<DiskSequence>(d));
    s.tiers.push_back(Tier::Easy);
  }
  if (s.videos.empty()) throw std::runtime_error(dir.string() + ": no sequences found");
  return s;
}

BenchReport run_benchmark(const MemTrackNetwork<float>& network, const TrackerConfig& tracker,
                          const std::vector<const VideoSource*>& videos, std::size_t workers) {
  MEMTRACK_EXPECTS(!videos.empty(), "benchmark: no sequences");
  BenchReport report;
  report.sequences.resize(videos.size());
  std::vector<std::string> failures(videos.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < videos.size(); i = next++) {
      try {
        Tracker t(network, tracker);
        auto& score = report.sequences[i];
        score.name = videos[i]->name();
        score.trajectory = track_sequence(t, *videos[i]);
        std::vector<BoundingBox> truth;
        for (std::size_t k = 0; k < videos[i]->length(); ++k) truth.push_back(videos[i]->truth(k));
        score.result = evaluate(score.trajectory, truth);
      } catch (const std::exception& e) {
        failures[i] = videos[i]->name() + ": " + e.what();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, videos.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw TrackingFailure("benchmark: " + f);
  }
  for (const auto& s : report.sequences) {
    report.mean_auc += s.result.auc;
    report.mean_precision20 += s.result.precision_at(20.0);
    report.mean_iou += s.result.mean_iou();
  }
  const double n = static_cast<double>(videos.size());
  report.mean_auc /= n;
  report.mean_precision20 /= n;
  report.mean_iou /= n;
  return report;
}

CsvTable bench_table(const BenchReport& report) {
  CsvTable t{{"sequence", "auc", "precision20", "mean_iou"}, {}};
  for (const auto& s : report.sequences) {
    t.rows.push_back({s.name, format_number(s.result.auc), format_number(s.result.precision_at(20.0)),
                      format_number(s.result.mean_iou())});
  }
  t.rows.push_back({"mean", format_number(report.mean_auc), format_number(report.mean_precision20),
                    format_number(report.mean_iou)});
  return t;
}

std::filesystem::path variant_checkpoint(const std::filesystem::path& dir, Variant variant) {
  return dir / (to_string(variant) + ".mtrk");
}

std::filesystem::path memory_checkpoint(const std::filesystem::path& dir, std::size_t slots) {
  return dir / ("mem" + std::to_string(slots) + ".mtrk");
}

namespace {

void require_files(const std::vector<std::pair<std::string, std::filesystem::path>>& wanted) {
  std::string missing;
  for (const auto& [label, path] : wanted) {
    if (!std::filesystem::exists(path)) missing += "\n  " + label + " (" + path.string() + ")";
  }
  if (!missing.empty()) throw CheckpointError("missing checkpoints:" + missing);
}

}  // namespace

std::vector<AblationRow> run_ablation(const std::vector<Variant>& variants, const std::vector<const VideoSource*>& suite,
                                      const std::filesystem::path& ckpt_dir, std::size_t workers) {
  std::vector<std::pair<std::string, std::filesystem::path>> wanted;
  for (const auto v : variants) wanted.emplace_back(to_string(v), variant_checkpoint(ckpt_dir, v));
  require_files(wanted);
  std::vector<AblationRow> rows;
  for (const auto v : variants) {
    const auto ckpt = load_checkpoint(variant_checkpoint(ckpt_dir, v));
    if (ckpt.config.model.variant != v) {
      throw CheckpointError(variant_checkpoint(ckpt_dir, v).string() + " holds variant " +
                            to_string(ckpt.config.model.variant));
    }
    const auto report = run_benchmark(network_from_checkpoint(ckpt), ckpt.config.tracker, suite, workers);
    rows.push_back({v, report.mean_auc, report.mean_precision20, report.mean_iou});
  }
  return rows;
}

CsvTable ablation_table(const std::vector<AblationRow>& rows) {
  CsvTable t{{"variant", "mean_auc", "precision20", "mean_iou"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({to_string(r.variant), format_number(r.mean_auc), format_number(r.mean_precision20),
                      format_number(r.mean_iou)});
  }
  return t;
}

std::vector<SweepRow> memory_size_sweep(const std::vector<std::size_t>& sizes,
                                        const std::vector<const VideoSource*>& suite,
                                        const std::filesystem::path& ckpt_dir, std::size_t workers) {
  std::vector<std::pair<std::string, std::filesystem::path>> wanted;
  for (const auto n : sizes) wanted.emplace_back("N=" + std::to_string(n), memory_checkpoint(ckpt_dir, n));
  require_files(wanted);
  std::vector<SweepRow> rows;
  for (const auto n : sizes) {
    const auto ckpt = load_checkpoint(memory_checkpoint(ckpt_dir, n));
    if (ckpt.config.model.memory_slots != n) {
      throw CheckpointError(memory_checkpoint(ckpt_dir, n).string() + " has " +
                            std::to_string(ckpt.config.model.memory_slots) + " slots");
    }
    const auto report = run_benchmark(network_from_checkpoint(ckpt), ckpt.config.tracker, suite, workers);
    rows.push_back({n, report.mean_auc});
  }
  return rows;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t{{"N", "auc"}, {}};
  for (const auto& r : rows) t.rows.push_back({std::to_string(r.slots), format_number(r.auc)});
  return t;
}

}  // namespace memtrack
