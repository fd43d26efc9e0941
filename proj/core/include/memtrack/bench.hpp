#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "memtrack/config.hpp"
#include "memtrack/evaluation.hpp"
#include "memtrack/network.hpp"
#include "memtrack/synthetic.hpp"
#include "memtrack/video.hpp"

namespace memtrack {

/// A sequence directory: img/00001.png, img/00002.png, ... and
/// groundtruth.txt with one `x,y,w,h` line per frame.
class DiskSequence final : public VideoSource {
 public:
  explicit DiskSequence(std::filesystem::path dir);
  std::size_t length() const override { return boxes_.size(); }
  Image frame(std::size_t index) const override;
  BoundingBox truth(std::size_t index) const override { return boxes_.at(index); }
  std::string name() const override { return name_; }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string name_;
  std::vector<BoundingBox> boxes_;
};

std::filesystem::path frame_path(const std::filesystem::path& sequence_dir, std::size_t index);
void write_sequence(const std::filesystem::path& dir, const VideoSource& video);

struct Suite {
  std::vector<std::unique_ptr<VideoSource>> videos;
  std::vector<Tier> tiers;

  std::size_t size() const { return videos.size(); }
  std::vector<const VideoSource*> all() const;
  std::vector<const VideoSource*> tier(Tier t) const;
};

/// In-memory synthetic suite.
Suite make_suite(const std::vector<SuiteEntry>& entries);
/// Renders every entry to disk and writes suite.json next to them.
void write_suite(const std::filesystem::path& dir, const std::vector<SuiteEntry>& entries);
/// Reads suite.json, or treats every subdirectory holding groundtruth.txt as
/// a sequence (tier easy) when there is none.
Suite load_suite(const std::filesystem::path& dir);

struct SequenceScore {
  std::string name;
  EvalResult result;
  std::vector<BoundingBox> trajectory;
};

struct BenchReport {
  std::vector<SequenceScore> sequences;
  double mean_auc = 0.0;
  double mean_precision20 = 0.0;
  double mean_iou = 0.0;
};

/// One-pass evaluation of every video; sequences run on up to `workers`
/// threads (0 = hardware concurrency), aggregation is sequential.
BenchReport run_benchmark(const MemTrackNetwork<float>& network, const TrackerConfig& tracker,
                          const std::vector<const VideoSource*>& videos, std::size_t workers = 0);
/// sequence,auc,precision20,mean_iou with a final `mean` row.
CsvTable bench_table(const BenchReport& report);

std::filesystem::path variant_checkpoint(const std::filesystem::path& dir, Variant variant);
std::filesystem::path memory_checkpoint(const std::filesystem::path& dir, std::size_t slots);

struct AblationRow {
  Variant variant = Variant::Full;
  double mean_auc = 0.0;
  double mean_precision20 = 0.0;
  double mean_iou = 0.0;
};

/// Throws CheckpointError naming every variant whose checkpoint is missing.
std::vector<AblationRow> run_ablation(const std::vector<Variant>& variants, const std::vector<const VideoSource*>& suite,
                                      const std::filesystem::path& ckpt_dir, std::size_t workers = 0);
CsvTable ablation_table(const std::vector<AblationRow>& rows);

struct SweepRow {
  std::size_t slots = 0;
  double auc = 0.0;
};

std::vector<SweepRow> memory_size_sweep(const std::vector<std::size_t>& sizes,
                                        const std::vector<const VideoSource*>& suite,
                                        const std::filesystem::path& ckpt_dir, std::size_t workers = 0);
CsvTable sweep_table(const std::vector<SweepRow>& rows);

inline const std::vector<std::size_t> kSweepSizes{1, 2, 4, 8, 16};

}  // namespace memtrack
