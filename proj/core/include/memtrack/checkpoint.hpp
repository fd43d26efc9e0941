#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memtrack/config.hpp"
#include "memtrack/network.hpp"

namespace memtrack {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

/// Layout (little-endian): "MTRK", u32 version, u64 step, u64 seed,
/// u32 config length + config JSON, then until EOF one record per tensor:
/// u32 name length, name, u32 rank, u32 dims[rank], f32 payload.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  Config config;
  std::vector<NamedArray> tensors;
};

/// Snapshot of a network; the stored model config is the network's own.
Checkpoint make_checkpoint(const MemTrackNetwork<float>& network, const Config& cfg, std::uint64_t step);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws CheckpointError on bad magic, unsupported version or truncation
/// (with the byte offset where reading stopped).
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `params`; every parameter must be present with
/// an identical shape.
void assign_parameters(ParameterSet<float>& params, const Checkpoint& ckpt);
MemTrackNetwork<float> network_from_checkpoint(const Checkpoint& ckpt);

}  // namespace memtrack
