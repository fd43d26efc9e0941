#include "memtrack/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "memtrack/error.hpp"

namespace memtrack {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'T', 'R', 'K'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <class U>
  void put(U v) {
    bytes(&v, sizeof v);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}
  bool done() const { return pos_ == data_.size(); }
  std::size_t offset() const { return pos_; }
  void bytes(void* p, std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw CheckpointError(path_ + ": truncated at byte offset " + std::to_string(pos_) + " while reading " + what +
                            " (" + std::to_string(n) + " bytes needed, " + std::to_string(data_.size() - pos_) +
                            " left)");
    }
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  template <class U>
  U get(const char* what) {
    U v;
    bytes(&v, sizeof v, what);
    return v;
  }

 private:
  std::vector<char> data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint make_checkpoint(const MemTrackNetwork<float>& network, const Config& cfg, std::uint64_t step) {
  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.seed = cfg.seed;
  ckpt.config = cfg;
  ckpt.config.model = network.config();
  for (const auto& [name, t] : network.parameters()) {
    ckpt.tensors.push_back({name, t.shape(), std::vector<float>(t.data().begin(), t.data().end())});
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.put<std::uint32_t>(ckpt.version);
  w.put<std::uint64_t>(ckpt.step);
  w.put<std::uint64_t>(ckpt.seed);
  const std::string cfg = config_to_json(ckpt.config);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.size()));
  w.bytes(cfg.data(), cfg.size());
  for (const auto& t : ckpt.tensors) {
    MEMTRACK_EXPECTS(numel(t.shape) == t.values.size(), "checkpoint: '" + t.name + "' shape/value mismatch");
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (const auto d : t.shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.bytes(t.values.data(), t.values.size() * sizeof(float));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());

  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError(path.string() + ": not a MTRK checkpoint");
  Checkpoint ckpt;
  ckpt.version = r.get<std::uint32_t>("version");
  if (ckpt.version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(ckpt.version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  ckpt.step = r.get<std::uint64_t>("step");
  ckpt.seed = r.get<std::uint64_t>("seed");
  std::string cfg(r.get<std::uint32_t>("config length"), '\0');
  r.bytes(cfg.data(), cfg.size(), "config");
  try {
    ckpt.config = config_from_json(cfg);
  } catch (const ConfigError& e) {
    throw CheckpointError(path.string() + ": bad config block: " + e.what());
  }
  while (!r.done()) {
    const std::size_t at = r.offset();
    NamedArray t;
    t.name.resize(r.get<std::uint32_t>("name length"));
    r.bytes(t.name.data(), t.name.size(), "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) throw CheckpointError(path.string() + ": implausible rank at byte offset " + std::to_string(at));
    for (std::uint32_t i = 0; i < rank; ++i) t.shape.push_back(r.get<std::uint32_t>("dims"));
    t.values.resize(numel(t.shape));
    r.bytes(t.values.data(), t.values.size() * sizeof(float), "payload");
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void assign_parameters(ParameterSet<float>& params, const Checkpoint& ckpt) {
  for (const auto& [name, t] : params) {
    const auto it = std::find_if(ckpt.tensors.begin(), ckpt.tensors.end(),
                                 [&](const NamedArray& a) { return a.name == name; });
    if (it == ckpt.tensors.end()) throw CheckpointError("checkpoint has no parameter '" + name + "'");
    if (it->shape != t.shape()) {
      throw CheckpointError("shape mismatch for '" + name + "': checkpoint " + shape_string(it->shape) +
                            ", model " + shape_string(t.shape()));
    }
    auto dst = BasicTensor<float>(t).mutable_data();
    std::copy(it->values.begin(), it->values.end(), dst.begin());
  }
  if (ckpt.tensors.size() != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, model has " +
                          std::to_string(params.size()));
  }
}

MemTrackNetwork<float> network_from_checkpoint(const Checkpoint& ckpt) {
  auto net = MemTrackNetwork<float>::create(ckpt.config.model, ckpt.seed);
  assign_parameters(net.parameters(), ckpt);
  return net;
}

}  // namespace memtrack
