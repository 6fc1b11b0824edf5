#include "amlgraph/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace aml {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'C', 'G', 'N', 'N'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw Error("truncated checkpoint");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void read_block(std::span<double> block) {
    for (double& v : block) v = get<double>();
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const GcnModel& m, const std::filesystem::path& path) {
  m.check_shapes();
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::uint32_t dims[] = {static_cast<std::uint32_t>(kStructuralInputs),
                                static_cast<std::uint32_t>(m.dims.struct_width),
                                static_cast<std::uint32_t>(m.dims.embed_dim),
                                static_cast<std::uint32_t>(m.dims.fused_width),
                                static_cast<std::uint32_t>(m.dims.hidden_width),
                                static_cast<std::uint32_t>(m.dims.layers)};
  put<std::uint32_t>(out, static_cast<std::uint32_t>(std::size(dims)));
  for (auto d : dims) put<std::uint32_t>(out, d);
  m.for_each_block([&](std::span<const double> block) {
    for (double v : block) put<double>(out, v);
  });

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write checkpoint: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("write failed: " + path.string());
}

GcnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open checkpoint: " + path.string());
  Reader in(std::string(std::istreambuf_iterator<char>(file), {}));

  char magic[4];
  for (char& c : magic) c = in.get<char>();
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("bad checkpoint magic");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error("checkpoint version mismatch: file has " + std::to_string(version) + ", expected " +
                std::to_string(kCheckpointVersion));
  }
  const auto count = in.get<std::uint32_t>();
  if (count != 6) throw Error("checkpoint dimension table has " + std::to_string(count) + " entries, expected 6");
  std::uint32_t d[6];
  for (auto& v : d) v = in.get<std::uint32_t>();
  if (d[0] != kStructuralInputs) throw Error("dimension mismatch: structural input width");
  for (std::size_t i = 1; i < 6; ++i) {
    if (d[i] == 0 || d[i] > (1U << 16)) throw Error("implausible checkpoint dimension " + std::to_string(d[i]));
  }

  ModelDims dims{d[1], d[2], d[3], d[4], d[5]};
  GcnModel m = GcnModel::zeros(dims);
  m.for_each_block([&](std::span<double> block) { in.read_block(block); });
  if (!in.at_end()) throw Error("trailing bytes after checkpoint payload");
  return m;
}

void require_embedding_dim(const GcnModel& m, std::size_t embed_dim) {
  if (m.dims.embed_dim != embed_dim) {
    throw Error("dimension mismatch: checkpoint expects embeddings of width " + std::to_string(m.dims.embed_dim) +
                ", pipeline provides " + std::to_string(embed_dim));
  }
}

}  // namespace aml
