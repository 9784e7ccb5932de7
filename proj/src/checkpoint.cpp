#include "mixad/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mixad/error.hpp"

namespace mixad {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'X', 'C', 'K', '0', '0', '0', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
  char raw[8];
  std::memcpy(raw, &v, 8);
  buf.append(raw, 8);
}

void put_str(std::string& buf, const std::string& s) {
  put_u64(buf, s.size());
  buf.append(s);
}

struct Reader {
  const char* p;
  const char* end;
  std::string context;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n)
      throw IoError("checkpoint: truncated file " + context);
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(p, n);
    p += n;
    return s;
  }
};

}  // namespace

const Tensor& Checkpoint::require(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw IoError("checkpoint: missing tensor " + name);
  return it->second;
}

const std::string& Checkpoint::require_meta(const std::string& key) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) throw IoError("checkpoint: missing metadata key " + key);
  return it->second;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u64(buf, ckpt.metadata.size());
  for (const auto& [k, v] : ckpt.metadata) {
    put_str(buf, k);
    put_str(buf, v);
  }
  put_u64(buf, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_str(buf, name);
    put_u64(buf, t.rank());
    for (std::size_t d : t.shape()) put_u64(buf, d);
    const auto vals = t.values();
    buf.append(reinterpret_cast<const char*>(vals.data()), vals.size() * sizeof(double));
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw IoError("checkpoint: bad magic in " + path.string());

  Reader r{buf.data() + sizeof(kMagic), buf.data() + buf.size(), path.string()};
  Checkpoint ckpt;
  const std::uint64_t nmeta = r.u64();
  for (std::uint64_t i = 0; i < nmeta; ++i) {
    std::string k = r.str();
    ckpt.metadata[k] = r.str();
  }
  const std::uint64_t ntensors = r.u64();
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    std::string name = r.str();
    const std::uint64_t rank = r.u64();
    if (rank == 0 || rank > 4) throw IoError("checkpoint: bad rank for tensor " + name);
    Shape shape(rank);
    std::size_t numel = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      shape[d] = r.u64();
      numel *= shape[d];
    }
    r.need(numel * sizeof(double));
    std::vector<double> data(numel);
    std::memcpy(data.data(), r.p, numel * sizeof(double));
    r.p += numel * sizeof(double);
    ckpt.tensors.emplace(std::move(name), Tensor::from_data(std::move(shape), std::move(data)));
  }
  return ckpt;
}

}  // namespace mixad
