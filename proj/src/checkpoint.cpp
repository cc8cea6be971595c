#include "bnls/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace bnls {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'B', 'N', 'L', 'S', 'C', 'K', 'P', 'T'};
constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 8 * 2 + 8 * 6 + 8 * 2 + 8 * 7;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto *p = reinterpret_cast<const std::uint8_t *>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t> &b) : bytes_(b) {}
  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t> &bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t *data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> encode_checkpoint(const SimState &state, Real mu,
                                            Real sigma) {
  const Grid &g = *state.field.grid;
  Writer w;
  w.bytes.reserve(kHeaderSize + 8 + 16 * g.size() + 8);
  w.bytes.insert(w.bytes.end(), kMagic, kMagic + 8);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::int32_t>(g.d);
  w.put<std::uint64_t>(g.n_r);
  w.put<std::uint64_t>(g.n_z);
  for (Real v : {g.r_max, g.z_max, state.t, state.dt, mu, sigma}) w.put(v);
  w.put<std::uint64_t>(state.step_count);
  w.put<std::uint64_t>(state.good_streak);
  for (Real v : {state.mass0, state.energy0, state.lap0, state.energy_prev,
                 state.nonlinearity, state.boundary_mass_fraction, state.spectral_tail})
    w.put(v);
  w.put(fnv1a64(w.bytes.data(), w.bytes.size()));

  const std::size_t start = w.bytes.size();
  const FieldArray &u = state.field.values;
  for (Index j = 0; j < g.n_r; ++j)
    for (Index k = 0; k < g.n_z; ++k) {
      w.put(u(j, k).real());
      w.put(u(j, k).imag());
    }
  w.put(fnv1a64(w.bytes.data() + start, w.bytes.size() - start));
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t> &bytes) {
  using K = CheckpointError::Kind;
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw CheckpointError(K::magic, "checkpoint: bad magic (not a checkpoint file)");
  if (bytes.size() < 12)
    throw CheckpointError(K::truncated, "checkpoint: truncated before version");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 8, 4);
  if (version != kCheckpointVersion)
    throw CheckpointError(K::version, "checkpoint: version " + std::to_string(version) +
                                          ", expected " +
                                          std::to_string(kCheckpointVersion));
  if (bytes.size() < kHeaderSize + 8)
    throw CheckpointError(K::truncated, "checkpoint: truncated header");
  std::uint64_t header_sum;
  std::memcpy(&header_sum, bytes.data() + kHeaderSize, 8);
  if (header_sum != fnv1a64(bytes.data(), kHeaderSize))
    throw CheckpointError(K::checksum, "checkpoint: header checksum mismatch");

  Reader r(bytes);
  r.get<std::uint64_t>();  // magic
  r.get<std::uint32_t>();
  const int d = r.get<std::int32_t>();
  const auto n_r = static_cast<Index>(r.get<std::uint64_t>());
  const auto n_z = static_cast<Index>(r.get<std::uint64_t>());
  const Real r_max = r.get<Real>();
  const Real z_max = r.get<Real>();

  const std::size_t start = kHeaderSize + 8;
  const std::size_t payload = 16 * static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_z);
  if (bytes.size() < start + payload + 8)
    throw CheckpointError(K::truncated, "checkpoint: truncated field data (" +
                                            std::to_string(bytes.size()) + " of " +
                                            std::to_string(start + payload + 8) + " bytes)");
  if (bytes.size() > start + payload + 8)
    throw CheckpointError(K::truncated, "checkpoint: trailing bytes after field data");
  std::uint64_t field_sum;
  std::memcpy(&field_sum, bytes.data() + start + payload, 8);
  if (field_sum != fnv1a64(bytes.data() + start, payload))
    throw CheckpointError(K::checksum, "checkpoint: field checksum mismatch");

  Checkpoint c;
  SimState &s = c.state;
  s.t = r.get<Real>();
  s.dt = r.get<Real>();
  c.mu = r.get<Real>();
  c.sigma = r.get<Real>();
  s.step_count = static_cast<Index>(r.get<std::uint64_t>());
  s.good_streak = static_cast<Index>(r.get<std::uint64_t>());
  s.mass0 = r.get<Real>();
  s.energy0 = r.get<Real>();
  s.lap0 = r.get<Real>();
  s.energy_prev = r.get<Real>();
  s.nonlinearity = r.get<Real>();
  s.boundary_mass_fraction = r.get<Real>();
  s.spectral_tail = r.get<Real>();

  auto grid = std::make_shared<const Grid>(build_grid(d, r_max, n_r, z_max, n_z));
  FieldArray u(n_r, n_z);
  const std::uint8_t *p = bytes.data() + start;
  for (Index j = 0; j < n_r; ++j)
    for (Index k = 0; k < n_z; ++k) {
      Real re, im;
      std::memcpy(&re, p, 8);
      std::memcpy(&im, p + 8, 8);
      p += 16;
      u(j, k) = Complex(re, im);
    }
  s.field = Field(std::move(grid), std::move(u));
  return c;
}

void save_checkpoint(const std::filesystem::path &path, const SimState &state,
                     Real mu, Real sigma) {
  const auto bytes = encode_checkpoint(state, mu, sigma);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError(CheckpointError::Kind::io, "cannot write " + tmp.string());
    os.write(reinterpret_cast<const char *>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw CheckpointError(CheckpointError::Kind::io, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace bnls
