#ifndef BNLS_CHECKPOINT_HPP_
#define BNLS_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnls/solver.hpp"

namespace bnls {

/*
 * Binary layout, little-endian:
 *   "BNLSCKPT"  u32 version
 *   i32 d, u64 n_r, u64 n_z, f64 r_max, z_max, t, dt, mu, sigma
 *   u64 step_count, good_streak
 *   f64 mass0, energy0, lap0, energy_prev, nonlinearity,
 *       boundary_mass_fraction, spectral_tail
 *   u64 FNV-1a of everything above
 *   f64 (re, im) pairs, r outer and z inner
 *   u64 FNV-1a of the field block
 */
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, magic, version, truncated, checksum };
  CheckpointError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Checkpoint {
  SimState state;
  Real mu = 0.0;
  Real sigma = 1.0;
};

std::vector<std::uint8_t> encode_checkpoint(const SimState &state, Real mu,
                                            Real sigma);
/// Rebuilds the grid from the header. Nothing is returned unless every check
/// passes.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t> &bytes);

/// Writes to a temporary file and renames it over `path`.
void save_checkpoint(const std::filesystem::path &path, const SimState &state,
                     Real mu, Real sigma);
Checkpoint load_checkpoint(const std::filesystem::path &path);

std::uint64_t fnv1a64(const std::uint8_t *data, std::size_t size);

}  // namespace bnls

#endif  // BNLS_CHECKPOINT_HPP_
