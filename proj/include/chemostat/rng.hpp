#ifndef CHEMOSTAT_RNG_HPP
#define CHEMOSTAT_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace chemostat {

// Philox4x32 with 10 rounds.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept;

// Counter-based stream keyed by (master_seed, stream_id). Draw n of a stream is
// a pure function of (master_seed, stream_id, n), so streams never overlap and a
// replica's draws do not depend on scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : seed_(master_seed), stream_(stream_id) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }
  double exponential(double rate) noexcept;
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t draws() const noexcept { return counter_ * 2 - (have_spare_ ? 1 : 0); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

// Stream ids for distinct purposes derived from one replica index.
inline std::uint64_t substream(std::uint64_t base, std::uint64_t tag) noexcept {
  return base ^ (tag * 0x9E3779B97F4A7C15ULL);
}

}  // namespace chemostat

#endif
