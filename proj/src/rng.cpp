#include "chemostat/rng.hpp"

#include <cmath>

namespace chemostat {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

RngStream::result_type RngStream::operator()() noexcept {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                            static_cast<std::uint32_t>(seed_ >> 32)};
  ++counter_;
  const auto out = philox4x32(ctr, key);
  spare_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  have_spare_ = true;
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

double RngStream::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Rejection against the largest multiple of n.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t v;
  do {
    v = (*this)();
  } while (v >= limit);
  return v % n;
}

}  // namespace chemostat
