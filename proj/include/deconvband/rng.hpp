#pragma once

#include <array>
#include <cstdint>

namespace deconvband {

//! Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
class Philox4x32
{
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter encrypt(Counter counter, Key key);
};

//! SplitMix64 finalizer, used to derive independent stream keys.
std::uint64_t mix64(std::uint64_t x);

//! Derives a child seed from a parent seed and a tag; distinct tags give
//! statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

//! Random stream keyed by (seed, stream). The i-th output depends only on
//! (seed, stream, i), so streams can be consumed from any thread in any order.
class CounterStream
{
public:
  CounterStream(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  //! Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

  //! Standard normal via the Box-Muller transform.
  double normal();

private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  unsigned used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

} // namespace deconvband
