#include "noisysq/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "noisysq/detail/philox_core.hpp"
#include "noisysq/kernels.hpp"

namespace noisysq {

uint64_t derive_stream(uint64_t parent, uint64_t child) {
  uint64_t x = parent ^ (0x9E3779B97F4A7C15ULL * (child + 1));
  x += 0x9E3779B97F4A7C15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(SeedSpec seed) : seed_(seed) {}

void RandomStream::refill_block() {
  auto blk = kern::detail::philox4x32_block(seed_.master_seed,
                                            seed_.stream_id, block_++);
  buf_[0] = static_cast<uint64_t>(blk[0]) | (static_cast<uint64_t>(blk[1]) << 32);
  buf_[1] = static_cast<uint64_t>(blk[2]) | (static_cast<uint64_t>(blk[3]) << 32);
  pos_ = 0;
}

uint64_t RandomStream::next_u64() {
  if (pos_ == 2) refill_block();
  ++consumed_;
  return buf_[pos_++];
}

double RandomStream::next_unit() {
  return kern::detail::unit_double(next_u64());
}

double RandomStream::next_symmetric() {
  return 2.0 * next_unit() - 1.0;
}

void RandomStream::skip_u64s(uint64_t k) {
  consumed_ += k;
  while (k > 0 && pos_ != 2) {
    ++pos_;
    --k;
  }
  block_ += k / 2;
  if (k % 2) {
    auto blk = kern::detail::philox4x32_block(seed_.master_seed,
                                              seed_.stream_id, block_++);
    buf_[0] = static_cast<uint64_t>(blk[0]) | (static_cast<uint64_t>(blk[1]) << 32);
    buf_[1] = static_cast<uint64_t>(blk[2]) | (static_cast<uint64_t>(blk[3]) << 32);
    pos_ = 1;
  }
}

void RandomStream::fill_unit(std::span<double> out) {
  size_t i = 0;
  size_t n = out.size();
  while (i < n && pos_ != 2) out[i++] = next_unit();
  size_t nblocks = (n - i) / 2;
  if (nblocks > 0) {
    // Bulk path: whole blocks through the dispatched kernels. x86-64 is
    // little-endian, so the 4 u32 words of a block reinterpret directly as
    // the 2 u64s the sequential path produces.
    constexpr size_t kChunk = 8192;
    std::vector<uint32_t> words(4 * std::min(nblocks, kChunk));
    const auto& k = kern::ops();
    while (nblocks > 0) {
      size_t take = std::min(nblocks, kChunk);
      k.philox_fill(seed_.master_seed, seed_.stream_id, block_, take,
                    words.data());
      static_assert(sizeof(uint64_t) == 2 * sizeof(uint32_t));
      const uint64_t* as64 = reinterpret_cast<const uint64_t*>(words.data());
      k.unit_doubles(as64, 2 * take, out.data() + i);
      block_ += take;
      consumed_ += 2 * take;
      i += 2 * take;
      nblocks -= take;
    }
  }
  while (i < n) out[i++] = next_unit();
}

void RandomStream::fill_gaussian(std::span<double> out) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  size_t n = out.size();
  for (size_t i = 0; i < n; i += 2) {
    double u1 = 1.0 - next_unit();  // (0,1], keeps log finite
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    out[i] = r * std::cos(two_pi * u2);
    if (i + 1 < n) out[i + 1] = r * std::sin(two_pi * u2);
  }
}

}  // namespace noisysq
