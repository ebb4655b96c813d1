#pragma once

// Seeded, counter-based random streams. A (master_seed, stream_id) pair
// identifies an infinite u64 sequence independent of batching: bulk fills
// produce exactly the values repeated next_u64() calls would.

#include <cstdint>
#include <span>

namespace noisysq {

struct SeedSpec {
  uint64_t master_seed = 0;
  uint64_t stream_id = 0;

  bool operator==(const SeedSpec&) const = default;
};

// splitmix64-style derivation of independent child stream ids.
uint64_t derive_stream(uint64_t parent, uint64_t child);

class RandomStream {
 public:
  explicit RandomStream(SeedSpec seed);

  uint64_t next_u64();
  double next_unit();         // [0,1), 53-bit resolution
  double next_symmetric();    // [-1,1)
  void fill_unit(std::span<double> out);
  // Advance as if next_u64() had been called k times, without generating.
  void skip_u64s(uint64_t k);

  // Standard normals via Box-Muller; consumes 2*ceil(out.size()/2) u64s.
  void fill_gaussian(std::span<double> out);

  uint64_t u64s_consumed() const { return consumed_; }
  const SeedSpec& seed() const { return seed_; }
  RandomStream substream(uint64_t child) const {
    return RandomStream({seed_.master_seed,
                         derive_stream(seed_.stream_id, child)});
  }

 private:
  void refill_block();

  SeedSpec seed_;
  uint64_t block_ = 0;
  uint64_t consumed_ = 0;
  uint64_t buf_[2] = {0, 0};
  int pos_ = 2;  // u64s already taken from buf_
};

}  // namespace noisysq
