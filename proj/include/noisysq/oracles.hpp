#pragma once

// Example oracles: noiseless, noisy, and extended (label plus flip
// probability), plus honest clean SQ/CSQ reference oracles.

#include <optional>
#include <ostream>
#include <vector>

#include "noisysq/noise.hpp"
#include "noisysq/query.hpp"

namespace noisysq {

enum class OracleMode { Noiseless, Noisy, ExtendedNoisy };

struct Draw {
  std::vector<double> x;
  Label y = 1;
  std::optional<double> eta;  // set in ExtendedNoisy mode
};

struct DrawBatch {
  PointBatch xs;
  std::vector<Label> ys;
  std::vector<double> eta;  // per-draw flip probability (Noisy/Extended)
};

// Packed hypercube draws: one u32 word per point, bit j set <=> coord +1.
struct PackedDrawBatch {
  std::vector<uint32_t> words;
  std::vector<Label> ys;
  std::vector<double> eta;  // filled on request
};

// Single-owner mutable stream; draw i is a deterministic function of
// (seed, i). Points and flip coins come from independent derived substreams
// for continuous marginals; hypercube draws consume one philox block each
// (coordinates from word 0, flip coin from word 1) so the packed and dense
// paths see identical examples.
class OracleStream {
 public:
  OracleStream(MarginalSpec marginal, Concept target,
               std::optional<NoiseSpec> noise, OracleMode mode, SeedSpec seed);

  Draw draw();
  void draw_batch(size_t n, DrawBatch& out);

  // Fast path; requires packed_supported().
  void draw_batch_packed(size_t n, PackedDrawBatch& out, bool want_eta);
  bool packed_supported() const { return packed_ok_; }
  uint32_t packed_class_mask() const { return class_mask_; }
  std::span<const double> packed_class_etas() const { return class_etas_; }

  uint64_t draws_made() const { return draws_made_; }
  const MarginalSpec& marginal() const { return marginal_; }
  const Concept& target() const { return target_; }
  const std::optional<NoiseSpec>& noise() const { return noise_; }
  OracleMode mode() const { return mode_; }
  size_t dim() const { return d_; }

 private:
  void draw_batch_hypercube(size_t n, DrawBatch& out);

  MarginalSpec marginal_;
  Concept target_;
  std::optional<NoiseSpec> noise_;
  OracleMode mode_;
  size_t d_;
  bool hypercube_;
  bool packed_ok_;
  uint64_t draws_made_ = 0;
  MarginalSampler sampler_;     // continuous point source
  UnitSource coins_;            // continuous flip coins
  RandomStream blocks_;         // hypercube word+coin source
  uint32_t lit_mask_ = 0;       // conjunction literals (packed path)
  uint32_t class_mask_ = 0;
  std::vector<uint32_t> thresholds_;
  std::vector<double> class_etas_;
};

// Honest Monte-Carlo SQ oracle on the clean distribution:
// returns v with |E[psi(x, f(x))] - v| <= tau with internal failure
// probability 1e-6, using ceil(2 ln(2/1e-6) / tau^2) draws.
double clean_sq(const QuerySpec& query, double tau, const MarginalSpec& marginal,
                const Concept& target, SeedSpec seed);

// clean_sq restricted to correlational queries (psi = phi(x) * y).
double clean_csq(const QuerySpec& query, double tau,
                 const MarginalSpec& marginal, const Concept& target,
                 SeedSpec seed);

size_t clean_sq_sample_size(double tau);

// Columnar CSV: x0..x{d-1}, y, and eta when the stream is extended.
void dump_draws_csv(OracleStream& stream, size_t n, std::ostream& os);

}  // namespace noisysq
