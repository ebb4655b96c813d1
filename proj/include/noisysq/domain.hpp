#pragma once

// Instance space: points, labels, target concepts, and the built-in
// unlabeled marginals with deterministic seeded sampling.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "noisysq/errors.hpp"
#include "noisysq/rng.hpp"

namespace noisysq {

using Label = int8_t;  // +1 or -1

// sign with sign(0) = +1
inline Label sign_label(double v) { return v >= 0.0 ? Label{1} : Label{-1}; }

// ---------------------------------------------------------------------------
// Marginals

struct UniformBall {
  size_t dim = 0;
};
struct UniformSphere {
  size_t dim = 0;
};
struct SphericalGaussian {
  size_t dim = 0;
  // Samples are redrawn beyond this radius so coordinates stay bounded and
  // query values stay in [-1,1]. 0 means "use the default 4*sqrt(dim)".
  double truncation_radius = 0.0;
};
struct UniformHypercube {
  size_t dim = 0;  // uniform over the corners {-1,+1}^dim
};

using MarginalSpec =
    std::variant<UniformBall, UniformSphere, SphericalGaussian, UniformHypercube>;

size_t dim(const MarginalSpec& spec);
bool spherically_symmetric(const MarginalSpec& spec);
// Per-coordinate bound R with |x_i| <= R almost surely.
double coordinate_bound(const MarginalSpec& spec);
double gaussian_truncation(const SphericalGaussian& g);
void validate(const MarginalSpec& spec);  // throws ConfigError

// ---------------------------------------------------------------------------
// Concepts

struct Halfspace {
  std::vector<double> weights;  // unit Euclidean norm, homogeneous threshold
};
struct Conjunction {
  size_t dim = 0;
  std::vector<uint32_t> literals;  // distinct indices < dim; +1 iff all coords +1
};

using Concept = std::variant<Halfspace, Conjunction>;

size_t dim(const Concept& c);
void validate(const Concept& c);  // throws ConfigError
// Normalizes to unit norm; throws ConfigError on a zero vector.
Halfspace make_halfspace(std::vector<double> weights);

Label eval_concept(const Concept& c, std::span<const double> x);

// ---------------------------------------------------------------------------
// Batches

class PointBatch {
 public:
  PointBatch() = default;
  PointBatch(size_t n, size_t d) : n_(n), d_(d), coords_(n * d) {}

  size_t size() const { return n_; }
  size_t dim() const { return d_; }
  std::span<const double> point(size_t i) const {
    return {coords_.data() + i * d_, d_};
  }
  std::span<double> mutable_point(size_t i) {
    return {coords_.data() + i * d_, d_};
  }
  const double* data() const { return coords_.data(); }
  double* data() { return coords_.data(); }

 private:
  size_t n_ = 0;
  size_t d_ = 0;
  std::vector<double> coords_;
};

void eval_concept_batch(const Concept& c, const PointBatch& xs,
                        std::span<Label> out);

// ---------------------------------------------------------------------------
// Sampling

// Buffered view of a RandomStream that hands out the exact sequence
// next_unit() would, but generates it in bulk through the kernel layer.
class UnitSource {
 public:
  explicit UnitSource(RandomStream stream) : stream_(std::move(stream)) {}

  double next() {
    if (pos_ == end_) refill();
    return buf_[pos_++];
  }
  double next_symmetric() { return 2.0 * next() - 1.0; }
  void take(std::span<double> out);
  void gaussian_pair(double& z0, double& z1);

  uint64_t u64s_consumed() const {
    return stream_.u64s_consumed() - (end_ - pos_);
  }
  const SeedSpec& seed() const { return stream_.seed(); }

 private:
  void refill();

  RandomStream stream_;
  std::vector<double> buf_;
  size_t pos_ = 0;
  size_t end_ = 0;
};

// Streams points from a marginal. One instance owns its stream; the i-th
// point produced is a deterministic function of (seed, i) alone, independent
// of how draws are batched. Hypercube points consume one philox block each
// (coordinates from word 0); continuous marginals consume unit doubles.
class MarginalSampler {
 public:
  MarginalSampler(const MarginalSpec& spec, SeedSpec seed);

  void sample(std::span<double> x);         // one point
  void sample_batch(PointBatch& out);       // fills out.size() points
  size_t dim() const { return d_; }
  const MarginalSpec& spec() const { return spec_; }

 private:
  struct BallPool {
    std::vector<double> coords;
    std::vector<double> r2;
    std::vector<uint32_t> accepted;
    size_t cursor = 0;
  };

  void refill_pool();

  MarginalSpec spec_;
  size_t d_;
  UnitSource unit_;       // continuous marginals
  RandomStream blocks_;   // hypercube
  BallPool pool_;
};

// n i.i.d. points, deterministic under the seed.
PointBatch sample_marginal(const MarginalSpec& spec, size_t n, SeedSpec seed);

namespace detail {
void sample_gaussian_raw(UnitSource& u, std::span<double> x);
void sample_sphere(UnitSource& u, std::span<double> x);
void sample_ball_high_d(UnitSource& u, std::span<double> x);
void sample_gaussian_trunc(UnitSource& u, double radius, std::span<double> x);
void unpack_hypercube(uint32_t word, std::span<double> x);
}  // namespace detail

// Exact disagreement probability of sign<u,.> vs sign<v,.> under any
// spherically symmetric marginal: angle(u, v) / pi.
double disagreement_spherical(std::span<const double> u,
                              std::span<const double> v);

}  // namespace noisysq
