#include "noisysq/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "noisysq/kernels.hpp"

namespace noisysq {

namespace {

// Scalar, ISA-independent dot used wherever the result defines a label.
double label_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr size_t kUnitBuf = 8192;
constexpr size_t kPoolCandidates = 4096;

}  // namespace

// ---------------------------------------------------------------------------
// Marginals

size_t dim(const MarginalSpec& spec) {
  return std::visit([](const auto& m) { return m.dim; }, spec);
}

bool spherically_symmetric(const MarginalSpec& spec) {
  return !std::holds_alternative<UniformHypercube>(spec);
}

double gaussian_truncation(const SphericalGaussian& g) {
  return g.truncation_radius > 0.0
             ? g.truncation_radius
             : 4.0 * std::sqrt(static_cast<double>(g.dim));
}

double coordinate_bound(const MarginalSpec& spec) {
  if (const auto* g = std::get_if<SphericalGaussian>(&spec)) {
    return gaussian_truncation(*g);
  }
  return 1.0;
}

void validate(const MarginalSpec& spec) {
  if (dim(spec) == 0) throw ConfigError("marginal dimension must be positive");
  if (const auto* g = std::get_if<SphericalGaussian>(&spec)) {
    if (g->truncation_radius < 0.0) {
      throw ConfigError("gaussian truncation radius must be positive");
    }
  }
  if (const auto* h = std::get_if<UniformHypercube>(&spec)) {
    if (h->dim > 32) throw ConfigError("hypercube dimension capped at 32");
  }
}

// ---------------------------------------------------------------------------
// Concepts

size_t dim(const Concept& c) {
  if (const auto* h = std::get_if<Halfspace>(&c)) return h->weights.size();
  return std::get<Conjunction>(c).dim;
}

void validate(const Concept& c) {
  if (const auto* h = std::get_if<Halfspace>(&c)) {
    if (h->weights.empty()) throw ConfigError("halfspace needs weights");
    for (double w : h->weights) {
      if (!std::isfinite(w)) throw ConfigError("halfspace weights must be finite");
    }
    double norm = std::sqrt(label_dot(h->weights, h->weights));
    if (std::abs(norm - 1.0) > 1e-9) {
      throw ConfigError("halfspace weights must have unit norm");
    }
    return;
  }
  const auto& conj = std::get<Conjunction>(c);
  if (conj.dim == 0) throw ConfigError("conjunction dimension must be positive");
  std::vector<uint32_t> lits = conj.literals;
  std::sort(lits.begin(), lits.end());
  if (std::adjacent_find(lits.begin(), lits.end()) != lits.end()) {
    throw ConfigError("conjunction literals must be distinct");
  }
  if (!lits.empty() && lits.back() >= conj.dim) {
    throw ConfigError("conjunction literal index out of range");
  }
}

Halfspace make_halfspace(std::vector<double> weights) {
  double norm = std::sqrt(label_dot(weights, weights));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ConfigError("cannot normalize a zero or non-finite weight vector");
  }
  for (double& w : weights) w /= norm;
  return Halfspace{std::move(weights)};
}

Label eval_concept(const Concept& c, std::span<const double> x) {
  if (const auto* h = std::get_if<Halfspace>(&c)) {
    if (h->weights.size() != x.size()) {
      throw ContractViolation("halfspace/point dimension mismatch");
    }
    return sign_label(label_dot(h->weights, x));
  }
  const auto& conj = std::get<Conjunction>(c);
  if (conj.dim != x.size()) {
    throw ContractViolation("conjunction/point dimension mismatch");
  }
  for (uint32_t lit : conj.literals) {
    if (!(x[lit] > 0.0)) return -1;
  }
  return 1;
}

void eval_concept_batch(const Concept& c, const PointBatch& xs,
                        std::span<Label> out) {
  for (size_t i = 0; i < xs.size(); ++i) out[i] = eval_concept(c, xs.point(i));
}

// ---------------------------------------------------------------------------
// UnitSource

void UnitSource::refill() {
  if (buf_.empty()) buf_.resize(kUnitBuf);
  stream_.fill_unit(buf_);
  pos_ = 0;
  end_ = buf_.size();
}

void UnitSource::take(std::span<double> out) {
  size_t i = 0;
  while (i < out.size()) {
    if (pos_ == end_) {
      // Large remainders go straight through the bulk fill.
      size_t rest = out.size() - i;
      if (rest >= kUnitBuf) {
        stream_.fill_unit(out.subspan(i, rest));
        return;
      }
      refill();
    }
    size_t take = std::min(end_ - pos_, out.size() - i);
    std::memcpy(out.data() + i, buf_.data() + pos_, take * sizeof(double));
    pos_ += take;
    i += take;
  }
}

void UnitSource::gaussian_pair(double& z0, double& z1) {
  double u1 = 1.0 - next();
  double u2 = next();
  double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(2.0 * std::numbers::pi * u2);
  z1 = r * std::sin(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// Point generation helpers

namespace detail {

void sample_gaussian_raw(UnitSource& u, std::span<double> x) {
  size_t d = x.size();
  for (size_t k = 0; k + 2 <= d; k += 2) u.gaussian_pair(x[k], x[k + 1]);
  if (d % 2) {
    double spare;
    u.gaussian_pair(x[d - 1], spare);
  }
}

void sample_sphere(UnitSource& u, std::span<double> x) {
  while (true) {
    sample_gaussian_raw(u, x);
    double n2 = 0;
    for (double v : x) n2 += v * v;
    if (n2 > 1e-300) {
      double inv = 1.0 / std::sqrt(n2);
      for (double& v : x) v *= inv;
      return;
    }
  }
}

void sample_ball_high_d(UnitSource& u, std::span<double> x) {
  sample_sphere(u, x);
  double r = std::pow(u.next(), 1.0 / static_cast<double>(x.size()));
  for (double& v : x) v *= r;
}

void sample_gaussian_trunc(UnitSource& u, double radius, std::span<double> x) {
  double r2max = radius * radius;
  while (true) {
    sample_gaussian_raw(u, x);
    double n2 = 0;
    for (double v : x) n2 += v * v;
    if (n2 <= r2max) return;
  }
}

void unpack_hypercube(uint32_t word, std::span<double> x) {
  for (size_t k = 0; k < x.size(); ++k) {
    x[k] = ((word >> k) & 1u) ? 1.0 : -1.0;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MarginalSampler

MarginalSampler::MarginalSampler(const MarginalSpec& spec, SeedSpec seed)
    : spec_(spec),
      d_(noisysq::dim(spec)),
      unit_(RandomStream(seed)),
      blocks_(seed) {
  validate(spec_);
}

void MarginalSampler::refill_pool() {
  pool_.coords.resize(kPoolCandidates * d_);
  pool_.r2.resize(kPoolCandidates);
  unit_.take(pool_.coords);
  for (double& v : pool_.coords) v = 2.0 * v - 1.0;
  kern::ops().row_sumsq(pool_.coords.data(), kPoolCandidates, d_,
                        pool_.r2.data());
  pool_.accepted.clear();
  for (size_t i = 0; i < kPoolCandidates; ++i) {
    if (pool_.r2[i] <= 1.0) pool_.accepted.push_back(static_cast<uint32_t>(i));
  }
  pool_.cursor = 0;
}

void MarginalSampler::sample(std::span<double> x) {
  if (x.size() != d_) {
    throw ContractViolation("sample span has wrong dimension");
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformBall>) {
          if (d_ <= 8) {
            while (pool_.cursor == pool_.accepted.size()) refill_pool();
            const double* row =
                pool_.coords.data() + pool_.accepted[pool_.cursor++] * d_;
            std::copy(row, row + d_, x.begin());
          } else {
            detail::sample_ball_high_d(unit_, x);
          }
        } else if constexpr (std::is_same_v<T, UniformSphere>) {
          detail::sample_sphere(unit_, x);
        } else if constexpr (std::is_same_v<T, SphericalGaussian>) {
          detail::sample_gaussian_trunc(unit_, gaussian_truncation(m), x);
        } else {
          uint64_t u0 = blocks_.next_u64();
          (void)blocks_.next_u64();  // round out the block
          detail::unpack_hypercube(static_cast<uint32_t>(u0), x);
        }
      },
      spec_);
}

void MarginalSampler::sample_batch(PointBatch& out) {
  for (size_t i = 0; i < out.size(); ++i) sample(out.mutable_point(i));
}

PointBatch sample_marginal(const MarginalSpec& spec, size_t n, SeedSpec seed) {
  validate(spec);
  if (n == 0) throw ContractViolation("sample count must be at least 1");
  PointBatch out(n, dim(spec));
  MarginalSampler sampler(spec, seed);
  sampler.sample_batch(out);
  return out;
}

// ---------------------------------------------------------------------------

double disagreement_spherical(std::span<const double> u,
                              std::span<const double> v) {
  if (u.size() != v.size() || u.empty()) {
    throw ContractViolation("disagreement needs equal-dimension vectors");
  }
  double nu = label_dot(u, u), nv = label_dot(v, v);
  if (!(nu > 0.0) || !(nv > 0.0)) {
    throw ContractViolation("disagreement needs nonzero vectors");
  }
  if (std::abs(nu - 1.0) > 1e-6 || std::abs(nv - 1.0) > 1e-6) {
    throw ContractViolation("disagreement expects unit vectors");
  }
  double c = std::clamp(label_dot(u, v), -1.0, 1.0);
  return std::acos(c) / std::numbers::pi;
}

}  // namespace noisysq
