#include "noisysq/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace noisysq {

namespace {

// r2^(twice_expo/2) with an exact half-integer fast path.
double pow_half_integer(double r2, int twice_expo) {
  double acc = 1.0;
  double base = r2;
  int k = twice_expo / 2;
  while (k > 0) {
    if (k & 1) acc *= base;
    base *= base;
    k >>= 1;
  }
  if (twice_expo & 1) acc *= std::sqrt(r2);
  return acc;
}

struct RadialEval {
  // t(r) = scale * r2^half_expo (as r2 powers); eta = 1/2 - clamp(t, 0, 1/2)
  double inv_pow_a;     // A^(-(1-alpha)/alpha)
  double exp_r2;        // d * (1-alpha)/alpha / 2
  int twice_expo;       // 2*exp_r2 when half-integral, else -1
  static RadialEval make(const RadialTsybakov& n) {
    double expo = (1.0 - n.alpha) / n.alpha;
    RadialEval e;
    e.inv_pow_a = std::pow(n.A, -expo);
    e.exp_r2 = 0.5 * static_cast<double>(n.dim) * expo;
    double twice = 2.0 * e.exp_r2;
    double rounded = std::nearbyint(twice);
    e.twice_expo =
        (std::abs(twice - rounded) < 1e-12 && rounded >= 0 && rounded < 1024)
            ? static_cast<int>(rounded)
            : -1;
    return e;
  }
  double eta(double r2) const {
    double t = inv_pow_a * (twice_expo >= 0 ? pow_half_integer(r2, twice_expo)
                                            : std::pow(r2, exp_r2));
    if (t >= 0.5) return 0.0;
    double e = 0.5 - t;
    return e > kEtaCap ? kEtaCap : e;
  }
};

double massart_radial_eta(const MassartRadial& n, double r) {
  const auto& k = n.knots;
  if (k.empty()) return 0.0;
  if (r <= k.front().first) return k.front().second;
  if (r >= k.back().first) return k.back().second;
  auto it = std::upper_bound(
      k.begin(), k.end(), r,
      [](double v, const auto& knot) { return v < knot.first; });
  const auto& [r1, e1] = *it;
  const auto& [r0, e0] = *(it - 1);
  double w = (r - r0) / (r1 - r0);
  return e0 + w * (e1 - e0);
}

double beta_clean_eta(const BetaClean2d& n, std::span<const double> x) {
  double r2 = x[0] * x[0] + x[1] * x[1];
  if (r2 <= 0.0) return 0.0;  // measure zero; call it clean
  double proj = std::abs(x[0] * n.axis[0] + x[1] * n.axis[1]);
  double cap_cos = std::cos(0.5 * std::numbers::pi * n.beta);
  bool clean = proj * proj >= cap_cos * cap_cos * r2 && !(cap_cos < 0);
  if (n.beta >= 1.0) clean = true;
  if (clean) return 0.0;
  double e = 0.5 - n.rho;
  return e > kEtaCap ? kEtaCap : (e < 0.0 ? 0.0 : e);
}

uint32_t hypercube_word(std::span<const double> x) {
  uint32_t w = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    if (x[k] > 0.0) w |= (1u << k);
  }
  return w;
}

double point_r2(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const NoiseSpec& noise) {
  std::visit(
      [](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Rcn>) {
          if (!(n.gamma >= 0.0 && n.gamma < 0.5)) {
            throw ConfigError("RCN rate must lie in [0, 1/2)");
          }
        } else if constexpr (std::is_same_v<T, MassartRadial>) {
          if (!(n.gamma >= 0.0 && n.gamma < 0.5)) {
            throw ConfigError("Massart bound must lie in [0, 1/2)");
          }
          if (n.knots.empty()) throw ConfigError("radial profile needs knots");
          bool up = true, down = true;
          for (size_t i = 0; i < n.knots.size(); ++i) {
            const auto& [r, e] = n.knots[i];
            if (!(r >= 0.0)) throw ConfigError("knot radius must be >= 0");
            if (!(e >= 0.0 && e <= n.gamma)) {
              throw ConfigError("knot value must lie in [0, gamma]");
            }
            if (i > 0) {
              if (!(r > n.knots[i - 1].first)) {
                throw ConfigError("knot radii must increase");
              }
              up = up && e >= n.knots[i - 1].second;
              down = down && e <= n.knots[i - 1].second;
            }
          }
          if (!up && !down) throw ConfigError("radial profile must be monotone");
        } else if constexpr (std::is_same_v<T, RadialTsybakov>) {
          if (!(n.alpha > 0.0 && n.alpha < 1.0)) {
            throw ConfigError("tsybakov alpha must lie in (0,1)");
          }
          if (!(n.A > 0.0)) throw ConfigError("tsybakov A must be positive");
          if (!(n.t0 > 0.0 && n.t0 <= 0.5)) {
            throw ConfigError("tsybakov t0 must lie in (0, 1/2]");
          }
          if (n.A * std::pow(n.t0, n.alpha / (1.0 - n.alpha)) > 1.0 + 1e-12) {
            throw ConfigError("tsybakov requires A * t0^(alpha/(1-alpha)) <= 1");
          }
          if (n.dim == 0) throw ConfigError("tsybakov dimension must be positive");
        } else if constexpr (std::is_same_v<T, BetaClean2d>) {
          if (!(n.beta > 0.0 && n.beta <= 1.0)) {
            throw ConfigError("beta must lie in (0,1]");
          }
          if (!(n.rho > 0.0 && n.rho <= 0.5)) {
            throw ConfigError("rho must lie in (0, 1/2]");
          }
          double a2 = n.axis[0] * n.axis[0] + n.axis[1] * n.axis[1];
          if (std::abs(a2 - 1.0) > 1e-9) {
            throw ConfigError("cap axis must be a unit vector");
          }
        } else {
          if (n.dim == 0 || n.dim > 32) {
            throw ConfigError("class table dimension must lie in [1,32]");
          }
          if (n.class_bits > n.dim) {
            throw ConfigError("class bits cannot exceed dimension");
          }
          if (n.etas.size() != (size_t{1} << n.class_bits)) {
            throw ConfigError("class table must have 2^class_bits entries");
          }
          for (double e : n.etas) {
            if (!(e >= 0.0 && e < 0.5)) {
              throw ConfigError("class table values must lie in [0, 1/2)");
            }
          }
        }
      },
      noise);
}

bool is_radial(const NoiseSpec& noise) {
  return std::holds_alternative<Rcn>(noise) ||
         std::holds_alternative<MassartRadial>(noise) ||
         std::holds_alternative<RadialTsybakov>(noise);
}

double flip_probability(const NoiseSpec& noise, std::span<const double> x) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Rcn>) {
          return n.gamma;
        } else if constexpr (std::is_same_v<T, MassartRadial>) {
          return massart_radial_eta(n, std::sqrt(point_r2(x)));
        } else if constexpr (std::is_same_v<T, RadialTsybakov>) {
          return RadialEval::make(n).eta(point_r2(x));
        } else if constexpr (std::is_same_v<T, BetaClean2d>) {
          return beta_clean_eta(n, x);
        } else {
          uint32_t mask = (n.class_bits == 32)
                              ? 0xFFFFFFFFu
                              : ((1u << n.class_bits) - 1u);
          return n.etas[hypercube_word(x) & mask];
        }
      },
      noise);
}

void eta_from_r2(const NoiseSpec& noise, std::span<const double> r2,
                 std::span<double> out) {
  if (const auto* rcn = std::get_if<Rcn>(&noise)) {
    std::fill(out.begin(), out.end(), rcn->gamma);
    return;
  }
  if (const auto* mr = std::get_if<MassartRadial>(&noise)) {
    for (size_t i = 0; i < r2.size(); ++i) {
      out[i] = massart_radial_eta(*mr, std::sqrt(r2[i]));
    }
    return;
  }
  if (const auto* ts = std::get_if<RadialTsybakov>(&noise)) {
    RadialEval e = RadialEval::make(*ts);
    for (size_t i = 0; i < r2.size(); ++i) out[i] = e.eta(r2[i]);
    return;
  }
  throw ContractViolation("eta_from_r2 requires a radial noise model");
}

void flip_probability_batch(const NoiseSpec& noise, const PointBatch& xs,
                            std::span<double> out) {
  if (is_radial(noise)) {
    // Scalar-order r2 so the reported eta matches flip_probability bit for
    // bit on every ISA.
    std::vector<double> r2(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) r2[i] = point_r2(xs.point(i));
    eta_from_r2(noise, r2, out);
    return;
  }
  for (size_t i = 0; i < xs.size(); ++i) {
    out[i] = flip_probability(noise, xs.point(i));
  }
}

uint32_t flip_threshold(double eta) {
  // flip iff coin32 < eta * 2^32, matching the double comparison exactly.
  double t = std::ceil(eta * 4294967296.0);
  if (t <= 0.0) return 0;
  if (t >= 4294967295.0) return 0xFFFFFFFFu;
  return static_cast<uint32_t>(t);
}

std::vector<uint32_t> flip_thresholds(const ClassTable& table) {
  std::vector<uint32_t> out(table.etas.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = flip_threshold(table.etas[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Magnitude

std::optional<double> analytic_magnitude_bound(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& n) -> std::optional<double> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Rcn>) {
          return 1.0 / (1.0 - 2.0 * n.gamma);  // exact
        } else if constexpr (std::is_same_v<T, MassartRadial>) {
          return 1.0 / (1.0 - 2.0 * n.gamma);
        } else if constexpr (std::is_same_v<T, RadialTsybakov>) {
          return tsybakov_magnitude_bound(n.alpha, n.A, n.t0).bound;
        } else if constexpr (std::is_same_v<T, BetaClean2d>) {
          return 1.0 / n.beta;
        } else {
          double worst = 0.0;
          for (double e : n.etas) worst = std::max(worst, e);
          return 1.0 / (1.0 - 2.0 * worst);
        }
      },
      noise);
}

MagnitudeReport estimate_magnitude(const NoiseSpec& noise,
                                   const MarginalSpec& marginal, size_t n,
                                   SeedSpec seed) {
  validate(noise);
  validate(marginal);
  if (n < 100) throw ContractViolation("magnitude estimation needs n >= 100");

  MarginalSampler sampler(marginal, seed);
  constexpr size_t kChunk = 1u << 14;
  PointBatch batch(kChunk, dim(marginal));
  std::vector<double> eta(kChunk);
  double sum_w = 0.0, sum_w2 = 0.0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    if (take != batch.size()) batch = PointBatch(take, dim(marginal));
    sampler.sample_batch(batch);
    flip_probability_batch(noise, batch, std::span(eta).first(take));
    for (size_t i = 0; i < take; ++i) {
      double w = 1.0 - 2.0 * eta[i];
      sum_w += w;
      sum_w2 += w * w;
    }
    left -= take;
  }
  double mean = sum_w / static_cast<double>(n);
  if (!(mean > 0.0)) {
    throw DegenerateNoise("mean of 1-2*eta is not positive");
  }
  double var = std::max(0.0, sum_w2 / static_cast<double>(n) - mean * mean);
  double sd = std::sqrt(var);
  MagnitudeReport rep;
  rep.estimate = 1.0 / mean;
  // Delta method for 1/mean.
  rep.std_error = sd / (std::sqrt(static_cast<double>(n)) * mean * mean);
  rep.analytic_bound = analytic_magnitude_bound(noise);
  rep.samples_used = n;
  return rep;
}

TsybakovBound tsybakov_magnitude_bound(double alpha, double A, double t0) {
  NoiseSpec probe = RadialTsybakov{alpha, A, t0, 1};
  validate(probe);  // shares the parameter-domain checks
  double expo = (1.0 - alpha) / alpha;
  TsybakovBound out;
  out.t_star = std::pow((1.0 - alpha) / A, expo);
  if (out.t_star <= t0) {
    out.branch = TsybakovBranch::Interior;
    out.bound = (1.0 / (2.0 * alpha)) * std::pow(A / (1.0 - alpha), expo);
  } else {
    out.branch = TsybakovBranch::Endpoint;
    out.bound =
        1.0 / (2.0 * t0 * (1.0 - A * std::pow(t0, alpha / (1.0 - alpha))));
  }
  return out;
}

NoiseSpec build_radial_tsybakov(double alpha, double A, double t0,
                                const MarginalSpec& marginal) {
  if (!std::holds_alternative<UniformBall>(marginal)) {
    throw ConfigError(
        "radial tsybakov construction needs a UniformBall marginal");
  }
  NoiseSpec out = RadialTsybakov{alpha, A, t0, dim(marginal)};
  validate(out);
  return out;
}

double bayes_error(const NoiseSpec& noise, const MarginalSpec& marginal,
                   size_t n, SeedSpec seed) {
  return bayes_error_stats(noise, marginal, n, seed).mean;
}

MeanReport bayes_error_stats(const NoiseSpec& noise,
                             const MarginalSpec& marginal, size_t n,
                             SeedSpec seed) {
  validate(noise);
  validate(marginal);
  if (n < 100) throw ContractViolation("bayes error estimation needs n >= 100");
  MarginalSampler sampler(marginal, seed);
  constexpr size_t kChunk = 1u << 14;
  PointBatch batch(kChunk, dim(marginal));
  std::vector<double> eta(kChunk);
  double s = 0.0, s2 = 0.0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    if (take != batch.size()) batch = PointBatch(take, dim(marginal));
    sampler.sample_batch(batch);
    flip_probability_batch(noise, batch, std::span(eta).first(take));
    for (size_t i = 0; i < take; ++i) {
      s += eta[i];
      s2 += eta[i] * eta[i];
    }
    left -= take;
  }
  MeanReport rep;
  rep.mean = s / static_cast<double>(n);
  double var = std::max(0.0, s2 / static_cast<double>(n) - rep.mean * rep.mean);
  rep.std_error = std::sqrt(var / static_cast<double>(n));
  rep.samples_used = n;
  return rep;
}

// ---------------------------------------------------------------------------
// Translations

double realizable_translation(const TranslationModel& model, double eps_prime) {
  if (!(eps_prime >= 0.0 && eps_prime < 1.0)) {
    throw ConfigError("eps_prime must lie in [0, 1)");
  }
  if (const auto* m = std::get_if<MassartParams>(&model)) {
    if (!(m->gamma >= 0.0 && m->gamma < 0.5)) {
      throw ConfigError("Massart bound must lie in [0, 1/2)");
    }
    return eps_prime * (1.0 - 2.0 * m->gamma);
  }
  const auto& t = std::get<TsybakovParams>(model);
  validate(NoiseSpec{RadialTsybakov{t.alpha, t.A, t.t0, 1}});
  if (eps_prime == 0.0) return 0.0;
  double expo = (1.0 - t.alpha) / t.alpha;
  double t_star = std::pow(eps_prime * (1.0 - t.alpha) / t.A, expo);
  auto objective = [&](double v) {
    return 2.0 * v * eps_prime - 2.0 * t.A * std::pow(v, 1.0 / (1.0 - t.alpha));
  };
  double eps = (t_star <= t.t0) ? objective(t_star) : objective(t.t0);
  return std::max(0.0, eps);
}

// ---------------------------------------------------------------------------
// Appendix counterexample

BetaCleanInstance build_beta_clean_2d(double beta, double rho) {
  BetaClean2d noise{beta, rho, {0.0, 1.0}};
  validate(NoiseSpec{noise});
  BetaCleanInstance inst;
  inst.noise = noise;
  inst.target = Halfspace{{0.0, 1.0}};
  inst.marginal = UniformBall{2};
  // Rotate until the competitor's boundary is tangent to both caps: every
  // further degree would cut clean mass.
  inst.rotation = 0.5 * std::numbers::pi * (1.0 - beta);
  double c = std::cos(inst.rotation), s = std::sin(inst.rotation);
  const auto& w = std::get<Halfspace>(inst.target).weights;
  inst.competitor = Halfspace{{c * w[0] - s * w[1], s * w[0] + c * w[1]}};
  return inst;
}

}  // namespace noisysq
