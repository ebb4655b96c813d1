#pragma once

// Flip-probability models, the noise-magnitude calculus, the constructive
// radial Tsybakov family, and the realizable-error translations.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "noisysq/domain.hpp"

namespace noisysq {

// Strict eta < 1/2 is enforced by capping at this value.
inline constexpr double kEtaCap = 0.5 - 1e-12;

struct Rcn {
  double gamma = 0.0;  // constant flip rate in [0, 1/2)
};

// Monotone radial profile, piecewise linear between (radius, eta) knots and
// clamped outside them. All values bounded by gamma < 1/2.
struct MassartRadial {
  double gamma = 0.0;
  std::vector<std::pair<double, double>> knots;
};

// eta(x) = 1/2 - min(1/2, t(|x|)) with t(r) = (r^d / A)^((1-alpha)/alpha).
// Calibrated against UniformBall{dim} so the tail condition
// Pr[eta >= 1/2 - t] <= A t^(alpha/(1-alpha)) holds with equality on the
// feasible range of t.
struct RadialTsybakov {
  double alpha = 0.5;
  double A = 1.0;
  double t0 = 0.5;
  size_t dim = 0;
};

// Two clean cones of total mass beta around the +-axis directions on the
// 2-D unit ball; eta = 1/2 - rho everywhere else.
struct BetaClean2d {
  double beta = 0.5;
  double rho = 0.1;
  std::array<double, 2> axis = {0.0, 1.0};
};

// eta constant on classes of hypercube points; class = sign word & mask.
struct ClassTable {
  size_t dim = 0;            // hypercube dimension (<= 32)
  unsigned class_bits = 0;   // class index = lowest class_bits coordinates
  std::vector<double> etas;  // 1 << class_bits entries, each < 1/2
};

using NoiseSpec =
    std::variant<Rcn, MassartRadial, RadialTsybakov, BetaClean2d, ClassTable>;

void validate(const NoiseSpec& noise);

double flip_probability(const NoiseSpec& noise, std::span<const double> x);
void flip_probability_batch(const NoiseSpec& noise, const PointBatch& xs,
                            std::span<double> out);
// For radial models, eta as a function of the squared norm (used by the
// batched oracle paths; identical values to flip_probability).
void eta_from_r2(const NoiseSpec& noise, std::span<const double> r2,
                 std::span<double> out);
bool is_radial(const NoiseSpec& noise);

// u32 flip thresholds for the packed hypercube path: flip iff coin < thresh,
// matching (double)coin < eta * 2^32 exactly.
std::vector<uint32_t> flip_thresholds(const ClassTable& table);
uint32_t flip_threshold(double eta);

// ---------------------------------------------------------------------------
// Magnitude calculus

struct MagnitudeReport {
  double estimate = 1.0;  // Monte-Carlo (mean of 1-2*eta)^-1
  double std_error = 0.0;
  std::optional<double> analytic_bound;
  uint64_t samples_used = 0;
};

// Monte-Carlo magnitude; the artifact's ground-truth oracle for M.
// pre: n >= 100. Throws DegenerateNoise if the sample mean is not positive.
MagnitudeReport estimate_magnitude(const NoiseSpec& noise,
                                   const MarginalSpec& marginal, size_t n,
                                   SeedSpec seed);

// Known closed-form upper bound for the model, if any (exact for RCN).
std::optional<double> analytic_magnitude_bound(const NoiseSpec& noise);

enum class TsybakovBranch { Interior, Endpoint };

struct TsybakovBound {
  double bound = 0.0;
  double t_star = 0.0;
  TsybakovBranch branch = TsybakovBranch::Interior;
};

// Distribution-free magnitude bound for an (alpha, A, t0) Tsybakov noise.
TsybakovBound tsybakov_magnitude_bound(double alpha, double A, double t0);

// Tightest-case radial instance on a UniformBall marginal.
NoiseSpec build_radial_tsybakov(double alpha, double A, double t0,
                                const MarginalSpec& marginal);

// Monte-Carlo estimate of OPT = E[eta(x)], the Bayes-optimal error.
double bayes_error(const NoiseSpec& noise, const MarginalSpec& marginal,
                   size_t n, SeedSpec seed);

struct MeanReport {
  double mean = 0.0;
  double std_error = 0.0;
  uint64_t samples_used = 0;
};
MeanReport bayes_error_stats(const NoiseSpec& noise,
                             const MarginalSpec& marginal, size_t n,
                             SeedSpec seed);

// ---------------------------------------------------------------------------
// Realizable-error translations

struct MassartParams {
  double gamma = 0.0;
};
struct TsybakovParams {
  double alpha = 0.5;
  double A = 1.0;
  double t0 = 0.5;
};
using TranslationModel = std::variant<MassartParams, TsybakovParams>;

// Noisy-distribution excess eps such that err_D(h) <= OPT + eps forces
// realizable disagreement <= eps_prime.
double realizable_translation(const TranslationModel& model, double eps_prime);

// ---------------------------------------------------------------------------
// Appendix counterexample

struct BetaCleanInstance {
  NoiseSpec noise;
  Concept target;        // halfspace along the cap axis
  MarginalSpec marginal; // UniformBall{2}
  Halfspace competitor;  // rotated so its boundary is tangent to both caps
  double rotation = 0.0; // radians between target and competitor
};

BetaCleanInstance build_beta_clean_2d(double beta, double rho);

}  // namespace noisysq
