#pragma once

// The noise-tolerant reductions: grid-search CSQ reduction over the noisy
// oracle, query decomposition, the extended-oracle simulations, the full SQ
// reduction, and the constant-rate baseline simulation.

#include <functional>

#include "noisysq/learners.hpp"
#include "noisysq/oracles.hpp"

namespace noisysq {

// ---------------------------------------------------------------------------
// Problem handle: sampling access to the noisy distribution, with
// deterministic substream fan-out for parallel-safe components.

struct NoisyProblem {
  MarginalSpec marginal;
  Concept target;
  NoiseSpec noise;
  SeedSpec seed;

  OracleStream make_oracle(OracleMode mode, uint64_t substream) const {
    return OracleStream(marginal, target, noise, mode,
                        {seed.master_seed, derive_stream(seed.stream_id, substream)});
  }
};

struct ReductionOptions {
  // Multiplies every bound-derived draw count; 1.0 = the instantiated
  // Hoeffding sizes. Recorded in results for auditability.
  double sample_scale = 1.0;
};

// All bound-derived counts go through this (floor 100 draws).
size_t scaled_count(double raw, double scale);

// ---------------------------------------------------------------------------
// Z grid

struct ZGrid {
  double tau_prime = 0.0;       // tau / (2 C^2)
  double magnitude_bound = 1.0; // C
  std::vector<double> values;   // {tau', 2 tau', ..., <= 1}; never includes 0
};

ZGrid make_zgrid(double tau, double C);

struct CandidateRecord {
  double z_tilde = 0.0;
  Hypothesis hypothesis;
  double empirical_error = 1.0;
  uint64_t samples_used = 0;
};

// ---------------------------------------------------------------------------
// Learner plug

struct LearnerHandle {
  QueryBudget budget;  // declared (q, tau)
  std::function<Hypothesis(QueryAnswerer&)> run;
};

LearnerHandle make_averaging_halfspace(size_t d, double eps, double kappa,
                                       double coord_bound);
LearnerHandle make_conjunction_learner(size_t d, double eps);

// ---------------------------------------------------------------------------
// Extended-oracle simulations (Lemmas; standalone, self-contained deltas)

// |v - E_{D'}[phi_TI]| <= tau w.p. >= 1 - delta.
double simulate_ti(const QuerySpec& query, double tau, double C, double delta,
                   OracleStream& ext, const ReductionOptions& opts = {});

// |v - E_{D'}[phi_CSQ * f]| <= tau w.p. >= 1 - delta.
double simulate_csq_ext(const QuerySpec& query, double tau, double C,
                        double delta, OracleStream& ext,
                        const ReductionOptions& opts = {});

// Full statistical query: v = v_TI + v_CSQ, |v - E_{D'}[psi]| <= tau
// w.p. >= 1 - delta.
double simulate_sq_ext(const QuerySpec& query, double tau, double C,
                       double delta, OracleStream& ext,
                       const ReductionOptions& opts = {});

// Constant known rate gamma over the plain noisy oracle (D' = D_x).
double simulate_sq_rcn(const QuerySpec& query, double tau, double gamma,
                       double delta, OracleStream& noisy,
                       const ReductionOptions& opts = {});

// Reusable simulator: one normalization estimate shared across the queries
// of a run, per-query failure budget delta/q split over the two halves.
// Holds a reference; the oracle must outlive the simulator.
class ExtSqSimulator : public QueryAnswerer {
 public:
  ExtSqSimulator(OracleStream& ext, double C, double delta_total,
                 size_t planned_queries, const ReductionOptions& opts = {});

  double answer(const QuerySpec& query, double tau) override;
  uint64_t draws_made() const { return ext_.draws_made(); }
  OracleStream& oracle() { return ext_; }

 private:
  void ensure_z(double tau_prime, double delta);

  OracleStream& ext_;
  double C_;
  double delta_total_;
  size_t planned_queries_;
  ReductionOptions opts_;
  double z_hat_ = 0.0;
  double z_tau_prime_ = 0.0;  // 0 = not yet estimated
};

// ---------------------------------------------------------------------------
// Error estimation and the test-side ground-truth comparator

// Empirical misclassification rate against the oracle's (noisy) labels.
double estimate_error(const Hypothesis& h, OracleStream& oracle, size_t n);

struct ReweightedEstimate {
  double value = 0.0;
  double std_error = 0.0;
  uint64_t samples_used = 0;
};

// Brute-force E_{D'}[...] via importance weights (1 - 2 eta), normalized.
// part selects psi(x, f(x)), phi_TI(x), or phi_CSQ(x) * f(x).
ReweightedEstimate reweighted_expectation(const QuerySpec& query,
                                          QueryPart part,
                                          const MarginalSpec& marginal,
                                          const Concept& target,
                                          const NoiseSpec& noise, size_t n,
                                          SeedSpec seed);

// ---------------------------------------------------------------------------
// End-to-end reductions

struct CsqReductionResult {
  Hypothesis hypothesis;
  std::vector<CandidateRecord> candidates;
  size_t winner = 0;
  ZGrid grid;
  uint64_t samples_total = 0;
};

// Grid search over the normalization constant; trains one candidate per grid
// point against the noisy oracle and returns the empirical-error argmin.
CsqReductionResult run_csq_reduction(const LearnerHandle& learner,
                                     const NoisyProblem& problem, double eps,
                                     double delta, double C,
                                     const ReductionOptions& opts = {});

struct SqReductionResult {
  Hypothesis hypothesis;
  uint64_t samples_total = 0;
};

// Runs the learner once against the extended oracle, answering every query
// through the decomposition simulations.
SqReductionResult run_sq_reduction(const LearnerHandle& learner,
                                   const NoisyProblem& problem, double eps,
                                   double delta, double C,
                                   const ReductionOptions& opts = {});

}  // namespace noisysq
