#pragma once

// Query-based learners. They talk to the world only through a QueryAnswerer,
// which is exactly the boundary the noise reductions intercept.

#include <variant>

#include "noisysq/query.hpp"

namespace noisysq {

struct QueryBudget {
  size_t max_queries = 1;
  double tolerance = 0.1;    // per-query tau in (0,1]
  double delta_share = 0.0;  // failure budget per query, set by the caller
};

struct ConstantLabel {
  Label value = 1;
};

using Hypothesis = std::variant<Halfspace, Conjunction, ConstantLabel>;

Label eval_hypothesis(const Hypothesis& h, std::span<const double> x);
void eval_hypothesis_batch(const Hypothesis& h, const PointBatch& xs,
                           std::span<Label> out);

class QueryAnswerer {
 public:
  virtual ~QueryAnswerer() = default;
  // Returns v with |v - E[psi(x, f(x))]| <= tau (w.h.p., per the provider).
  virtual double answer(const QuerySpec& query, double tau) = 0;
};

enum class LearnerKind { HalfspaceCsq, ConjunctionSq };

// (q, tau) used by each learner: halfspace tau = kappa * eps / sqrt(d),
// conjunction tau = eps / (4d); q = d for both.
QueryBudget query_plan(LearnerKind kind, size_t d, double eps,
                       double kappa = 0.1);

// Averaging learner: d correlational queries phi_i(x) = x_i / coord_bound,
// output the normalized answer vector. Sound for homogeneous halfspace
// targets under spherically symmetric marginals. Falls back to
// ConstantLabel{+1} when the answer vector is below the noise floor d*tau.
Hypothesis learn_halfspace_csq(QueryAnswerer& csq, size_t d, double eps,
                               const QueryBudget& budget,
                               double coord_bound = 1.0);

// Distribution-independent conjunction learner over {-1,+1}^d: includes
// literal i iff the answered Pr[x_i = -1 and f(x) = +1] maps below
// eps / (2d). Requires budget.tolerance <= eps / (4d).
Hypothesis learn_conjunction_sq(QueryAnswerer& sq, size_t d, double eps,
                                const QueryBudget& budget);

}  // namespace noisysq
