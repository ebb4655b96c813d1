#include "noisysq/learners.hpp"

#include <cmath>

#include "noisysq/kernels.hpp"

namespace noisysq {

Label eval_hypothesis(const Hypothesis& h, std::span<const double> x) {
  if (const auto* c = std::get_if<ConstantLabel>(&h)) return c->value;
  if (const auto* hs = std::get_if<Halfspace>(&h)) {
    return eval_concept(Concept{*hs}, x);
  }
  return eval_concept(Concept{std::get<Conjunction>(h)}, x);
}

void eval_hypothesis_batch(const Hypothesis& h, const PointBatch& xs,
                           std::span<Label> out) {
  if (const auto* c = std::get_if<ConstantLabel>(&h)) {
    std::fill(out.begin(), out.end(), c->value);
    return;
  }
  if (const auto* hs = std::get_if<Halfspace>(&h)) {
    std::vector<double> margin(xs.size());
    kern::ops().row_dots(xs.data(), xs.size(), xs.dim(), hs->weights.data(),
                         margin.data());
    for (size_t i = 0; i < xs.size(); ++i) out[i] = sign_label(margin[i]);
    return;
  }
  const auto& conj = std::get<Conjunction>(h);
  for (size_t i = 0; i < xs.size(); ++i) {
    out[i] = eval_concept(Concept{conj}, xs.point(i));
  }
}

QueryBudget query_plan(LearnerKind kind, size_t d, double eps, double kappa) {
  if (d == 0) throw ConfigError("query plan needs a positive dimension");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  QueryBudget b;
  b.max_queries = d;
  if (kind == LearnerKind::HalfspaceCsq) {
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
    b.tolerance = kappa * eps / std::sqrt(static_cast<double>(d));
  } else {
    b.tolerance = eps / (4.0 * static_cast<double>(d));
  }
  b.tolerance = std::min(b.tolerance, 1.0);
  return b;
}

namespace {

// Enforces the declared budget on behalf of a learner.
class BudgetedAnswerer {
 public:
  BudgetedAnswerer(QueryAnswerer& inner, const QueryBudget& budget)
      : inner_(inner), budget_(budget) {}

  double ask(const QuerySpec& q) {
    if (used_ == budget_.max_queries) {
      throw LearnerFailure("query budget exhausted");
    }
    ++used_;
    return inner_.answer(q, budget_.tolerance);
  }

 private:
  QueryAnswerer& inner_;
  const QueryBudget& budget_;
  size_t used_ = 0;
};

}  // namespace

Hypothesis learn_halfspace_csq(QueryAnswerer& csq, size_t d, double eps,
                               const QueryBudget& budget, double coord_bound) {
  if (d == 0) throw ConfigError("dimension must be positive");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(coord_bound > 0.0)) throw ConfigError("coordinate bound must be positive");
  BudgetedAnswerer ask(csq, budget);
  std::vector<double> v(d);
  for (size_t i = 0; i < d; ++i) {
    v[i] = ask.ask(QuerySpec{
        CoordinateCorrelation{static_cast<uint32_t>(i), coord_bound}});
  }
  double norm2 = 0;
  for (double c : v) norm2 += c * c;
  double norm = std::sqrt(norm2);
  double floor = static_cast<double>(d) * budget.tolerance;
  if (norm <= floor) {
    // Direction unrecoverable at this tolerance.
    return ConstantLabel{1};
  }
  for (double& c : v) c /= norm;
  return Halfspace{std::move(v)};
}

Hypothesis learn_conjunction_sq(QueryAnswerer& sq, size_t d, double eps,
                                const QueryBudget& budget) {
  if (d == 0 || d > 32) throw ConfigError("conjunction dimension must be in [1,32]");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  double dd = static_cast<double>(d);
  if (budget.tolerance > eps / (4.0 * dd) + 1e-15) {
    throw ContractViolation("conjunction learner needs tau <= eps/(4d)");
  }
  BudgetedAnswerer ask(sq, budget);
  double threshold = eps / (2.0 * dd);
  Conjunction out{d, {}};
  for (uint32_t i = 0; i < d; ++i) {
    double v = ask.ask(QuerySpec{LiteralViolationIndicator{i}});
    if (probability_from_answer(v) <= threshold) out.literals.push_back(i);
  }
  return out;
}

}  // namespace noisysq
