#pragma once

// Closed, serializable statistical-query functions psi(x, y) -> [-1,1].
// Indicator-valued queries are affinely mapped from {0,1} to [-1,1] at this
// boundary; callers that want a probability apply the inverse map.

#include <memory>
#include <optional>
#include <span>
#include <variant>

#include "noisysq/domain.hpp"

namespace noisysq {

struct QuerySpec;
using QueryPtr = std::shared_ptr<const QuerySpec>;

struct ConstantQuery {
  double value = 0.0;  // in [-1,1]
};

// psi(x,y) = (x_i / scale) * y
struct CoordinateCorrelation {
  uint32_t index = 0;
  double scale = 1.0;  // per-coordinate support bound of the marginal
};

// Indicator of (x_i = -1 and y = +1), mapped to [-1,1].
struct LiteralViolationIndicator {
  uint32_t index = 0;
};

// Indicator of h(x) != y, mapped to [-1,1].
struct ErrorIndicator {
  Concept hypothesis;
};

// clamp(a * lhs + b * rhs, -1, 1)
struct AffineCombination {
  double a = 1.0;
  QueryPtr lhs;
  double b = 0.0;
  QueryPtr rhs;
};

struct QuerySpec {
  std::variant<ConstantQuery, CoordinateCorrelation, LiteralViolationIndicator,
               ErrorIndicator, AffineCombination>
      node;
};

QueryPtr make_query(QuerySpec q);

void validate(const QuerySpec& q, size_t dim);

// Pointwise evaluation; always lands in [-1,1].
double eval_query(const QuerySpec& q, std::span<const double> x, Label y);

// The label-independent / correlational halves:
//   phi_TI(x)  = (psi(x,+1) + psi(x,-1)) / 2
//   phi_CSQ(x) = (psi(x,+1) - psi(x,-1)) / 2
// so that psi(x,y) = phi_TI(x) + y * phi_CSQ(x) for y in {-1,+1}.
enum class QueryPart { Full, Ti, Csq };

double eval_query_part(const QuerySpec& q, QueryPart part,
                       std::span<const double> x, Label y);

void eval_query_part_batch(const QuerySpec& q, QueryPart part,
                           const PointBatch& xs, std::span<const Label> ys,
                           std::span<double> out);

// Exact pointwise decomposition with symbolic structure flags for fast paths.
struct DecomposedQuery {
  QueryPtr psi;
  bool ti_zero = false;                // phi_TI identically 0
  bool csq_zero = false;               // phi_CSQ identically 0
  std::optional<double> ti_constant;   // phi_TI identically this value
};

DecomposedQuery decompose_query(const QuerySpec& q);

// Indicator range maps.
inline double indicator_to_range(double p01) { return 2.0 * p01 - 1.0; }
inline double range_to_indicator(double v) { return 0.5 * (v + 1.0); }

// probability-from-answer for indicator-valued queries
inline double probability_from_answer(double v) {
  double p = range_to_indicator(v);
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

}  // namespace noisysq
