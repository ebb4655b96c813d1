#include "noisysq/query.hpp"

#include <algorithm>
#include <cmath>

#include "noisysq/kernels.hpp"

namespace noisysq {

namespace {

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

// psi(x,-y) == -psi(x,y) pointwise. Clamping preserves oddness.
bool pure_correlational(const QuerySpec& q) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantQuery>) {
          return n.value == 0.0;
        } else if constexpr (std::is_same_v<T, CoordinateCorrelation>) {
          return true;
        } else if constexpr (std::is_same_v<T, LiteralViolationIndicator>) {
          return false;
        } else if constexpr (std::is_same_v<T, ErrorIndicator>) {
          return true;  // 1{h != -y} = 1 - 1{h != y}, so the mapped value flips
        } else {
          return pure_correlational(*n.lhs) && pure_correlational(*n.rhs);
        }
      },
      q.node);
}

bool label_independent(const QuerySpec& q) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantQuery>) {
          return true;
        } else if constexpr (std::is_same_v<T, AffineCombination>) {
          return label_independent(*n.lhs) && label_independent(*n.rhs);
        } else {
          return false;
        }
      },
      q.node);
}

std::optional<double> constant_value(const QuerySpec& q) {
  if (const auto* c = std::get_if<ConstantQuery>(&q.node)) return c->value;
  if (const auto* a = std::get_if<AffineCombination>(&q.node)) {
    auto l = constant_value(*a->lhs);
    auto r = constant_value(*a->rhs);
    if (l && r) return clamp1(a->a * *l + a->b * *r);
  }
  return std::nullopt;
}

}  // namespace

QueryPtr make_query(QuerySpec q) {
  return std::make_shared<const QuerySpec>(std::move(q));
}

void validate(const QuerySpec& q, size_t dim) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantQuery>) {
          if (!(n.value >= -1.0 && n.value <= 1.0)) {
            throw ConfigError("constant query value must lie in [-1,1]");
          }
        } else if constexpr (std::is_same_v<T, CoordinateCorrelation>) {
          if (n.index >= dim) throw ConfigError("query coordinate out of range");
          if (!(n.scale > 0.0)) throw ConfigError("query scale must be positive");
        } else if constexpr (std::is_same_v<T, LiteralViolationIndicator>) {
          if (n.index >= dim) throw ConfigError("query coordinate out of range");
        } else if constexpr (std::is_same_v<T, ErrorIndicator>) {
          validate(n.hypothesis);
          if (noisysq::dim(n.hypothesis) != dim) {
            throw ConfigError("error-indicator hypothesis dimension mismatch");
          }
        } else {
          if (!n.lhs || !n.rhs) throw ConfigError("affine query needs children");
          validate(*n.lhs, dim);
          validate(*n.rhs, dim);
        }
      },
      q.node);
}

double eval_query(const QuerySpec& q, std::span<const double> x, Label y) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantQuery>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, CoordinateCorrelation>) {
          return (x[n.index] / n.scale) * static_cast<double>(y);
        } else if constexpr (std::is_same_v<T, LiteralViolationIndicator>) {
          bool hit = !(x[n.index] > 0.0) && y > 0;
          return indicator_to_range(hit ? 1.0 : 0.0);
        } else if constexpr (std::is_same_v<T, ErrorIndicator>) {
          bool err = eval_concept(n.hypothesis, x) != y;
          return indicator_to_range(err ? 1.0 : 0.0);
        } else {
          return clamp1(n.a * eval_query(*n.lhs, x, y) +
                        n.b * eval_query(*n.rhs, x, y));
        }
      },
      q.node);
}

double eval_query_part(const QuerySpec& q, QueryPart part,
                       std::span<const double> x, Label y) {
  switch (part) {
    case QueryPart::Full:
      return eval_query(q, x, y);
    case QueryPart::Ti:
      return 0.5 * (eval_query(q, x, 1) + eval_query(q, x, -1));
    case QueryPart::Csq:
      return 0.5 * (eval_query(q, x, 1) - eval_query(q, x, -1));
  }
  return 0.0;
}

void eval_query_part_batch(const QuerySpec& q, QueryPart part,
                           const PointBatch& xs, std::span<const Label> ys,
                           std::span<double> out) {
  size_t n = xs.size();
  // Column extraction for the hot coordinate-correlation shape.
  if (const auto* cc = std::get_if<CoordinateCorrelation>(&q.node)) {
    const double* base = xs.data() + cc->index;
    size_t d = xs.dim();
    double inv = 1.0 / cc->scale;
    if (part == QueryPart::Ti) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    if (part == QueryPart::Csq) {
      for (size_t i = 0; i < n; ++i) out[i] = base[i * d] * inv;
      return;
    }
    for (size_t i = 0; i < n; ++i) {
      out[i] = base[i * d] * inv * static_cast<double>(ys[i]);
    }
    return;
  }
  if (const auto* ei = std::get_if<ErrorIndicator>(&q.node)) {
    if (const auto* h = std::get_if<Halfspace>(&ei->hypothesis)) {
      std::vector<double> margin(n);
      kern::ops().row_dots(xs.data(), n, xs.dim(), h->weights.data(),
                           margin.data());
      // mapped psi: err ? +1 : -1; phi_CSQ = -h(x); phi_TI = 0
      if (part == QueryPart::Ti) {
        std::fill(out.begin(), out.end(), 0.0);
      } else if (part == QueryPart::Csq) {
        for (size_t i = 0; i < n; ++i) out[i] = margin[i] >= 0.0 ? -1.0 : 1.0;
      } else {
        for (size_t i = 0; i < n; ++i) {
          Label hx = sign_label(margin[i]);
          out[i] = indicator_to_range(hx != ys[i] ? 1.0 : 0.0);
        }
      }
      return;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    out[i] = eval_query_part(q, part, xs.point(i),
                             part == QueryPart::Full ? ys[i] : Label{1});
  }
}

DecomposedQuery decompose_query(const QuerySpec& q) {
  DecomposedQuery d;
  d.psi = make_query(q);
  d.csq_zero = label_independent(q);
  d.ti_zero = pure_correlational(q);
  if (d.ti_zero) {
    d.ti_constant = 0.0;
  } else if (d.csq_zero) {
    d.ti_constant = constant_value(q);
  }
  return d;
}

}  // namespace noisysq
