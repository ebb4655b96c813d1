#include "noisysq/reductions.hpp"

#include <algorithm>
#include <cmath>

#include "noisysq/kernels.hpp"

namespace noisysq {

namespace {

constexpr size_t kChunk = 1u << 15;

void require_extended(const OracleStream& s) {
  if (s.mode() != OracleMode::ExtendedNoisy) {
    throw ContractViolation("simulation needs the extended noisy oracle");
  }
}

void check_common(double tau, double C, double delta) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0,1]");
  if (!(C >= 1.0)) throw ConfigError("magnitude bound C must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
}

// Mean of (1 - 2 eta) over n extended draws.
double z_sample_mean(OracleStream& ext, size_t n) {
  if (ext.packed_supported()) {
    uint32_t mask = ext.packed_class_mask();
    std::vector<uint64_t> hist(static_cast<size_t>(mask) + 1, 0);
    PackedDrawBatch batch;
    size_t left = n;
    while (left > 0) {
      size_t take = std::min(left, kChunk);
      ext.draw_batch_packed(take, batch, /*want_eta=*/false);
      kern::ops().class_hist(batch.words.data(), take, mask, hist.data());
      left -= take;
    }
    auto etas = ext.packed_class_etas();
    double s = 0.0;
    for (size_t c = 0; c < hist.size(); ++c) {
      s += static_cast<double>(hist[c]) * (1.0 - 2.0 * etas[c]);
    }
    return s / static_cast<double>(n);
  }
  DrawBatch batch;
  double s = 0.0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    ext.draw_batch(take, batch);
    for (size_t i = 0; i < take; ++i) s += 1.0 - 2.0 * batch.eta[i];
    left -= take;
  }
  return s / static_cast<double>(n);
}

struct NumeratorSums {
  double ti = 0.0;   // mean of phi01_TI(x) * (1 - 2 eta)
  double csq = 0.0;  // mean of phi_CSQ(x) * y
};

// One fused pass: the first n_ti draws feed the TI sum, the first n_csq draws
// the CSQ sum. Sharing the stream between the halves is fine: each half's
// Hoeffding bound holds on its own prefix and the union bound does not need
// independence across estimates.
NumeratorSums estimate_numerators(OracleStream& ext, const QuerySpec& query,
                                  size_t n_ti, size_t n_csq) {
  NumeratorSums out;
  size_t n = std::max(n_ti, n_csq);
  if (n == 0) return out;

  const auto* lit = std::get_if<LiteralViolationIndicator>(&query.node);
  if (lit && ext.packed_supported()) {
    uint32_t mask = ext.packed_class_mask();
    std::vector<uint64_t> hist(static_cast<size_t>(mask) + 1, 0);
    uint64_t pos = 0, neg = 0;
    PackedDrawBatch batch;
    size_t done = 0;
    while (done < n) {
      size_t take = std::min(n - done, kChunk);
      ext.draw_batch_packed(take, batch, /*want_eta=*/false);
      size_t take_ti = done < n_ti ? std::min(take, n_ti - done) : 0;
      size_t take_csq = done < n_csq ? std::min(take, n_csq - done) : 0;
      if (take_ti > 0) {
        kern::ops().lit_class_hist(batch.words.data(), take_ti, mask,
                                   lit->index, hist.data());
      }
      if (take_csq > 0) {
        auto c = kern::ops().lit_label_counts(batch.words.data(),
                                              batch.ys.data(), take_csq,
                                              lit->index);
        pos += c.pos;
        neg += c.neg;
      }
      done += take;
    }
    if (n_ti > 0) {
      auto etas = ext.packed_class_etas();
      double s = 0.0;
      for (size_t c = 0; c < hist.size(); ++c) {
        s += static_cast<double>(hist[c]) * (1.0 - 2.0 * etas[c]);
      }
      // phi01 = (1 + phi_TI)/2 = 1{x_i = -1} / 2 for this query shape.
      out.ti = 0.5 * s / static_cast<double>(n_ti);
    }
    if (n_csq > 0) {
      out.csq = (static_cast<double>(pos) - static_cast<double>(neg)) /
                static_cast<double>(n_csq);
    }
    return out;
  }

  DrawBatch batch;
  std::vector<double> vals(kChunk), w(kChunk);
  double s_ti = 0.0, s_csq = 0.0;
  size_t done = 0;
  while (done < n) {
    size_t take = std::min(n - done, kChunk);
    ext.draw_batch(take, batch);
    size_t take_ti = done < n_ti ? std::min(take, n_ti - done) : 0;
    size_t take_csq = done < n_csq ? std::min(take, n_csq - done) : 0;
    if (take_ti > 0) {
      eval_query_part_batch(query, QueryPart::Ti, batch.xs, batch.ys,
                            std::span(vals).first(take_ti));
      for (size_t i = 0; i < take_ti; ++i) {
        vals[i] = 0.5 * (1.0 + vals[i]);
        w[i] = 1.0 - 2.0 * batch.eta[i];
      }
      s_ti += kern::ops().dot(vals.data(), w.data(), take_ti);
    }
    if (take_csq > 0) {
      eval_query_part_batch(query, QueryPart::Csq, batch.xs, batch.ys,
                            std::span(vals).first(take_csq));
      for (size_t i = 0; i < take_csq; ++i) {
        s_csq += batch.ys[i] > 0 ? vals[i] : -vals[i];
      }
    }
    done += take;
  }
  if (n_ti > 0) out.ti = s_ti / static_cast<double>(n_ti);
  if (n_csq > 0) out.csq = s_csq / static_cast<double>(n_csq);
  return out;
}

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

size_t scaled_count(double raw, double scale) {
  if (!(scale > 0.0)) throw ConfigError("sample scale must be positive");
  double n = std::ceil(raw * scale);
  if (n < 100.0) n = 100.0;
  if (n > 4e18) throw ConfigError("draw count overflow");
  return static_cast<size_t>(n);
}

ZGrid make_zgrid(double tau, double C) {
  check_common(tau, C, 0.5);
  ZGrid g;
  g.tau_prime = tau / (2.0 * C * C);
  g.magnitude_bound = C;
  // The printed grid would start at 0, which cannot divide an estimate; the
  // proof only needs a point in [Z, Z + tau'] and Z >= 1/C >= tau', so we
  // start at tau'.
  size_t count = static_cast<size_t>(std::floor(1.0 / g.tau_prime));
  g.values.resize(count);
  for (size_t j = 0; j < count; ++j) {
    g.values[j] = static_cast<double>(j + 1) * g.tau_prime;
  }
  return g;
}

LearnerHandle make_averaging_halfspace(size_t d, double eps, double kappa,
                                       double coord_bound) {
  LearnerHandle h;
  h.budget = query_plan(LearnerKind::HalfspaceCsq, d, eps, kappa);
  h.run = [d, eps, coord_bound, budget = h.budget](QueryAnswerer& a) {
    return learn_halfspace_csq(a, d, eps, budget, coord_bound);
  };
  return h;
}

LearnerHandle make_conjunction_learner(size_t d, double eps) {
  LearnerHandle h;
  h.budget = query_plan(LearnerKind::ConjunctionSq, d, eps);
  h.run = [d, eps, budget = h.budget](QueryAnswerer& a) {
    return learn_conjunction_sq(a, d, eps, budget);
  };
  return h;
}

// ---------------------------------------------------------------------------
// Standalone simulations

double simulate_ti(const QuerySpec& query, double tau, double C, double delta,
                   OracleStream& ext, const ReductionOptions& opts) {
  check_common(tau, C, delta);
  require_extended(ext);
  DecomposedQuery dq = decompose_query(query);
  if (dq.ti_constant) return *dq.ti_constant;

  double tau_p = tau / (2.0 * C);
  double delta_e = delta / 2.0;
  size_t n = scaled_count(2.0 * std::log(2.0 / delta_e) / (tau_p * tau_p),
                          opts.sample_scale);
  double z_hat = z_sample_mean(ext, n) + tau_p / 2.0;
  if (!(z_hat > 0.0)) {
    throw MagnitudeBoundViolation("normalization estimate not positive");
  }
  NumeratorSums s = estimate_numerators(ext, query, n, 0);
  double num_hat = s.ti + tau_p / 2.0;
  return clamp1(2.0 * (num_hat / z_hat) - 1.0);
}

double simulate_csq_ext(const QuerySpec& query, double tau, double C,
                        double delta, OracleStream& ext,
                        const ReductionOptions& opts) {
  check_common(tau, C, delta);
  require_extended(ext);
  DecomposedQuery dq = decompose_query(query);
  if (dq.csq_zero) return 0.0;

  double tau_p = tau / (2.0 * C * C);
  double delta_e = delta / 2.0;
  size_t n_z = scaled_count(2.0 * std::log(2.0 / delta_e) / (tau_p * tau_p),
                            opts.sample_scale);
  double z_hat = z_sample_mean(ext, n_z) + tau_p / 2.0;
  if (!(z_hat > 0.0)) {
    throw MagnitudeBoundViolation("normalization estimate not positive");
  }
  size_t n = scaled_count(
      8.0 * C * C * std::log(2.0 / delta_e) / (tau * tau), opts.sample_scale);
  NumeratorSums s = estimate_numerators(ext, query, 0, n);
  return clamp1(s.csq / z_hat);
}

double simulate_sq_ext(const QuerySpec& query, double tau, double C,
                       double delta, OracleStream& ext,
                       const ReductionOptions& opts) {
  ExtSqSimulator sim(ext, C, delta, 1, opts);
  return sim.answer(query, tau);
}

double simulate_sq_rcn(const QuerySpec& query, double tau, double gamma,
                       double delta, OracleStream& noisy,
                       const ReductionOptions& opts) {
  check_common(tau, 1.0, delta);
  if (!(gamma >= 0.0 && gamma < 0.5)) {
    throw ConfigError("known RCN rate must lie in [0, 1/2)");
  }
  DecomposedQuery dq = decompose_query(query);
  double rate = 1.0 - 2.0 * gamma;
  double delta_e = delta / 2.0;
  bool need_ti = !dq.ti_constant.has_value();
  bool need_csq = !dq.csq_zero;
  // Under constant noise D' = D_x: the TI half averages phi_TI directly and
  // the correlational half divides the raw correlation by (1 - 2 gamma).
  size_t n_ti = need_ti ? scaled_count(8.0 * std::log(2.0 / delta_e) /
                                           (tau * tau),
                                       opts.sample_scale)
                        : 0;
  size_t n_csq = need_csq
                     ? scaled_count(8.0 * std::log(2.0 / delta_e) /
                                        (tau * tau * rate * rate),
                                    opts.sample_scale)
                     : 0;
  NumeratorSums s = estimate_numerators(noisy, query, n_ti, n_csq);
  double v_ti = dq.ti_constant ? *dq.ti_constant
                               : 2.0 * s.ti - 1.0;  // undo the [0,1] map
  double v_csq = need_csq ? s.csq / rate : 0.0;
  return clamp1(v_ti + v_csq);
}

// ---------------------------------------------------------------------------
// ExtSqSimulator

ExtSqSimulator::ExtSqSimulator(OracleStream& ext, double C, double delta_total,
                               size_t planned_queries,
                               const ReductionOptions& opts)
    : ext_(ext), C_(C), delta_total_(delta_total),
      planned_queries_(std::max<size_t>(1, planned_queries)), opts_(opts) {
  require_extended(ext_);
  check_common(1.0, C, delta_total);
}

void ExtSqSimulator::ensure_z(double tau_prime, double delta) {
  if (z_tau_prime_ > 0.0 && z_tau_prime_ <= tau_prime) return;
  size_t n = scaled_count(
      2.0 * std::log(2.0 / delta) / (tau_prime * tau_prime), opts_.sample_scale);
  z_hat_ = z_sample_mean(ext_, n) + tau_prime / 2.0;
  z_tau_prime_ = tau_prime;
  if (!(z_hat_ > 0.0)) {
    throw MagnitudeBoundViolation("normalization estimate not positive");
  }
}

double ExtSqSimulator::answer(const QuerySpec& query, double tau) {
  check_common(tau, C_, delta_total_);
  DecomposedQuery dq = decompose_query(query);
  bool need_ti = !dq.ti_constant.has_value();
  bool need_csq = !dq.csq_zero;
  if (!need_ti && !need_csq) return clamp1(*dq.ti_constant);

  double tau_h = tau / 2.0;
  double delta_e = delta_total_ / (4.0 * static_cast<double>(planned_queries_));
  double tau_p_ti = tau_h / (2.0 * C_);
  double tau_p_z = need_csq ? tau_h / (2.0 * C_ * C_) : tau_p_ti;
  ensure_z(tau_p_z, delta_total_ / 2.0);

  size_t n_ti =
      need_ti ? scaled_count(2.0 * std::log(2.0 / delta_e) /
                                 (tau_p_ti * tau_p_ti),
                             opts_.sample_scale)
              : 0;
  size_t n_csq =
      need_csq ? scaled_count(8.0 * C_ * C_ * std::log(2.0 / delta_e) /
                                  (tau_h * tau_h),
                              opts_.sample_scale)
               : 0;
  NumeratorSums s = estimate_numerators(ext_, query, n_ti, n_csq);
  double v_ti;
  if (dq.ti_constant) {
    v_ti = *dq.ti_constant;
  } else {
    double num_hat = s.ti + tau_p_ti / 2.0;
    v_ti = 2.0 * (num_hat / z_hat_) - 1.0;
  }
  double v_csq = need_csq ? clamp1(s.csq / z_hat_) : 0.0;
  return clamp1(v_ti + v_csq);
}

// ---------------------------------------------------------------------------
// Error estimation and the reweighted comparator

double estimate_error(const Hypothesis& h, OracleStream& oracle, size_t n) {
  if (n == 0) throw ContractViolation("error estimation needs n >= 1");
  uint64_t wrong = 0;
  if (oracle.packed_supported()) {
    const auto* conj = std::get_if<Conjunction>(&h);
    const auto* cl = std::get_if<ConstantLabel>(&h);
    if (conj || cl) {
      uint32_t hmask = 0;
      if (conj) {
        for (uint32_t lit : conj->literals) hmask |= (1u << lit);
      }
      PackedDrawBatch batch;
      size_t left = n;
      while (left > 0) {
        size_t take = std::min(left, kChunk);
        oracle.draw_batch_packed(take, batch, /*want_eta=*/false);
        for (size_t i = 0; i < take; ++i) {
          Label hx = cl ? cl->value
                        : (((batch.words[i] & hmask) == hmask) ? Label{1}
                                                               : Label{-1});
          wrong += hx != batch.ys[i];
        }
        left -= take;
      }
      return static_cast<double>(wrong) / static_cast<double>(n);
    }
  }
  DrawBatch batch;
  std::vector<Label> hx(kChunk);
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    oracle.draw_batch(take, batch);
    eval_hypothesis_batch(h, batch.xs, std::span(hx).first(take));
    for (size_t i = 0; i < take; ++i) wrong += hx[i] != batch.ys[i];
    left -= take;
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

ReweightedEstimate reweighted_expectation(const QuerySpec& query,
                                          QueryPart part,
                                          const MarginalSpec& marginal,
                                          const Concept& target,
                                          const NoiseSpec& noise, size_t n,
                                          SeedSpec seed) {
  if (n == 0) throw ContractViolation("reweighted expectation needs n >= 1");
  OracleStream clean(marginal, target, std::nullopt, OracleMode::Noiseless,
                     seed);
  DrawBatch batch;
  std::vector<double> vals(kChunk), eta(kChunk);
  double sw = 0, swv = 0, sw2 = 0, sw2v = 0, sw2v2 = 0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    clean.draw_batch(take, batch);  // ys are the true labels f(x)
    eval_query_part_batch(query, part, batch.xs, batch.ys,
                          std::span(vals).first(take));
    if (part == QueryPart::Csq) {
      // correlational value is phi(x) * f(x)
      for (size_t i = 0; i < take; ++i) {
        vals[i] = batch.ys[i] > 0 ? vals[i] : -vals[i];
      }
    }
    flip_probability_batch(noise, batch.xs, std::span(eta).first(take));
    for (size_t i = 0; i < take; ++i) {
      double w = 1.0 - 2.0 * eta[i];
      double v = vals[i];
      sw += w;
      swv += w * v;
      sw2 += w * w;
      sw2v += w * w * v;
      sw2v2 += w * w * v * v;
    }
    left -= take;
  }
  if (!(sw > 0.0)) throw DegenerateNoise("total importance weight vanished");
  ReweightedEstimate out;
  out.value = swv / sw;
  double r = out.value;
  double ssq = sw2v2 - 2.0 * r * sw2v + r * r * sw2;  // sum w^2 (v - r)^2
  out.std_error = std::sqrt(std::max(0.0, ssq)) / sw;
  out.samples_used = n;
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end reductions

namespace {

// Answers CSQs with the empirical noisy correlation divided by the grid's
// current guess, clamped to [-1,1].
class GridCsqAnswerer : public QueryAnswerer {
 public:
  GridCsqAnswerer(OracleStream& oracle, double z_tilde, double C, size_t q,
                  double delta, const ReductionOptions& opts)
      : oracle_(oracle), z_tilde_(z_tilde), C_(C), q_(std::max<size_t>(1, q)),
        delta_(delta), opts_(opts) {}

  double answer(const QuerySpec& query, double tau) override {
    if (!decompose_query(query).ti_zero) {
      throw ContractViolation("grid reduction answers correlational queries only");
    }
    double delta_q = delta_ / static_cast<double>(q_);
    size_t n = scaled_count(
        8.0 * C_ * C_ * std::log(2.0 / delta_q) / (tau * tau),
        opts_.sample_scale);
    NumeratorSums s = estimate_numerators(oracle_, query, 0, n);
    return clamp1(s.csq / z_tilde_);
  }

 private:
  OracleStream& oracle_;
  double z_tilde_;
  double C_;
  size_t q_;
  double delta_;
  ReductionOptions opts_;
};

}  // namespace

CsqReductionResult run_csq_reduction(const LearnerHandle& learner,
                                     const NoisyProblem& problem, double eps,
                                     double delta, double C,
                                     const ReductionOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  check_common(learner.budget.tolerance, C, delta);

  CsqReductionResult out;
  out.grid = make_zgrid(learner.budget.tolerance, C);
  size_t n_grid = out.grid.values.size();
  size_t n_err = scaled_count(
      2.0 * std::log(2.0 * static_cast<double>(n_grid) / delta) / (eps * eps),
      opts.sample_scale);

  out.candidates.reserve(n_grid);
  for (size_t j = 0; j < n_grid; ++j) {
    OracleStream train = problem.make_oracle(OracleMode::Noisy, 2 * j + 1);
    GridCsqAnswerer answerer(train, out.grid.values[j], C,
                             learner.budget.max_queries, delta, opts);
    Hypothesis h = learner.run(answerer);
    OracleStream eval = problem.make_oracle(OracleMode::Noisy, 2 * j + 2);
    double err = estimate_error(h, eval, n_err);
    CandidateRecord rec;
    rec.z_tilde = out.grid.values[j];
    rec.hypothesis = h;
    rec.empirical_error = err;
    rec.samples_used = train.draws_made() + eval.draws_made();
    out.samples_total += rec.samples_used;
    out.candidates.push_back(std::move(rec));
  }
  out.winner = 0;
  for (size_t j = 1; j < n_grid; ++j) {
    if (out.candidates[j].empirical_error <
        out.candidates[out.winner].empirical_error) {
      out.winner = j;  // ties keep the lowest grid index
    }
  }
  out.hypothesis = out.candidates[out.winner].hypothesis;
  return out;
}

SqReductionResult run_sq_reduction(const LearnerHandle& learner,
                                   const NoisyProblem& problem, double eps,
                                   double delta, double C,
                                   const ReductionOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  check_common(learner.budget.tolerance, C, delta);
  OracleStream ext = problem.make_oracle(OracleMode::ExtendedNoisy, 1);
  ExtSqSimulator sim(ext, C, delta, learner.budget.max_queries, opts);
  SqReductionResult out;
  out.hypothesis = learner.run(sim);
  out.samples_total = ext.draws_made();
  return out;
}

}  // namespace noisysq
