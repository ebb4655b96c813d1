#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "noisysq/reductions.hpp"
#include "support/test_oracles.hpp"

using namespace noisysq;

namespace {

NoiseSpec frozen_class_table(size_t d, unsigned bits, uint64_t seed,
                             double lo = 0.0, double hi = 0.45) {
  ClassTable t{d, bits, {}};
  RandomStream rng({seed, 0});
  t.etas.resize(size_t{1} << bits);
  for (auto& e : t.etas) e = lo + (hi - lo) * rng.next_unit();
  return t;
}

}  // namespace

TEST_CASE("query decomposition structure") {
  QuerySpec ei{ErrorIndicator{Halfspace{{0.0, 1.0}}}};
  DecomposedQuery d1 = decompose_query(ei);
  CHECK(d1.ti_zero);
  CHECK_FALSE(d1.csq_zero);
  std::vector<double> x = {0.3, -0.4};
  // phi_CSQ(x) = -h(x) for the mapped error indicator
  CHECK(eval_query_part(ei, QueryPart::Csq, x, 1) ==
        doctest::Approx(1.0));  // h(x) = -1 here
  CHECK(eval_query_part(ei, QueryPart::Ti, x, 1) == doctest::Approx(0.0));

  DecomposedQuery d2 = decompose_query(QuerySpec{CoordinateCorrelation{1, 2.0}});
  CHECK(d2.ti_zero);
  DecomposedQuery d3 = decompose_query(QuerySpec{ConstantQuery{0.7}});
  CHECK(d3.csq_zero);
  REQUIRE(d3.ti_constant.has_value());
  CHECK(*d3.ti_constant == 0.7);
  DecomposedQuery d4 = decompose_query(QuerySpec{LiteralViolationIndicator{0}});
  CHECK_FALSE(d4.ti_zero);
  CHECK_FALSE(d4.csq_zero);
}

TEST_CASE("decomposition identity holds pointwise") {
  RandomStream rng({606, 0});
  MarginalSampler sampler(UniformBall{4}, {606, 1});
  std::vector<double> x(4);
  // reuse the harness generator shape: local small trees
  for (int t = 0; t < 10000; ++t) {
    QuerySpec q = [&]() -> QuerySpec {
      AffineCombination a;
      a.a = 1.4 * rng.next_symmetric();
      a.b = 1.4 * rng.next_symmetric();
      std::vector<double> w(4);
      rng.fill_gaussian(w);
      a.lhs = make_query(QuerySpec{ErrorIndicator{make_halfspace(w)}});
      a.rhs = make_query(QuerySpec{
          LiteralViolationIndicator{static_cast<uint32_t>(rng.next_u64() % 4)}});
      return QuerySpec{std::move(a)};
    }();
    sampler.sample(x);
    Label y = rng.next_u64() % 2 ? Label{1} : Label{-1};
    double psi = eval_query(q, x, y);
    double ti = eval_query_part(q, QueryPart::Ti, x, 1);
    double csq = eval_query_part(q, QueryPart::Csq, x, 1);
    CHECK(std::abs(psi - (ti + y * csq)) <= 1e-12);
  }
}

TEST_CASE("z grid shape") {
  ZGrid g = make_zgrid(0.1, 2.0);
  CHECK(g.tau_prime == doctest::Approx(0.0125));
  CHECK(g.values.size() == 80);
  CHECK(g.values.front() == doctest::Approx(g.tau_prime));
  CHECK(g.values.back() <= 1.0 + 1e-12);
  for (size_t i = 1; i < g.values.size(); ++i) {
    CHECK(g.values[i] - g.values[i - 1] == doctest::Approx(g.tau_prime));
  }
  CHECK(g.values.front() > 0.0);
}

TEST_CASE("simulate_ti") {
  Concept f = Halfspace{{0.0, 1.0}};
  // constant TI parts are answered exactly without draws
  {
    OracleStream ext(UniformBall{2}, f, Rcn{0.3}, OracleMode::ExtendedNoisy,
                     {1, 1});
    double v = simulate_ti(QuerySpec{ConstantQuery{0.4}}, 0.05, 2.0, 0.05, ext);
    CHECK(v == 0.4);
    CHECK(ext.draws_made() == 0);
  }
  // constant noise: D' = D_x, so the TI value matches the clean mean
  {
    OracleStream ext(UniformBall{2}, f, Rcn{0.3}, OracleMode::ExtendedNoisy,
                     {1, 2});
    QuerySpec q{LiteralViolationIndicator{0}};
    // phi_TI = 1{x_0 <= 0} - 1; E = Pr[x_0 <= 0] - 1 = -1/2 on the ball
    double v = simulate_ti(q, 0.05, 2.0, 0.05, ext);
    CHECK(std::abs(v - (-0.5)) <= 0.05);
  }
  // reweighting case checked against the importance-weighted comparator
  {
    NoiseSpec noise = build_radial_tsybakov(0.5, 1.0, 0.4, UniformBall{2});
    OracleStream ext(UniformBall{2}, f, noise, OracleMode::ExtendedNoisy,
                     {1, 3});
    QuerySpec q{LiteralViolationIndicator{1}};
    double tau = 0.04;
    double v = simulate_ti(q, tau, 2.1, 0.05, ext);
    auto truth = reweighted_expectation(q, QueryPart::Ti, UniformBall{2}, f,
                                        noise, 2000000, {1, 4});
    CHECK(std::abs(v - truth.value) <= tau + 4.0 * truth.std_error);
  }
}

TEST_CASE("simulate_csq_ext") {
  Concept f = Halfspace{{1.0, 0.0}};
  // identically-zero correlational part
  {
    OracleStream ext(UniformBall{2}, f, Rcn{0.2}, OracleMode::ExtendedNoisy,
                     {2, 1});
    CHECK(simulate_csq_ext(QuerySpec{ConstantQuery{0.5}}, 0.1, 2.0, 0.1, ext) ==
          0.0);
    CHECK(ext.draws_made() == 0);
  }
  // zero noise: Z = 1, plain clean correlation
  {
    OracleStream ext(UniformBall{2}, f, Rcn{0.0}, OracleMode::ExtendedNoisy,
                     {2, 2});
    QuerySpec q{CoordinateCorrelation{0, 1.0}};
    double tau = 0.03;
    double v = simulate_csq_ext(q, tau, 1.5, 0.05, ext);
    double truth = testsupport::ball_abs_coordinate_mean(2);
    CHECK(std::abs(v - truth) <= tau);
  }
  // RCN: reweighting cancels, matches the clean value; also the paper's
  // correlational identity against the comparator
  {
    NoiseSpec noise = Rcn{0.3};
    OracleStream ext(UniformBall{2}, f, noise, OracleMode::ExtendedNoisy,
                     {2, 3});
    QuerySpec q{CoordinateCorrelation{0, 1.0}};
    double tau = 0.03;
    double v = simulate_csq_ext(q, tau, 2.5, 0.05, ext);
    double truth = testsupport::ball_abs_coordinate_mean(2);
    CHECK(std::abs(v - truth) <= tau + 0.005);
    auto rew = reweighted_expectation(q, QueryPart::Csq, UniformBall{2}, f,
                                      noise, 1000000, {2, 4});
    CHECK(std::abs(v - rew.value) <= tau + 4.0 * rew.std_error);
  }
}

TEST_CASE("simulate_sq_ext") {
  Concept f = Halfspace{{0.6, -0.8}};
  NoiseSpec noise = build_radial_tsybakov(0.5, 1.0, 0.4, UniformBall{2});
  {
    OracleStream ext(UniformBall{2}, f, noise, OracleMode::ExtendedNoisy,
                     {3, 1});
    CHECK(simulate_sq_ext(QuerySpec{ConstantQuery{-0.25}}, 0.05, 2.1, 0.05,
                          ext) == -0.25);
  }
  {
    std::vector<double> probe = {0.0, 1.0};
    QuerySpec q{ErrorIndicator{Halfspace{probe}}};
    double tau = 0.05;
    OracleStream ext(UniformBall{2}, f, noise, OracleMode::ExtendedNoisy,
                     {3, 2});
    double v = simulate_sq_ext(q, tau, 2.1, 0.05, ext);
    auto truth = reweighted_expectation(q, QueryPart::Full, UniformBall{2}, f,
                                        noise, 2000000, {3, 3});
    CHECK(std::abs(v - truth.value) <= tau + 4.0 * truth.std_error);
  }
}

TEST_CASE("simulate_sq_ext tolerance holds in at least 95% of trials") {
  size_t trials = 200;
  double tau = 0.08, delta = 0.05;
  RandomStream rng({707, 0});
  size_t ok = 0;
  for (size_t t = 0; t < trials; ++t) {
    std::vector<double> w(2), p(2);
    rng.fill_gaussian(w);
    rng.fill_gaussian(p);
    Concept f = make_halfspace(w);
    Halfspace probe = make_halfspace(p);
    NoiseSpec noise = Rcn{0.45 * rng.next_unit()};
    QuerySpec q{ErrorIndicator{probe}};
    OracleStream ext(UniformBall{2}, f, noise, OracleMode::ExtendedNoisy,
                     {707, 10 + t});
    double v = simulate_sq_ext(q, tau, 2.0 / (1.0 - 0.9) * 0.1 + 1.0, delta,
                               ext);
    // truth under constant noise: D' = D_x, exact from the angle
    double dis = disagreement_spherical(std::get<Halfspace>(f).weights,
                                        probe.weights);
    double truth = 2.0 * dis - 1.0;
    ok += std::abs(v - truth) <= tau;
  }
  CHECK(ok >= static_cast<size_t>(0.95 * trials));
}

TEST_CASE("simulate_sq_rcn") {
  Concept f = Halfspace{{1.0, 0.0}};
  // gamma = 0 reduces to plain Monte-Carlo estimation
  {
    OracleStream noisy(UniformBall{2}, f, Rcn{0.0}, OracleMode::Noisy, {4, 1});
    QuerySpec q{CoordinateCorrelation{0, 1.0}};
    double v = simulate_sq_rcn(q, 0.03, 0.0, 0.05, noisy);
    CHECK(std::abs(v - testsupport::ball_abs_coordinate_mean(2)) <= 0.03);
  }
  // known-rate algebra: raw correlation divided by 1 - 2 gamma
  {
    OracleStream noisy(UniformBall{2}, f, Rcn{0.25}, OracleMode::Noisy, {4, 2});
    QuerySpec q{CoordinateCorrelation{0, 1.0}};
    double v = simulate_sq_rcn(q, 0.03, 0.25, 0.05, noisy);
    CHECK(std::abs(v - testsupport::ball_abs_coordinate_mean(2)) <= 0.035);
  }
  // heavy observed flips, clean answer recovered
  {
    OracleStream noisy(UniformBall{2}, f, Rcn{0.4}, OracleMode::Noisy, {4, 3});
    QuerySpec q{ErrorIndicator{Halfspace{{1.0, 0.0}}}};
    double v = simulate_sq_rcn(q, 0.05, 0.4, 0.05, noisy);
    CHECK(std::abs(v - (-1.0)) <= 0.05);
    CHECK(probability_from_answer(v) <= 0.03);
  }
  {
    OracleStream noisy(UniformBall{2}, f, Rcn{0.1}, OracleMode::Noisy, {4, 4});
    CHECK_THROWS_AS((void)simulate_sq_rcn(QuerySpec{ConstantQuery{0.0}}, 0.1,
                                          0.5, 0.05, noisy),
                    ConfigError);
  }
}

TEST_CASE("correlational and error identities at Monte-Carlo scale") {
  RandomStream rng({808, 0});
  for (int t = 0; t < 5; ++t) {
    size_t d = 2 + rng.next_u64() % 3;
    std::vector<double> w(d), p(d);
    rng.fill_gaussian(w);
    rng.fill_gaussian(p);
    Concept f = make_halfspace(w);
    Halfspace probe = make_halfspace(p);
    NoiseSpec noise =
        t % 2 ? NoiseSpec{Rcn{0.35}}
              : NoiseSpec{build_radial_tsybakov(0.5, 1.0, 0.45, UniformBall{d})};
    MarginalSpec marg = UniformBall{d};
    size_t n = 1000000;

    // E_D[phi y] vs Z * E_D'[phi f] == E[(1-2 eta) phi f]
    QuerySpec q{ErrorIndicator{probe}};
    OracleStream noisy(marg, f, noise, OracleMode::Noisy,
                       {808, 10 + static_cast<uint64_t>(t)});
    DrawBatch batch;
    std::vector<double> vals(1 << 15);
    double s = 0, s2 = 0;
    size_t left = n;
    while (left > 0) {
      size_t take = std::min(left, vals.size());
      noisy.draw_batch(take, batch);
      eval_query_part_batch(q, QueryPart::Csq, batch.xs, batch.ys,
                            std::span(vals).first(take));
      for (size_t i = 0; i < take; ++i) {
        double v = batch.ys[i] > 0 ? vals[i] : -vals[i];
        s += v;
        s2 += v * v;
      }
      left -= take;
    }
    double lhs = s / static_cast<double>(n);
    double lhs_se = std::sqrt(
        std::max(0.0, s2 / static_cast<double>(n) - lhs * lhs) /
        static_cast<double>(n));

    // unnormalized weighted mean via the comparator pieces
    auto rew = reweighted_expectation(q, QueryPart::Csq, marg, f, noise, n,
                                      {808, 100 + static_cast<uint64_t>(t)});
    auto mag = estimate_magnitude(noise, marg, n,
                                  {808, 200 + static_cast<uint64_t>(t)});
    double z_hat = 1.0 / mag.estimate;
    double rhs = z_hat * rew.value;
    double rhs_se = std::hypot(z_hat * rew.std_error,
                               rew.value * mag.std_error / (mag.estimate *
                                                            mag.estimate));
    CHECK(std::abs(lhs - rhs) <= 4.0 * std::hypot(lhs_se, rhs_se) + 1e-4);

    // err_D(h) = OPT + E[(1-2 eta) 1{h != f}]
    OracleStream noisy2(marg, f, noise, OracleMode::Noisy,
                        {808, 300 + static_cast<uint64_t>(t)});
    double err = estimate_error(Hypothesis{probe}, noisy2, n);
    OracleStream clean(marg, f, std::nullopt, OracleMode::Noiseless,
                       {808, 400 + static_cast<uint64_t>(t)});
    std::vector<double> eta(1 << 15);
    std::vector<Label> hx(1 << 15);
    double g1 = 0, g2 = 0;
    left = n;
    while (left > 0) {
      size_t take = std::min(left, eta.size());
      clean.draw_batch(take, batch);
      flip_probability_batch(noise, batch.xs, std::span(eta).first(take));
      eval_hypothesis_batch(Hypothesis{probe}, batch.xs,
                            std::span(hx).first(take));
      for (size_t i = 0; i < take; ++i) {
        double g = eta[i] + (hx[i] != batch.ys[i] ? 1.0 - 2.0 * eta[i] : 0.0);
        g1 += g;
        g2 += g * g;
      }
      left -= take;
    }
    double rhs2 = g1 / static_cast<double>(n);
    double rhs2_se = std::sqrt(
        std::max(0.0, g2 / static_cast<double>(n) - rhs2 * rhs2) /
        static_cast<double>(n));
    double err_se = std::sqrt(std::max(1e-12, err * (1.0 - err)) /
                              static_cast<double>(n));
    CHECK(std::abs(err - rhs2) <= 4.0 * std::hypot(err_se, rhs2_se) + 1e-4);
  }
}

TEST_CASE("estimate_error reference points") {
  Concept f = Halfspace{{0.0, 1.0}};
  {
    OracleStream s(UniformBall{2}, f, Rcn{0.0}, OracleMode::Noisy, {5, 1});
    CHECK(estimate_error(Hypothesis{Halfspace{{0.0, 1.0}}}, s, 200000) == 0.0);
  }
  {
    OracleStream s(UniformBall{2}, f, Rcn{0.2}, OracleMode::Noisy, {5, 2});
    double e = estimate_error(Hypothesis{Halfspace{{0.0, 1.0}}}, s, 1000000);
    CHECK(std::abs(e - 0.2) <= 0.0015);
  }
  {
    OracleStream s(UniformBall{2}, f, Rcn{0.2}, OracleMode::Noisy, {5, 3});
    double e = estimate_error(Hypothesis{Halfspace{{0.0, -1.0}}}, s, 1000000);
    CHECK(std::abs(e - 0.8) <= 0.0015);
  }
}

TEST_CASE("reweighted comparator sanity") {
  Concept f = Halfspace{{1.0, 0.0}};
  QuerySpec q{CoordinateCorrelation{0, 1.0}};
  // constant noise: D' = D_x
  auto a = reweighted_expectation(q, QueryPart::Csq, UniformBall{2}, f,
                                  Rcn{0.3}, 1000000, {6, 1});
  CHECK(std::abs(a.value - testsupport::ball_abs_coordinate_mean(2)) <=
        4.0 * a.std_error + 1e-3);
  auto b = reweighted_expectation(q, QueryPart::Csq, UniformBall{2}, f,
                                  Rcn{0.0}, 1000000, {6, 1});
  CHECK(a.samples_used == 1000000);
  CHECK(b.std_error > 0.0);
}

TEST_CASE("grid reduction end to end on zero noise") {
  NoisyProblem problem{UniformBall{2}, Halfspace{{0.8, 0.6}}, Rcn{0.0}, {7, 1}};
  LearnerHandle learner = make_averaging_halfspace(2, 0.2, 0.5, 1.0);
  CsqReductionResult res = run_csq_reduction(learner, problem, 0.2, 0.1, 2.0);
  CHECK(res.candidates.size() ==
        static_cast<size_t>(std::floor(1.0 / res.grid.tau_prime)));
  OracleStream eval(UniformBall{2}, Halfspace{{0.8, 0.6}}, Rcn{0.0},
                    OracleMode::Noisy, {7, 99});
  double err = estimate_error(res.hypothesis, eval, 200000);
  CHECK(err <= 0.2);
}

TEST_CASE("grid reduction on RCN: excess within eps and grid discipline") {
  double eps = 0.2, delta = 0.1, C = 2.0, gamma = 0.25;
  LearnerHandle learner = make_averaging_halfspace(2, eps, 0.5, 1.0);
  size_t ok = 0;
  std::vector<double> winners;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    NoisyProblem problem{UniformBall{2}, Halfspace{{0.0, 1.0}}, Rcn{gamma},
                         {70 + seed, 1}};
    CsqReductionResult res = run_csq_reduction(learner, problem, eps, delta, C);
    size_t expect = static_cast<size_t>(std::floor(1.0 / res.grid.tau_prime));
    CHECK(res.candidates.size() == expect);
    CHECK(res.candidates[res.winner].empirical_error ==
          doctest::Approx(
              std::min_element(res.candidates.begin(), res.candidates.end(),
                               [](const auto& a, const auto& b) {
                                 return a.empirical_error < b.empirical_error;
                               })
                  ->empirical_error));
    winners.push_back(res.grid.values[res.winner]);
    OracleStream eval(UniformBall{2}, Halfspace{{0.0, 1.0}}, Rcn{gamma},
                      OracleMode::Noisy, {70 + seed, 99});
    double err = estimate_error(res.hypothesis, eval, 400000);
    ok += (err - gamma) <= eps;
  }
  CHECK(ok >= 8);
  // informational: where the argmin landed relative to the true Z = 0.5
  double near = 0;
  for (double w : winners) near += std::abs(w - 0.5) <= 0.2;
  MESSAGE("winners near true Z (+-0.2): ", near, "/10; values e.g. ",
          winners[0], " ", winners[1], " ", winners[2]);
}

TEST_CASE("grid reduction degrades gracefully as C is inflated") {
  double eps = 0.3, delta = 0.1, gamma = 0.1;
  double m_hat = 1.0 / (1.0 - 2.0 * gamma);  // exact for RCN
  LearnerHandle learner = make_averaging_halfspace(2, eps, 0.5, 1.0);
  ReductionOptions opts{0.5};
  auto mean_excess = [&](double C) {
    double total = 0;
    for (uint64_t seed = 0; seed < 3; ++seed) {
      NoisyProblem problem{UniformBall{2}, Halfspace{{1.0, 0.0}}, Rcn{gamma},
                           {500 + seed, 1}};
      CsqReductionResult res =
          run_csq_reduction(learner, problem, eps, delta, C, opts);
      OracleStream eval(UniformBall{2}, Halfspace{{1.0, 0.0}}, Rcn{gamma},
                        OracleMode::Noisy, {500 + seed, 99});
      total += estimate_error(res.hypothesis, eval, 300000) - gamma;
    }
    return total / 3.0;
  };
  double tight = mean_excess(m_hat);
  double loose = mean_excess(4.0 * m_hat);
  CHECK(tight <= eps);
  CHECK(loose <= eps);
  // looser C slows convergence but must not break the guarantee
  CHECK(loose >= tight - 0.05);
}

TEST_CASE("sq reduction learns a conjunction under frozen class noise") {
  size_t d = 8;
  double eps = 0.1, delta = 0.1;
  Concept target = Conjunction{d, {1, 4}};
  NoiseSpec noise = frozen_class_table(d, 3, 909);
  NoisyProblem problem{UniformHypercube{d}, target, noise, {90, 1}};
  LearnerHandle learner = make_conjunction_learner(d, eps);
  SqReductionResult res = run_sq_reduction(learner, problem, eps, delta, 2.0);

  // exhaustive evaluation of the result
  testsupport::HypercubeEnumerator enumr(d);
  const auto& table = std::get<ClassTable>(noise);
  uint32_t cmask = (1u << table.class_bits) - 1u;
  auto eta = [&](uint32_t w) { return table.etas[w & cmask]; };
  uint32_t out_mask = 0;
  if (const auto* conj = std::get_if<Conjunction>(&res.hypothesis)) {
    for (uint32_t lit : conj->literals) out_mask |= 1u << lit;
  }
  double opt = enumr.mean(eta);
  double err = enumr.mean([&](uint32_t w) {
    bool h = testsupport::conj_eval(w, out_mask);
    bool f = testsupport::conj_eval(w, 0b10010);
    double e = eta(w);
    return h == f ? e : 1.0 - e;
  });
  CHECK(err - opt <= eps);
  CHECK(res.samples_total > 0);
}

TEST_CASE("sq reduction with zero noise reproduces the clean learner") {
  size_t d = 6;
  Concept target = Conjunction{d, {0, 3}};
  NoisyProblem problem{UniformHypercube{d}, target, Rcn{0.0}, {91, 1}};
  LearnerHandle learner = make_conjunction_learner(d, 0.1);
  SqReductionResult res = run_sq_reduction(learner, problem, 0.1, 0.1, 1.5);
  testsupport::HypercubeEnumerator enumr(d);
  uint32_t out_mask = 0;
  for (uint32_t lit : std::get<Conjunction>(res.hypothesis).literals) {
    out_mask |= 1u << lit;
  }
  double err = enumr.mean([&](uint32_t w) {
    return testsupport::conj_eval(w, out_mask) !=
                   testsupport::conj_eval(w, 0b1001)
               ? 1.0
               : 0.0;
  });
  CHECK(err <= 0.1);
}

TEST_CASE("sq and csq paths agree on a spherically symmetric instance") {
  size_t d = 3;
  double eps = 0.2, delta = 0.1;
  NoiseSpec noise = build_radial_tsybakov(0.5, 1.0, 0.4, UniformBall{d});
  Concept target = Halfspace{{0.0, 0.0, 1.0}};
  double C = tsybakov_magnitude_bound(0.5, 1.0, 0.4).bound;
  LearnerHandle learner = make_averaging_halfspace(d, eps, 0.5, 1.0);
  ReductionOptions opts{0.3};

  double excess_csq = 0, excess_sq = 0;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    NoisyProblem problem{UniformBall{d}, target, noise, {92 + seed, 1}};
    auto opt = bayes_error_stats(noise, UniformBall{d}, 400000, {92 + seed, 7});
    CsqReductionResult rc = run_csq_reduction(learner, problem, eps, delta, C,
                                              opts);
    OracleStream e1(UniformBall{d}, target, noise, OracleMode::Noisy,
                    {92 + seed, 8});
    excess_csq += estimate_error(rc.hypothesis, e1, 400000) - opt.mean;
    SqReductionResult rs = run_sq_reduction(learner, problem, eps, delta, C,
                                            opts);
    OracleStream e2(UniformBall{d}, target, noise, OracleMode::Noisy,
                    {92 + seed, 9});
    excess_sq += estimate_error(rs.hypothesis, e2, 400000) - opt.mean;
  }
  excess_csq /= 3.0;
  excess_sq /= 3.0;
  CHECK(std::abs(excess_csq - excess_sq) <= 0.07);
  CHECK(excess_csq <= eps);
  CHECK(excess_sq <= eps);
}
