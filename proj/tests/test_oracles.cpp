#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "noisysq/oracles.hpp"
#include "support/test_oracles.hpp"

using namespace noisysq;

TEST_CASE("noiseless draws carry the target label") {
  OracleStream s(UniformBall{3}, Halfspace{{0.0, 0.0, 1.0}}, std::nullopt,
                 OracleMode::Noiseless, {1, 1});
  DrawBatch b;
  s.draw_batch(10000, b);
  for (size_t i = 0; i < 10000; ++i) {
    CHECK(b.ys[i] == eval_concept(Concept{Halfspace{{0.0, 0.0, 1.0}}},
                                  b.xs.point(i)));
  }
  CHECK(s.draws_made() == 10000);
}

TEST_CASE("noisy mode without a noise spec is a configuration error") {
  CHECK_THROWS_AS(OracleStream(UniformBall{2}, Halfspace{{1.0, 0.0}},
                               std::nullopt, OracleMode::Noisy, {1, 1}),
                  ConfigError);
}

TEST_CASE("RCN flip rate matches gamma") {
  Concept f = Halfspace{{1.0, 0.0}};
  OracleStream s(UniformBall{2}, f, Rcn{0.3}, OracleMode::Noisy, {2, 5});
  DrawBatch b;
  size_t n = 1000000;
  s.draw_batch(n, b);
  size_t flips = 0;
  for (size_t i = 0; i < n; ++i) {
    flips += b.ys[i] != eval_concept(f, b.xs.point(i));
  }
  double rate = static_cast<double>(flips) / static_cast<double>(n);
  CHECK(std::abs(rate - 0.3) <= 0.0015);
}

TEST_CASE("extended oracle reports eta bit-exactly and flips accordingly") {
  NoiseSpec noise = RadialTsybakov{0.5, 1.0, 0.4, 2};
  Concept f = Halfspace{{0.0, 1.0}};
  OracleStream s(UniformBall{2}, f, noise, OracleMode::ExtendedNoisy, {7, 9});
  DrawBatch b;
  size_t n = 2000000;
  s.draw_batch(n, b);

  // bit-exact eta
  for (size_t i = 0; i < 5000; ++i) {
    CHECK(b.eta[i] == flip_probability(noise, b.xs.point(i)));
  }

  // conditional flip frequency per eta bucket of width 0.05
  std::map<int, std::pair<uint64_t, uint64_t>> bins;  // bin -> (flips, total)
  std::map<int, double> bin_eta_sum;
  for (size_t i = 0; i < n; ++i) {
    int bin = static_cast<int>(b.eta[i] / 0.05);
    bool flip = b.ys[i] != eval_concept(f, b.xs.point(i));
    bins[bin].first += flip;
    bins[bin].second += 1;
    bin_eta_sum[bin] += b.eta[i];
  }
  size_t checked = 0;
  for (auto& [bin, counts] : bins) {
    if (counts.second < 100000) continue;
    double freq = static_cast<double>(counts.first) /
                  static_cast<double>(counts.second);
    double mean_eta = bin_eta_sum[bin] / static_cast<double>(counts.second);
    CHECK(std::abs(freq - mean_eta) <= 0.01);
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("oracle determinism and draw accounting") {
  NoiseSpec noise = Rcn{0.2};
  Concept f = Halfspace{{1.0, 0.0, 0.0}};
  OracleStream a(UniformSphere{3}, f, noise, OracleMode::ExtendedNoisy, {9, 1});
  OracleStream b(UniformSphere{3}, f, noise, OracleMode::ExtendedNoisy, {9, 1});
  DrawBatch da, db;
  a.draw_batch(777, da);
  a.draw_batch(223, db);
  CHECK(a.draws_made() == 1000);
  // batching does not change the sequence
  DrawBatch dc;
  b.draw_batch(1000, dc);
  for (size_t i = 0; i < 777; ++i) {
    CHECK(da.ys[i] == dc.ys[i]);
    for (size_t k = 0; k < 3; ++k) CHECK(da.xs.point(i)[k] == dc.xs.point(i)[k]);
  }
  for (size_t i = 0; i < 223; ++i) CHECK(db.ys[i] == dc.ys[777 + i]);
}

TEST_CASE("packed and dense hypercube paths see identical examples") {
  ClassTable table{12, 4, {}};
  RandomStream rng({100, 3});
  table.etas.resize(16);
  for (auto& e : table.etas) e = 0.45 * rng.next_unit();
  Concept f = Conjunction{12, {1, 5, 7}};

  OracleStream dense(UniformHypercube{12}, f, table, OracleMode::ExtendedNoisy,
                     {50, 4});
  OracleStream packed(UniformHypercube{12}, f, table, OracleMode::ExtendedNoisy,
                      {50, 4});
  REQUIRE(packed.packed_supported());

  DrawBatch db;
  dense.draw_batch(5000, db);
  PackedDrawBatch pb;
  packed.draw_batch_packed(5000, pb, /*want_eta=*/true);
  for (size_t i = 0; i < 5000; ++i) {
    CHECK(db.ys[i] == pb.ys[i]);
    CHECK(db.eta[i] == pb.eta[i]);
    for (size_t k = 0; k < 12; ++k) {
      bool bit = (pb.words[i] >> k) & 1u;
      CHECK(db.xs.point(i)[k] == (bit ? 1.0 : -1.0));
    }
  }
  // mixed usage stays aligned
  Draw d1 = dense.draw();
  PackedDrawBatch pb2;
  packed.draw_batch_packed(1, pb2, true);
  CHECK(d1.y == pb2.ys[0]);
}

TEST_CASE("clean SQ oracle answers within tolerance") {
  Concept f = Halfspace{{1.0, 0.0, 0.0}};
  MarginalSpec sphere = UniformSphere{3};

  double v = clean_sq(QuerySpec{ConstantQuery{0.5}}, 0.05, sphere, f, {1, 2});
  CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

  // E[(x_1) sign(x_1)] = E|x_1|, cross-checked against quadrature.
  double truth = testsupport::sphere_abs_coordinate_mean(3);
  double v2 = clean_sq(QuerySpec{CoordinateCorrelation{0, 1.0}}, 0.01, sphere,
                       f, {1, 3});
  CHECK(std::abs(v2 - truth) <= 0.01);

  // zero error against itself: indicator maps to -1
  double v3 = clean_sq(QuerySpec{ErrorIndicator{f}}, 0.02, sphere, f, {1, 4});
  CHECK(std::abs(v3 - (-1.0)) <= 0.02);
  CHECK(probability_from_answer(v3) <= 0.01);

  CHECK_THROWS_AS(
      (void)clean_sq(QuerySpec{ConstantQuery{0.5}}, 0.0, sphere, f, {1, 5}),
      ConfigError);
}

TEST_CASE("clean CSQ oracle restricts to correlational queries") {
  Concept f = Halfspace{{0.6, 0.8}};
  MarginalSpec ball = UniformBall{2};

  // phi == 1 expressed through the empty-conjunction error indicator:
  // psi(x,y) = -y, so E = -E[f]; symmetric marginal + homogeneous target -> 0
  QuerySpec neg_label{ErrorIndicator{Conjunction{2, {}}}};
  double v = clean_csq(neg_label, 0.01, ball, f, {2, 2});
  CHECK(std::abs(v) <= 0.01);

  CHECK(clean_csq(QuerySpec{ConstantQuery{0.0}}, 0.5, ball, f, {2, 3}) == 0.0);

  CHECK_THROWS_AS((void)clean_csq(QuerySpec{LiteralViolationIndicator{0}}, 0.1,
                                  ball, f, {2, 4}),
                  ContractViolation);
}

TEST_CASE("clean SQ tracks a 100x brute-force estimate on random queries") {
  RandomStream rng({123, 9});
  MarginalSpec ball = UniformBall{3};
  double tau = 0.08;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> w(3);
    rng.fill_gaussian(w);
    Concept f = make_halfspace(w);
    QuerySpec q = [&]() -> QuerySpec {
      switch (rng.next_u64() % 3) {
        case 0:
          return QuerySpec{CoordinateCorrelation{
              static_cast<uint32_t>(rng.next_u64() % 3), 1.0}};
        case 1: {
          std::vector<double> h(3);
          rng.fill_gaussian(h);
          return QuerySpec{ErrorIndicator{make_halfspace(h)}};
        }
        default:
          return QuerySpec{LiteralViolationIndicator{
              static_cast<uint32_t>(rng.next_u64() % 3)}};
      }
    }();
    uint64_t tag = 1000 + static_cast<uint64_t>(t);
    double v = clean_sq(q, tau, ball, f, {9, tag});

    size_t n_ref = 100 * clean_sq_sample_size(tau);
    OracleStream ref(ball, f, std::nullopt, OracleMode::Noiseless, {10, tag});
    DrawBatch batch;
    std::vector<double> vals(1 << 15);
    double s = 0;
    size_t left = n_ref;
    while (left > 0) {
      size_t take = std::min(left, vals.size());
      ref.draw_batch(take, batch);
      eval_query_part_batch(q, QueryPart::Full, batch.xs, batch.ys,
                            std::span(vals).first(take));
      for (size_t i = 0; i < take; ++i) s += vals[i];
      left -= take;
    }
    double brute = s / static_cast<double>(n_ref);
    CHECK(std::abs(v - brute) <= 2.0 * tau);
  }
}

TEST_CASE("draw dump emits the documented columns") {
  OracleStream s(UniformBall{2}, Halfspace{{1.0, 0.0}}, Rcn{0.1},
                 OracleMode::ExtendedNoisy, {3, 3});
  std::ostringstream os;
  dump_draws_csv(s, 5, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "x0,x1,y,eta");
  size_t rows = 0;
  for (std::string line; std::getline(is, line);) rows += !line.empty();
  CHECK(rows == 5);
}
