#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "noisysq/domain.hpp"
#include "noisysq/kernels.hpp"
#include "support/test_oracles.hpp"

using namespace noisysq;

TEST_CASE("sphere samples sit on the sphere") {
  PointBatch pts = sample_marginal(UniformSphere{3}, 1000, {1, 1});
  for (size_t i = 0; i < pts.size(); ++i) {
    auto x = pts.point(i);
    double n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-9);
  }
}

TEST_CASE("ball radius distribution: mass inside r = 1/2 is r^2 in 2-D") {
  size_t n = 1000000;
  PointBatch pts = sample_marginal(UniformBall{2}, n, {2, 7});
  size_t inside = 0;
  for (size_t i = 0; i < n; ++i) {
    auto x = pts.point(i);
    inside += (x[0] * x[0] + x[1] * x[1]) <= 0.25;
  }
  double frac = static_cast<double>(inside) / static_cast<double>(n);
  CHECK(std::abs(frac - 0.25) <= 0.002);  // area ratio, 3 sigma at n = 1e6
}

TEST_CASE("hypercube coordinates are +-1 with zero mean") {
  size_t n = 100000;
  PointBatch pts = sample_marginal(UniformHypercube{4}, n, {3, 9});
  double mean[4] = {0, 0, 0, 0};
  for (size_t i = 0; i < n; ++i) {
    auto x = pts.point(i);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(x[k]) == 1.0);
      mean[k] += x[k];
    }
  }
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(mean[k] / static_cast<double>(n)) <= 0.01);
  }
}

TEST_CASE("gaussian samples respect the truncation radius") {
  SphericalGaussian g{3, 2.0};
  PointBatch pts = sample_marginal(g, 20000, {4, 4});
  for (size_t i = 0; i < pts.size(); ++i) {
    auto x = pts.point(i);
    double n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    CHECK(n2 <= 4.0 + 1e-12);
  }
  CHECK(gaussian_truncation(SphericalGaussian{4, 0.0}) == doctest::Approx(8.0));
}

TEST_CASE("sampling is bit-identical under the same seed") {
  for (MarginalSpec spec :
       {MarginalSpec{UniformBall{3}}, MarginalSpec{UniformSphere{4}},
        MarginalSpec{SphericalGaussian{2, 0.0}},
        MarginalSpec{UniformHypercube{8}}}) {
    PointBatch a = sample_marginal(spec, 5000, {42, 11});
    PointBatch b = sample_marginal(spec, 5000, {42, 11});
    PointBatch c = sample_marginal(spec, 5000, {42, 12});
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size() * dim(spec); ++i) {
      CHECK(a.data()[i] == b.data()[i]);
    }
    size_t same_points = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      bool same = true;
      for (size_t k = 0; k < dim(spec); ++k) {
        same = same && a.point(i)[k] == c.point(i)[k];
      }
      same_points += same;
    }
    CHECK(same_points < a.size() / 10);  // chance hits only (discrete coords)
  }
}

TEST_CASE("spherically symmetric marginals have isotropic directions") {
  for (MarginalSpec spec :
       {MarginalSpec{UniformBall{3}}, MarginalSpec{UniformSphere{3}},
        MarginalSpec{SphericalGaussian{3, 0.0}}}) {
    size_t n = 1000000;
    PointBatch pts = sample_marginal(spec, n, {7, 3});
    double m[3] = {0, 0, 0};
    for (size_t i = 0; i < n; ++i) {
      auto x = pts.point(i);
      double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      if (r <= 0) continue;
      for (int k = 0; k < 3; ++k) m[k] += x[k] / r;
    }
    double norm = 0;
    for (int k = 0; k < 3; ++k) {
      m[k] /= static_cast<double>(n);
      norm += m[k] * m[k];
    }
    CHECK(std::sqrt(norm) <= 0.005);
  }
}

TEST_CASE("concept evaluation follows sign(0) = +1") {
  Concept c = Halfspace{{1.0, 0.0}};
  CHECK(eval_concept(c, std::vector<double>{0.3, -0.9}) == 1);
  CHECK(eval_concept(c, std::vector<double>{0.0, 1.0}) == 1);  // sign(0) = +1
  CHECK(eval_concept(c, std::vector<double>{-0.1, 5.0}) == -1);
}

TEST_CASE("conjunction evaluation") {
  Concept c = Conjunction{4, {1, 3}};
  CHECK(eval_concept(c, std::vector<double>{1, 1, -1, 1}) == 1);
  CHECK(eval_concept(c, std::vector<double>{1, -1, 1, 1}) == -1);
  Concept empty = Conjunction{4, {}};
  CHECK(eval_concept(empty, std::vector<double>{-1, -1, -1, -1}) == 1);
}

TEST_CASE("halfspace evaluation is scale invariant in x") {
  RandomStream rng({5, 5});
  for (int t = 0; t < 200; ++t) {
    std::vector<double> w(4), x(4);
    rng.fill_gaussian(w);
    rng.fill_gaussian(x);
    Concept c = make_halfspace(w);
    double lambda = 0.01 + 10.0 * rng.next_unit();
    std::vector<double> xs = x;
    for (double& v : xs) v *= lambda;
    CHECK(eval_concept(c, x) == eval_concept(c, xs));
  }
}

TEST_CASE("contract and config errors") {
  CHECK_THROWS_AS((void)sample_marginal(UniformBall{0}, 10, {1, 1}), ConfigError);
  CHECK_THROWS_AS((void)sample_marginal(UniformBall{2}, 0, {1, 1}),
                  ContractViolation);
  Concept c = Halfspace{{1.0, 0.0}};
  CHECK_THROWS_AS((void)eval_concept(c, std::vector<double>{1.0, 2.0, 3.0}),
                  ContractViolation);
  CHECK_THROWS_AS((void)validate(Concept{Halfspace{{0.7, 0.0}}}), ConfigError);
  CHECK_THROWS_AS((void)validate(Concept{Conjunction{3, {1, 1}}}), ConfigError);
  CHECK_THROWS_AS((void)validate(Concept{Conjunction{3, {5}}}), ConfigError);
}

TEST_CASE("disagreement_spherical closed form") {
  std::vector<double> u = {1.0, 0.0};
  std::vector<double> v = {0.0, 1.0};
  std::vector<double> nu = {-1.0, 0.0};
  CHECK(disagreement_spherical(u, u) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(disagreement_spherical(u, nu) == doctest::Approx(1.0));
  CHECK(disagreement_spherical(u, v) == doctest::Approx(0.5));
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS((void)disagreement_spherical(u, zero), ContractViolation);
}

TEST_CASE("disagreement_spherical matches Monte-Carlo on the sphere") {
  RandomStream rng({99, 123});
  size_t n = 1000000;
  PointBatch pts = sample_marginal(UniformSphere{4}, n, {99, 5});
  std::vector<Label> fu(n), fv(n);
  for (int pair = 0; pair < 20; ++pair) {
    std::vector<double> u(4), v(4);
    rng.fill_gaussian(u);
    rng.fill_gaussian(v);
    Concept cu = make_halfspace(u);
    Concept cv = make_halfspace(v);
    eval_concept_batch(cu, pts, fu);
    eval_concept_batch(cv, pts, fv);
    size_t diff = 0;
    for (size_t i = 0; i < n; ++i) diff += fu[i] != fv[i];
    double mc = static_cast<double>(diff) / static_cast<double>(n);
    double analytic = disagreement_spherical(std::get<Halfspace>(cu).weights,
                                             std::get<Halfspace>(cv).weights);
    CHECK(std::abs(mc - analytic) <= 0.003);
  }
}

TEST_CASE("coordinate mean magnitudes match quadrature") {
  // brute-force integral oracles for the averaging-learner constants
  double c_sphere5 = testsupport::sphere_abs_coordinate_mean(5);
  CHECK(c_sphere5 == doctest::Approx(0.375).epsilon(1e-6));  // 3/8 analytic
  double c_ball2 = testsupport::ball_abs_coordinate_mean(2);
  CHECK(c_ball2 == doctest::Approx(4.0 / (3.0 * std::numbers::pi)).epsilon(1e-6));

  size_t n = 2000000;
  PointBatch pts = sample_marginal(UniformSphere{5}, n, {17, 1});
  double s = 0;
  for (size_t i = 0; i < n; ++i) s += std::abs(pts.point(i)[0]);
  CHECK(std::abs(s / static_cast<double>(n) - c_sphere5) <= 0.002);
}
