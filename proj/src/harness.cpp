#include "noisysq/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace noisysq {

namespace {

constexpr size_t kChunk = 1u << 15;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch())
      .count();
}

SeedSpec sub_seed(uint64_t master, uint64_t stream, uint64_t tag) {
  return {master, derive_stream(stream, tag)};
}

struct MeanVar {
  double mean = 0.0;
  double se = 0.0;
};

MeanVar finish(double s, double s2, size_t n) {
  MeanVar mv;
  mv.mean = s / static_cast<double>(n);
  double var = std::max(0.0, s2 / static_cast<double>(n) - mv.mean * mv.mean);
  mv.se = std::sqrt(var / static_cast<double>(n));
  return mv;
}

// mean of phi_csq(x) * y over the noisy oracle
MeanVar noisy_correlation(OracleStream& noisy, const QuerySpec& q, size_t n) {
  DrawBatch batch;
  std::vector<double> vals(kChunk);
  double s = 0, s2 = 0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
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
  return finish(s, s2, n);
}

// mean of (1 - 2(eta+bias)) * phi_csq(x) * f(x) over the clean distribution
MeanVar weighted_clean_correlation(const MarginalSpec& marginal,
                                   const Concept& target,
                                   const NoiseSpec& noise, double bias,
                                   const QuerySpec& q, size_t n,
                                   SeedSpec seed) {
  OracleStream clean(marginal, target, std::nullopt, OracleMode::Noiseless,
                     seed);
  DrawBatch batch;
  std::vector<double> vals(kChunk), eta(kChunk);
  double s = 0, s2 = 0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    clean.draw_batch(take, batch);
    eval_query_part_batch(q, QueryPart::Csq, batch.xs, batch.ys,
                          std::span(vals).first(take));
    flip_probability_batch(noise, batch.xs, std::span(eta).first(take));
    for (size_t i = 0; i < take; ++i) {
      double w = 1.0 - 2.0 * std::clamp(eta[i] + bias, 0.0, 0.5);
      double v = w * (batch.ys[i] > 0 ? vals[i] : -vals[i]);
      s += v;
      s2 += v * v;
    }
    left -= take;
  }
  return finish(s, s2, n);
}

// ---------------------------------------------------------------------------
// Random instances for the identity suites

std::vector<double> random_unit(RandomStream& rng, size_t d) {
  std::vector<double> w(d);
  rng.fill_gaussian(w);
  double n2 = 0;
  for (double v : w) n2 += v * v;
  if (n2 <= 1e-300) {
    std::fill(w.begin(), w.end(), 0.0);
    w[0] = 1.0;
    return w;
  }
  double inv = 1.0 / std::sqrt(n2);
  for (double& v : w) v *= inv;
  return w;
}

MarginalSpec random_marginal(RandomStream& rng) {
  size_t d = 2 + rng.next_u64() % 5;
  switch (rng.next_u64() % 3) {
    case 0: return UniformBall{d};
    case 1: return UniformSphere{d};
    default: return SphericalGaussian{d, 0.0};
  }
}

NoiseSpec random_noise(RandomStream& rng, const MarginalSpec& marginal) {
  size_t d = dim(marginal);
  bool ball = std::holds_alternative<UniformBall>(marginal);
  uint64_t pick = rng.next_u64() % (ball ? 4 : 2);
  if (pick == 0) {
    return Rcn{0.45 * rng.next_unit()};
  }
  if (pick == 1) {
    double gamma = 0.1 + 0.35 * rng.next_unit();
    double rmax = coordinate_bound(marginal) * std::sqrt(static_cast<double>(d));
    bool rising = rng.next_u64() % 2;
    MassartRadial m;
    m.gamma = gamma;
    m.knots = {{0.0, rising ? 0.0 : gamma}, {rmax, rising ? gamma : 0.0}};
    return m;
  }
  if (pick == 2 && d == 2) {
    double beta = 0.2 + 0.6 * rng.next_unit();
    double rho = 0.05 + 0.4 * rng.next_unit();
    return BetaClean2d{beta, rho, {0.0, 1.0}};
  }
  double alpha = 0.25 + 0.5 * rng.next_unit();
  double t0 = 0.1 + 0.4 * rng.next_unit();
  double amax = std::min(1.0, std::pow(t0, -alpha / (1.0 - alpha)));
  double A = amax * (0.2 + 0.75 * rng.next_unit());
  return RadialTsybakov{alpha, A, t0, d};
}

QuerySpec random_csq_query(RandomStream& rng, const MarginalSpec& marginal) {
  size_t d = dim(marginal);
  if (rng.next_u64() % 2) {
    return QuerySpec{CoordinateCorrelation{
        static_cast<uint32_t>(rng.next_u64() % d), coordinate_bound(marginal)}};
  }
  return QuerySpec{ErrorIndicator{Halfspace{random_unit(rng, d)}}};
}

QuerySpec random_query_tree(RandomStream& rng, size_t d, int depth) {
  if (depth == 0 || rng.next_u64() % 3 == 0) {
    switch (rng.next_u64() % 4) {
      case 0:
        return QuerySpec{ConstantQuery{rng.next_symmetric() * 0.999}};
      case 1:
        return QuerySpec{CoordinateCorrelation{
            static_cast<uint32_t>(rng.next_u64() % d), 1.0}};
      case 2:
        return QuerySpec{
            LiteralViolationIndicator{static_cast<uint32_t>(rng.next_u64() % d)}};
      default:
        return QuerySpec{ErrorIndicator{Halfspace{random_unit(rng, d)}}};
    }
  }
  AffineCombination a;
  a.a = 1.5 * rng.next_symmetric();
  a.b = 1.5 * rng.next_symmetric();
  a.lhs = make_query(random_query_tree(rng, d, depth - 1));
  a.rhs = make_query(random_query_tree(rng, d, depth - 1));
  return QuerySpec{std::move(a)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Names / config JSON

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "magnitude") return ExperimentKind::Magnitude;
  if (name == "verify_identities") return ExperimentKind::VerifyIdentities;
  if (name == "csq_reduction") return ExperimentKind::CsqReduction;
  if (name == "sq_reduction") return ExperimentKind::SqReduction;
  if (name == "rcn_baseline") return ExperimentKind::RcnBaseline;
  if (name == "beta_clean_demo") return ExperimentKind::BetaCleanDemo;
  if (name == "realizable_translation")
    return ExperimentKind::RealizableTranslation;
  if (name == "calibration_sweep") return ExperimentKind::CalibrationSweep;
  throw ConfigError("config: unknown experiment '" + name + "'");
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Magnitude: return "magnitude";
    case ExperimentKind::VerifyIdentities: return "verify_identities";
    case ExperimentKind::CsqReduction: return "csq_reduction";
    case ExperimentKind::SqReduction: return "sq_reduction";
    case ExperimentKind::RcnBaseline: return "rcn_baseline";
    case ExperimentKind::BetaCleanDemo: return "beta_clean_demo";
    case ExperimentKind::RealizableTranslation: return "realizable_translation";
    case ExperimentKind::CalibrationSweep: return "calibration_sweep";
  }
  return "unknown";
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (!j.contains("experiment")) {
    throw ConfigError("config: missing field 'experiment'");
  }
  c.experiment = experiment_from_name(j.at("experiment").get<std::string>());
  if (j.contains("marginal")) c.marginal = marginal_from_json(j.at("marginal"));
  if (j.contains("target")) c.target = concept_from_json(j.at("target"));
  if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));

  auto num = [&](const char* k, double& slot) {
    if (j.contains(k)) slot = j.at(k).get<double>();
  };
  auto cnt = [&](const char* k, size_t& slot) {
    if (j.contains(k)) slot = j.at(k).get<size_t>();
  };
  num("eps", c.eps);
  num("delta", c.delta);
  num("C", c.C);
  num("kappa", c.kappa);
  num("sample_scale", c.sample_scale);
  num("inject_eta_bias", c.inject_eta_bias);
  num("beta", c.beta);
  num("rcn_gamma", c.rcn_gamma);
  num("rcn_tau", c.rcn_tau);
  num("gamma", c.gamma);
  num("alpha", c.alpha);
  num("A", c.A);
  num("t0", c.t0);
  num("eps_prime", c.eps_prime);
  cnt("eval_draws", c.eval_draws);
  cnt("estimate_draws", c.estimate_draws);
  cnt("identity_draws", c.identity_draws);
  cnt("identity_configs", c.identity_configs);
  cnt("rcn_trials", c.rcn_trials);
  cnt("sweep_seeds", c.sweep_seeds);
  cnt("sweep_draw_cap", c.sweep_draw_cap);
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<uint64_t>();
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  if (j.contains("rho_list")) c.rho_list = j.at("rho_list").get<std::vector<double>>();
  if (j.contains("kappa_list"))
    c.kappa_list = j.at("kappa_list").get<std::vector<double>>();
  if (j.contains("d_list")) c.d_list = j.at("d_list").get<std::vector<size_t>>();
  if (j.contains("translation_model"))
    c.translation_model = j.at("translation_model").get<std::string>();
  if (j.contains("c_policy")) {
    std::string p = j.at("c_policy").get<std::string>();
    if (p == "explicit") c.c_policy = MagnitudeBoundPolicy::Explicit;
    else if (p == "analytic") c.c_policy = MagnitudeBoundPolicy::Analytic;
    else if (p == "estimate") c.c_policy = MagnitudeBoundPolicy::Estimate;
    else throw ConfigError("config: unknown c_policy '" + p + "'");
  }
  if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();

  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("config: eps must lie in (0,1)");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("config: delta must lie in (0,1)");
  if (c.c_policy == MagnitudeBoundPolicy::Explicit && !(c.C >= 1.0)) {
    throw ConfigError("config: explicit C must be >= 1");
  }
  if (c.seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  if (!(c.sample_scale > 0.0)) throw ConfigError("config: sample_scale must be positive");
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j{{"experiment", experiment_name(c.experiment)},
         {"marginal", to_json(c.marginal)},
         {"target", to_json(c.target)},
         {"noise", to_json(c.noise)},
         {"eps", c.eps},
         {"delta", c.delta},
         {"C", c.C},
         {"kappa", c.kappa},
         {"sample_scale", c.sample_scale},
         {"master_seed", c.master_seed},
         {"seeds", c.seeds},
         {"eval_draws", c.eval_draws},
         {"estimate_draws", c.estimate_draws},
         {"identity_draws", c.identity_draws},
         {"identity_configs", c.identity_configs},
         {"inject_eta_bias", c.inject_eta_bias},
         {"beta", c.beta},
         {"rho_list", c.rho_list},
         {"rcn_gamma", c.rcn_gamma},
         {"rcn_tau", c.rcn_tau},
         {"rcn_trials", c.rcn_trials},
         {"translation_model", c.translation_model},
         {"gamma", c.gamma},
         {"alpha", c.alpha},
         {"A", c.A},
         {"t0", c.t0},
         {"eps_prime", c.eps_prime},
         {"kappa_list", c.kappa_list},
         {"d_list", c.d_list},
         {"sweep_seeds", c.sweep_seeds},
         {"sweep_draw_cap", c.sweep_draw_cap},
         {"output_path", c.output_path}};
  switch (c.c_policy) {
    case MagnitudeBoundPolicy::Explicit: j["c_policy"] = "explicit"; break;
    case MagnitudeBoundPolicy::Analytic: j["c_policy"] = "analytic"; break;
    case MagnitudeBoundPolicy::Estimate: j["c_policy"] = "estimate"; break;
  }
  return j;
}

json ExperimentResult::to_json(bool include_wall) const {
  json seeds = json::array();
  for (const auto& s : per_seed) {
    json row{{"seed", s.seed},
             {"opt_hat", s.opt_hat},
             {"err_hat", s.err_hat},
             {"excess", s.excess},
             {"magnitude_hat", s.magnitude_hat},
             {"samples_total", s.samples_total}};
    if (include_wall) row["wall_ms"] = s.wall_ms;
    seeds.push_back(std::move(row));
  }
  return json{{"experiment", experiment},
              {"per_seed", std::move(seeds)},
              {"aggregate",
               {{"success_fraction", success_fraction},
                {"mean_excess", mean_excess}}},
              {"details", details}};
}

std::string ExperimentResult::per_seed_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "seed,opt_hat,err_hat,excess,magnitude_hat,samples_total\n";
  for (const auto& s : per_seed) {
    os << s.seed << "," << s.opt_hat << "," << s.err_hat << "," << s.excess
       << "," << s.magnitude_hat << "," << s.samples_total << "\n";
  }
  return os.str();
}

double resolve_magnitude_bound(const ExperimentConfig& c) {
  switch (c.c_policy) {
    case MagnitudeBoundPolicy::Explicit:
      if (!(c.C >= 1.0)) throw ConfigError("config: explicit C must be >= 1");
      return c.C;
    case MagnitudeBoundPolicy::Analytic: {
      auto b = analytic_magnitude_bound(c.noise);
      if (!b) throw ConfigError("config: no analytic magnitude bound available");
      return std::max(1.0, *b);
    }
    case MagnitudeBoundPolicy::Estimate: {
      auto rep = estimate_magnitude(c.noise, c.marginal, c.estimate_draws,
                                    {c.master_seed, 999999});
      return std::max(1.0, 1.1 * (rep.estimate + 3.0 * rep.std_error));
    }
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Identity suites

json verify_identities(const ExperimentConfig& c) {
  json report;
  double bias = c.inject_eta_bias;

  // Query decomposition: psi(x,y) == phi_TI(x) + y * phi_CSQ(x) pointwise.
  {
    RandomStream rng({c.master_seed, 771});
    size_t triples = 100000;
    double max_dev = 0.0;
    MarginalSpec marg = UniformBall{4};
    MarginalSampler sampler(marg, {c.master_seed, 772});
    std::vector<double> x(4);
    for (size_t t = 0; t < triples; ++t) {
      QuerySpec q = random_query_tree(rng, 4, 3);
      sampler.sample(x);
      Label y = rng.next_u64() % 2 ? Label{1} : Label{-1};
      double psi = eval_query(q, x, y);
      double ti = eval_query_part(q, QueryPart::Ti, x, 1);
      double csq = eval_query_part(q, QueryPart::Csq, x, 1);
      max_dev = std::max(max_dev,
                         std::abs(psi - (ti + static_cast<double>(y) * csq)));
    }
    report["decomposition"] = {{"triples", triples},
                               {"max_deviation", max_dev},
                               {"pass", max_dev <= 1e-12}};
  }

  // Correlational identity: E_D[phi y] == Z * E_D'[phi f].
  {
    json rows = json::array();
    bool all = true;
    double worst = 0.0;
    for (size_t k = 0; k < c.identity_configs; ++k) {
      RandomStream rng({c.master_seed, 7000 + k});
      MarginalSpec marg = random_marginal(rng);
      Concept target = Halfspace{random_unit(rng, dim(marg))};
      NoiseSpec noise = random_noise(rng, marg);
      QuerySpec q = random_csq_query(rng, marg);
      OracleStream noisy(marg, target, noise, OracleMode::Noisy,
                         sub_seed(c.master_seed, 7000 + k, 1));
      MeanVar lhs = noisy_correlation(noisy, q, c.identity_draws);
      MeanVar rhs = weighted_clean_correlation(
          marg, target, noise, bias, q, c.identity_draws,
          sub_seed(c.master_seed, 7000 + k, 2));
      double dev = std::abs(lhs.mean - rhs.mean);
      double tol = 4.0 * std::hypot(lhs.se, rhs.se);
      bool pass = dev <= tol;
      all = all && pass;
      worst = std::max(worst, tol > 0 ? dev / tol : 0.0);
      rows.push_back({{"lhs", lhs.mean},
                      {"rhs", rhs.mean},
                      {"deviation", dev},
                      {"tolerance", tol},
                      {"pass", pass}});
    }
    report["csq_identity"] = {{"configs", rows},
                              {"worst_ratio", worst},
                              {"pass", all}};
  }

  // Error identity: err_D(h) == OPT + E[(1-2 eta) 1{h != f}].
  {
    json rows = json::array();
    bool all = true;
    for (size_t k = 0; k < c.identity_configs; ++k) {
      RandomStream rng({c.master_seed, 8000 + k});
      MarginalSpec marg = random_marginal(rng);
      Concept target = Halfspace{random_unit(rng, dim(marg))};
      NoiseSpec noise = random_noise(rng, marg);
      Hypothesis h = Halfspace{random_unit(rng, dim(marg))};

      OracleStream noisy(marg, target, noise, OracleMode::Noisy,
                         sub_seed(c.master_seed, 8000 + k, 1));
      size_t n = c.identity_draws;
      double err = estimate_error(h, noisy, n);
      double err_se =
          std::sqrt(std::max(1e-12, err * (1.0 - err)) / static_cast<double>(n));

      OracleStream clean(marg, target, std::nullopt, OracleMode::Noiseless,
                         sub_seed(c.master_seed, 8000 + k, 2));
      DrawBatch batch;
      std::vector<double> eta(kChunk);
      std::vector<Label> hx(kChunk);
      double s = 0, s2 = 0;
      size_t left = n;
      while (left > 0) {
        size_t take = std::min(left, kChunk);
        clean.draw_batch(take, batch);
        flip_probability_batch(noise, batch.xs, std::span(eta).first(take));
        eval_hypothesis_batch(h, batch.xs, std::span(hx).first(take));
        for (size_t i = 0; i < take; ++i) {
          double e = std::clamp(eta[i] + bias, 0.0, 0.5);
          double g = e + (hx[i] != batch.ys[i] ? 1.0 - 2.0 * e : 0.0);
          s += g;
          s2 += g * g;
        }
        left -= take;
      }
      MeanVar rhs = finish(s, s2, n);
      double dev = std::abs(err - rhs.mean);
      double tol = 4.0 * std::hypot(err_se, rhs.se);
      bool pass = dev <= tol;
      all = all && pass;
      rows.push_back({{"err", err},
                      {"rhs", rhs.mean},
                      {"deviation", dev},
                      {"tolerance", tol},
                      {"pass", pass}});
    }
    report["error_identity"] = {{"configs", rows}, {"pass", all}};
  }

  report["pass"] = report["decomposition"]["pass"].get<bool>() &&
                   report["csq_identity"]["pass"].get<bool>() &&
                   report["error_identity"]["pass"].get<bool>();
  return report;
}

// ---------------------------------------------------------------------------
// Beta-clean demo

json beta_clean_demo(double beta, std::span<const double> rho_list, size_t n,
                     SeedSpec seed) {
  for (size_t i = 1; i < rho_list.size(); ++i) {
    if (!(rho_list[i] < rho_list[i - 1])) {
      throw ConfigError("rho list must be strictly descending");
    }
  }
  json rows = json::array();
  double prev_excess = 1.0;
  bool monotone = true;
  for (double rho : rho_list) {
    BetaCleanInstance inst = build_beta_clean_2d(beta, rho);
    Hypothesis h_star = std::get<Halfspace>(inst.target);
    Hypothesis h_prime = inst.competitor;

    OracleStream eval_star(inst.marginal, inst.target, inst.noise,
                           OracleMode::Noisy, {seed.master_seed,
                            derive_stream(seed.stream_id, 1)});
    double err_star = estimate_error(h_star, eval_star, n);
    OracleStream eval_prime(inst.marginal, inst.target, inst.noise,
                            OracleMode::Noisy, {seed.master_seed,
                             derive_stream(seed.stream_id, 2)});
    double err_prime = estimate_error(h_prime, eval_prime, n);

    OracleStream clean(inst.marginal, inst.target, std::nullopt,
                       OracleMode::Noiseless, {seed.master_seed,
                        derive_stream(seed.stream_id, 3)});
    double dis_mc = estimate_error(h_prime, clean, n);
    double dis_analytic = inst.rotation / std::numbers::pi;

    double excess = err_prime - err_star;
    monotone = monotone && excess <= prev_excess + 0.003;
    prev_excess = excess;
    rows.push_back({{"rho", rho},
                    {"err_star", err_star},
                    {"err_prime", err_prime},
                    {"excess_prime", excess},
                    {"excess_bound", 2.0 * rho * (1.0 - beta)},
                    {"realizable_disagreement_mc", dis_mc},
                    {"realizable_disagreement_analytic", dis_analytic}});
  }
  bool last_small = rows.back()["excess_prime"].get<double>() <=
                    rows.back()["excess_bound"].get<double>() + 0.003;
  bool dis_big = true;
  for (const auto& r : rows) {
    dis_big = dis_big &&
              r["realizable_disagreement_mc"].get<double>() >= beta / 4.0;
  }
  return json{{"beta", beta},
              {"rows", rows},
              {"excess_monotone", monotone},
              {"final_excess_small", last_small},
              {"disagreement_stays_large", dis_big},
              {"pass", monotone && last_small && dis_big}};
}

// ---------------------------------------------------------------------------
// Calibration sweep

json calibration_sweep(const ExperimentConfig& c) {
  if (c.kappa_list.empty() || c.d_list.empty()) {
    throw ConfigError("config: calibration sweep needs kappa_list and d_list");
  }
  json table = json::array();
  std::vector<double> min_success(c.kappa_list.size(), 1.0);
  for (size_t di = 0; di < c.d_list.size(); ++di) {
    size_t d = c.d_list[di];
    for (size_t ki = 0; ki < c.kappa_list.size(); ++ki) {
      double kappa = c.kappa_list[ki];
      QueryBudget budget = query_plan(LearnerKind::HalfspaceCsq, d, c.eps, kappa);
      size_t formula_n = clean_sq_sample_size(budget.tolerance);
      size_t exec_n = std::min(formula_n, c.sweep_draw_cap);
      size_t ok = 0;
      for (size_t s = 0; s < c.sweep_seeds; ++s) {
        uint64_t tag = 600000 + 1000 * di + 10 * ki + s;
        RandomStream rng({c.master_seed, tag});
        Concept target = Halfspace{random_unit(rng, d)};
        MarginalSpec marg = UniformSphere{d};

        struct CleanAnswerer : QueryAnswerer {
          OracleStream stream;
          size_t n;
          CleanAnswerer(const MarginalSpec& m, const Concept& t, SeedSpec sd,
                        size_t n_in)
              : stream(m, t, std::nullopt, OracleMode::Noiseless, sd), n(n_in) {}
          double answer(const QuerySpec& q, double) override {
            DrawBatch batch;
            std::vector<double> vals(kChunk);
            double s = 0;
            size_t left = n;
            while (left > 0) {
              size_t take = std::min(left, kChunk);
              stream.draw_batch(take, batch);
              eval_query_part_batch(q, QueryPart::Full, batch.xs, batch.ys,
                                    std::span(vals).first(take));
              for (size_t i = 0; i < take; ++i) s += vals[i];
              left -= take;
            }
            return s / static_cast<double>(n);
          }
        } answerer(marg, target, sub_seed(c.master_seed, tag, 1), exec_n);

        Hypothesis h = learn_halfspace_csq(answerer, d, c.eps, budget, 1.0);
        if (const auto* hs = std::get_if<Halfspace>(&h)) {
          double dis = disagreement_spherical(
              hs->weights, std::get<Halfspace>(target).weights);
          ok += dis <= c.eps;
        }
      }
      double success = static_cast<double>(ok) / static_cast<double>(c.sweep_seeds);
      min_success[ki] = std::min(min_success[ki], success);
      table.push_back({{"kappa", kappa},
                       {"d", d},
                       {"success_fraction", success},
                       {"formula_draws_per_query", formula_n},
                       {"executed_draws_per_query", exec_n}});
    }
  }
  double recommended = c.kappa_list.front();
  for (size_t ki = 0; ki < c.kappa_list.size(); ++ki) {
    if (min_success[ki] >= 0.9 && c.kappa_list[ki] >= recommended) {
      recommended = c.kappa_list[ki];
    }
  }
  return json{{"table", table}, {"recommended_kappa", recommended}};
}

// ---------------------------------------------------------------------------
// Reduction experiments

namespace {

LearnerHandle learner_for(const ExperimentConfig& c) {
  size_t d = dim(c.marginal);
  if (std::holds_alternative<Conjunction>(c.target)) {
    return make_conjunction_learner(d, c.eps);
  }
  return make_averaging_halfspace(d, c.eps, c.kappa, coordinate_bound(c.marginal));
}

SeedResult evaluate_seed(const ExperimentConfig& c, uint64_t seed,
                         const Hypothesis& h, uint64_t train_samples) {
  SeedResult r;
  r.seed = seed;
  auto opt = bayes_error_stats(c.noise, c.marginal, c.eval_draws,
                               sub_seed(c.master_seed, seed, 52));
  OracleStream eval(c.marginal, c.target, c.noise, OracleMode::Noisy,
                    sub_seed(c.master_seed, seed, 53));
  r.err_hat = estimate_error(h, eval, c.eval_draws);
  r.opt_hat = opt.mean;
  r.excess = r.err_hat - r.opt_hat;
  auto mag = estimate_magnitude(c.noise, c.marginal, c.estimate_draws,
                                sub_seed(c.master_seed, seed, 54));
  r.magnitude_hat = mag.estimate;
  r.samples_total = train_samples + opt.samples_used + eval.draws_made() +
                    mag.samples_used;
  return r;
}

ExperimentResult run_reduction(const ExperimentConfig& c, bool sq_path) {
  ExperimentResult out;
  out.experiment = experiment_name(c.experiment);
  double C = resolve_magnitude_bound(c);
  LearnerHandle learner = learner_for(c);
  ReductionOptions opts{c.sample_scale};
  json candidates_per_seed = json::object();
  json hypotheses = json::object();

  size_t successes = 0;
  double excess_sum = 0.0;
  for (uint64_t seed : c.seeds) {
    double t0 = now_ms();
    NoisyProblem problem{c.marginal, c.target, c.noise,
                         sub_seed(c.master_seed, seed, 51)};
    Hypothesis h;
    uint64_t train_samples = 0;
    if (sq_path) {
      SqReductionResult res = run_sq_reduction(learner, problem, c.eps,
                                               c.delta, C, opts);
      h = res.hypothesis;
      train_samples = res.samples_total;
    } else {
      CsqReductionResult res = run_csq_reduction(learner, problem, c.eps,
                                                 c.delta, C, opts);
      h = res.hypothesis;
      train_samples = res.samples_total;
      json rows = json::array();
      for (const auto& cand : res.candidates) {
        rows.push_back({{"z_tilde", cand.z_tilde},
                        {"empirical_error", cand.empirical_error},
                        {"samples_used", cand.samples_used}});
      }
      candidates_per_seed[std::to_string(seed)] = {
          {"rows", rows},
          {"winner_index", res.winner},
          {"winner_z", res.grid.values[res.winner]},
          {"tau_prime", res.grid.tau_prime}};
    }
    SeedResult r = evaluate_seed(c, seed, h, train_samples);
    r.wall_ms = now_ms() - t0;
    successes += r.excess <= c.eps;
    excess_sum += r.excess;
    hypotheses[std::to_string(seed)] = to_json(h);
    out.per_seed.push_back(r);
  }
  out.success_fraction =
      static_cast<double>(successes) / static_cast<double>(c.seeds.size());
  out.mean_excess = excess_sum / static_cast<double>(c.seeds.size());
  out.details = {{"magnitude_bound_used", C},
                 {"query_budget",
                  {{"max_queries", learner.budget.max_queries},
                   {"tolerance", learner.budget.tolerance}}},
                 {"sample_scale", c.sample_scale},
                 {"hypotheses", hypotheses}};
  if (!sq_path) out.details["candidates_per_seed"] = candidates_per_seed;
  return out;
}

ExperimentResult run_magnitude(const ExperimentConfig& c) {
  ExperimentResult out;
  out.experiment = experiment_name(c.experiment);
  size_t ok = 0;
  json rows = json::array();
  for (uint64_t seed : c.seeds) {
    double t0 = now_ms();
    auto rep = estimate_magnitude(c.noise, c.marginal, c.estimate_draws,
                                  sub_seed(c.master_seed, seed, 1));
    auto opt = bayes_error_stats(c.noise, c.marginal, c.estimate_draws,
                                 sub_seed(c.master_seed, seed, 2));
    SeedResult r;
    r.seed = seed;
    r.opt_hat = opt.mean;
    r.err_hat = opt.mean;  // Bayes classifier error
    r.excess = 0.0;
    r.magnitude_hat = rep.estimate;
    r.samples_total = rep.samples_used + opt.samples_used;
    r.wall_ms = now_ms() - t0;
    out.per_seed.push_back(r);
    // err_D(h*) = 1/2 - 1/(2M), within combined uncertainty
    double implied = 0.5 - 0.5 / rep.estimate;
    double m_se = rep.std_error / (2.0 * rep.estimate * rep.estimate);
    double tol = 4.0 * std::hypot(opt.std_error, m_se);
    bool pass = std::abs(opt.mean - implied) <= tol;
    ok += pass;
    rows.push_back({{"seed", seed},
                    {"magnitude_hat", rep.estimate},
                    {"magnitude_se", rep.std_error},
                    {"analytic_bound", rep.analytic_bound ? json(*rep.analytic_bound)
                                                          : json()},
                    {"opt_hat", opt.mean},
                    {"bayes_identity_pass", pass}});
  }
  out.success_fraction =
      static_cast<double>(ok) / static_cast<double>(c.seeds.size());
  out.mean_excess = 0.0;
  out.details = {{"rows", rows}};
  return out;
}

ExperimentResult run_rcn_baseline(const ExperimentConfig& c) {
  ExperimentResult out;
  out.experiment = experiment_name(c.experiment);
  size_t d = dim(c.marginal);
  if (!spherically_symmetric(c.marginal)) {
    throw ConfigError("config: rcn baseline needs a spherically symmetric marginal");
  }
  double gamma = c.rcn_gamma;
  double tau = c.rcn_tau;
  double delta = c.delta;
  ReductionOptions opts{c.sample_scale};

  size_t ok = 0;
  uint64_t draws_total = 0;
  json rows = json::array();
  for (size_t t = 0; t < c.rcn_trials; ++t) {
    RandomStream rng({c.master_seed, 888000 + t});
    std::vector<double> wstar = random_unit(rng, d);
    std::vector<double> probe = random_unit(rng, d);
    Concept target = Halfspace{wstar};
    double dis = disagreement_spherical(wstar, probe);
    QuerySpec ei{ErrorIndicator{Halfspace{probe}}};
    QuerySpec q;
    double truth;
    if (t % 2 == 0) {
      q = ei;
      truth = 2.0 * dis - 1.0;
    } else {
      uint32_t idx = static_cast<uint32_t>(rng.next_u64() % d);
      QuerySpec lv{LiteralViolationIndicator{idx}};
      // Pr[x_i <= 0 and f = +1] = (pi - angle(-e_i, w*)) / (2 pi)
      std::vector<double> neg_ei(d, 0.0);
      neg_ei[idx] = -1.0;
      double ang = disagreement_spherical(neg_ei, wstar) * std::numbers::pi;
      double p_joint = (std::numbers::pi - ang) / (2.0 * std::numbers::pi);
      double truth_lv = 2.0 * p_joint - 1.0;
      AffineCombination mix;
      mix.a = 0.5;
      mix.lhs = make_query(ei);
      mix.b = 0.5;
      mix.rhs = make_query(lv);
      q = QuerySpec{std::move(mix)};
      truth = 0.5 * (2.0 * dis - 1.0) + 0.5 * truth_lv;
    }
    OracleStream noisy(c.marginal, target, Rcn{gamma}, OracleMode::Noisy,
                       {c.master_seed, derive_stream(889000, t)});
    double v = simulate_sq_rcn(q, tau, gamma, delta, noisy, opts);
    bool pass = std::abs(v - truth) <= tau;
    ok += pass;
    draws_total += noisy.draws_made();
    if (t < 16) {
      rows.push_back({{"truth", truth}, {"answer", v}, {"pass", pass}});
    }
  }

  // Draw-count scaling across noise rates for one representative query.
  json scaling = json::object();
  {
    std::vector<double> gammas = {0.1, 0.4};
    std::vector<uint64_t> counts;
    RandomStream rng({c.master_seed, 890000});
    std::vector<double> wstar = random_unit(rng, d);
    std::vector<double> probe = random_unit(rng, d);
    QuerySpec q{ErrorIndicator{Halfspace{probe}}};
    for (double g : gammas) {
      OracleStream noisy(c.marginal, Concept{Halfspace{wstar}}, Rcn{g},
                         OracleMode::Noisy, {c.master_seed, 890001});
      (void)simulate_sq_rcn(q, tau, g, delta, noisy, opts);
      counts.push_back(noisy.draws_made());
    }
    double measured = static_cast<double>(counts[1]) /
                      static_cast<double>(counts[0]);
    double r0 = 1.0 - 2.0 * gammas[0], r1 = 1.0 - 2.0 * gammas[1];
    double formula = (r0 * r0) / (r1 * r1);
    scaling = {{"gammas", gammas},
               {"draws", counts},
               {"measured_ratio", measured},
               {"formula_ratio", formula},
               {"within_factor_2",
                measured <= 2.0 * formula && measured >= formula / 2.0}};
  }

  out.success_fraction =
      static_cast<double>(ok) / static_cast<double>(c.rcn_trials);
  out.mean_excess = 0.0;
  out.details = {{"trials", c.rcn_trials},
                 {"gamma", gamma},
                 {"tau", tau},
                 {"delta", delta},
                 {"draws_total", draws_total},
                 {"sample_rows", rows},
                 {"scaling", scaling}};
  return out;
}

ExperimentResult run_translation(const ExperimentConfig& c) {
  ExperimentResult out;
  out.experiment = experiment_name(c.experiment);
  json details;
  if (c.translation_model == "massart") {
    double eps = realizable_translation(MassartParams{c.gamma}, c.eps_prime);
    details = {{"model", "massart"},
               {"gamma", c.gamma},
               {"eps_prime", c.eps_prime},
               {"eps", eps}};
    out.success_fraction = 1.0;
  } else if (c.translation_model == "tsybakov") {
    double eps = realizable_translation(
        TsybakovParams{c.alpha, c.A, c.t0}, c.eps_prime);
    // Independent grid maximization of 2 t eps' - 2 A t^(1/(1-alpha)).
    size_t grid_n = 100000;
    double best = 0.0;
    for (size_t i = 0; i <= grid_n; ++i) {
      double t = c.t0 * static_cast<double>(i) / static_cast<double>(grid_n);
      double v = 2.0 * t * c.eps_prime -
                 2.0 * c.A * std::pow(t, 1.0 / (1.0 - c.alpha));
      best = std::max(best, v);
    }
    double dev = std::abs(eps - best);
    details = {{"model", "tsybakov"},
               {"alpha", c.alpha},
               {"A", c.A},
               {"t0", c.t0},
               {"eps_prime", c.eps_prime},
               {"eps", eps},
               {"grid_max", best},
               {"deviation", dev},
               {"pass", dev <= 1e-6}};
    out.success_fraction = dev <= 1e-6 ? 1.0 : 0.0;
  } else {
    throw ConfigError("config: translation_model must be massart or tsybakov");
  }
  out.details = std::move(details);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::Magnitude:
      return run_magnitude(c);
    case ExperimentKind::VerifyIdentities: {
      ExperimentResult out;
      out.experiment = experiment_name(c.experiment);
      out.details = verify_identities(c);
      out.success_fraction = out.details["pass"].get<bool>() ? 1.0 : 0.0;
      return out;
    }
    case ExperimentKind::CsqReduction:
      return run_reduction(c, /*sq_path=*/false);
    case ExperimentKind::SqReduction:
      return run_reduction(c, /*sq_path=*/true);
    case ExperimentKind::RcnBaseline:
      return run_rcn_baseline(c);
    case ExperimentKind::BetaCleanDemo: {
      ExperimentResult out;
      out.experiment = experiment_name(c.experiment);
      out.details = beta_clean_demo(c.beta, c.rho_list, c.eval_draws,
                                    {c.master_seed, c.seeds.front()});
      out.success_fraction = out.details["pass"].get<bool>() ? 1.0 : 0.0;
      return out;
    }
    case ExperimentKind::RealizableTranslation:
      return run_translation(c);
    case ExperimentKind::CalibrationSweep: {
      ExperimentResult out;
      out.experiment = experiment_name(c.experiment);
      out.details = calibration_sweep(c);
      out.success_fraction = 1.0;
      return out;
    }
  }
  throw ConfigError("config: unhandled experiment");
}

void write_outputs(const ExperimentResult& result,
                   const ExperimentConfig& config) {
  if (config.output_path.empty()) return;
  namespace fs = std::filesystem;
  fs::path dir(config.output_path);
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "result.json");
    os << result.to_json(true).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "config.json");
    os << to_json(config).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "per_seed.csv");
    os << result.per_seed_csv();
  }
  if (result.details.contains("candidates_per_seed")) {
    for (const auto& [seed, entry] :
         result.details["candidates_per_seed"].items()) {
      std::ofstream os(dir / ("candidates_seed" + seed + ".csv"));
      os.precision(17);
      os << "z_tilde,empirical_error,samples_used\n";
      for (const auto& row : entry["rows"]) {
        os << row["z_tilde"].get<double>() << ","
           << row["empirical_error"].get<double>() << ","
           << row["samples_used"].get<uint64_t>() << "\n";
      }
    }
  }
}

}  // namespace noisysq
