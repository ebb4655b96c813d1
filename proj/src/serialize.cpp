#include "noisysq/serialize.hpp"

namespace noisysq {

namespace {

[[noreturn]] void bad_field(const std::string& what) {
  throw ConfigError("config: " + what);
}

template <typename T>
T get_field(const json& j, const char* name) {
  if (!j.contains(name)) bad_field(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    bad_field(std::string("field '") + name + "' has the wrong type");
  }
}

std::string variant_tag(const json& j) {
  return get_field<std::string>(j, "variant");
}

}  // namespace

json to_json(const MarginalSpec& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformBall>) {
          return {{"variant", "uniform_ball"}, {"dimension", v.dim}};
        } else if constexpr (std::is_same_v<T, UniformSphere>) {
          return {{"variant", "uniform_sphere"}, {"dimension", v.dim}};
        } else if constexpr (std::is_same_v<T, SphericalGaussian>) {
          return {{"variant", "spherical_gaussian"},
                  {"dimension", v.dim},
                  {"truncation_radius", v.truncation_radius}};
        } else {
          return {{"variant", "uniform_hypercube"}, {"dimension", v.dim}};
        }
      },
      m);
}

MarginalSpec marginal_from_json(const json& j) {
  std::string tag = variant_tag(j);
  size_t d = get_field<size_t>(j, "dimension");
  MarginalSpec out;
  if (tag == "uniform_ball") {
    out = UniformBall{d};
  } else if (tag == "uniform_sphere") {
    out = UniformSphere{d};
  } else if (tag == "spherical_gaussian") {
    SphericalGaussian g{d, 0.0};
    if (j.contains("truncation_radius")) {
      g.truncation_radius = get_field<double>(j, "truncation_radius");
    }
    out = g;
  } else if (tag == "uniform_hypercube") {
    out = UniformHypercube{d};
  } else {
    bad_field("unknown marginal variant '" + tag + "'");
  }
  validate(out);
  return out;
}

json to_json(const Concept& c) {
  if (const auto* h = std::get_if<Halfspace>(&c)) {
    return {{"variant", "halfspace"}, {"weights", h->weights}};
  }
  const auto& conj = std::get<Conjunction>(c);
  return {{"variant", "conjunction"},
          {"dimension", conj.dim},
          {"literals", conj.literals}};
}

Concept concept_from_json(const json& j) {
  std::string tag = variant_tag(j);
  Concept out;
  if (tag == "halfspace") {
    out = Halfspace{get_field<std::vector<double>>(j, "weights")};
  } else if (tag == "conjunction") {
    out = Conjunction{get_field<size_t>(j, "dimension"),
                      get_field<std::vector<uint32_t>>(j, "literals")};
  } else {
    bad_field("unknown concept variant '" + tag + "'");
  }
  validate(out);
  return out;
}

json to_json(const NoiseSpec& n) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rcn>) {
          return {{"variant", "rcn"}, {"gamma", v.gamma}};
        } else if constexpr (std::is_same_v<T, MassartRadial>) {
          json knots = json::array();
          for (const auto& [r, e] : v.knots) knots.push_back({r, e});
          return {{"variant", "massart_radial"},
                  {"gamma", v.gamma},
                  {"knots", knots}};
        } else if constexpr (std::is_same_v<T, RadialTsybakov>) {
          return {{"variant", "radial_tsybakov"},
                  {"alpha", v.alpha},
                  {"A", v.A},
                  {"t0", v.t0},
                  {"dimension", v.dim}};
        } else if constexpr (std::is_same_v<T, BetaClean2d>) {
          return {{"variant", "beta_clean"},
                  {"beta", v.beta},
                  {"rho", v.rho},
                  {"axis", v.axis}};
        } else {
          return {{"variant", "class_table"},
                  {"dimension", v.dim},
                  {"class_bits", v.class_bits},
                  {"etas", v.etas}};
        }
      },
      n);
}

NoiseSpec noise_from_json(const json& j) {
  std::string tag = variant_tag(j);
  NoiseSpec out;
  if (tag == "rcn") {
    out = Rcn{get_field<double>(j, "gamma")};
  } else if (tag == "massart_radial") {
    MassartRadial m;
    m.gamma = get_field<double>(j, "gamma");
    auto knots = get_field<std::vector<std::vector<double>>>(j, "knots");
    for (const auto& k : knots) {
      if (k.size() != 2) bad_field("massart knots must be [radius, eta] pairs");
      m.knots.emplace_back(k[0], k[1]);
    }
    out = std::move(m);
  } else if (tag == "radial_tsybakov") {
    out = RadialTsybakov{get_field<double>(j, "alpha"),
                         get_field<double>(j, "A"), get_field<double>(j, "t0"),
                         get_field<size_t>(j, "dimension")};
  } else if (tag == "beta_clean") {
    BetaClean2d b;
    b.beta = get_field<double>(j, "beta");
    b.rho = get_field<double>(j, "rho");
    auto axis = get_field<std::vector<double>>(j, "axis");
    if (axis.size() != 2) bad_field("beta_clean axis must have 2 entries");
    b.axis = {axis[0], axis[1]};
    out = b;
  } else if (tag == "class_table") {
    out = ClassTable{get_field<size_t>(j, "dimension"),
                     get_field<unsigned>(j, "class_bits"),
                     get_field<std::vector<double>>(j, "etas")};
  } else {
    bad_field("unknown noise variant '" + tag + "'");
  }
  validate(out);
  return out;
}

json to_json(const Hypothesis& h) {
  if (const auto* c = std::get_if<ConstantLabel>(&h)) {
    return {{"variant", "constant_label"}, {"value", static_cast<int>(c->value)}};
  }
  if (const auto* hs = std::get_if<Halfspace>(&h)) {
    return {{"variant", "halfspace"}, {"weights", hs->weights}};
  }
  const auto& conj = std::get<Conjunction>(h);
  return {{"variant", "conjunction"},
          {"dimension", conj.dim},
          {"literals", conj.literals}};
}

Hypothesis hypothesis_from_json(const json& j) {
  std::string tag = variant_tag(j);
  if (tag == "constant_label") {
    int v = get_field<int>(j, "value");
    if (v != 1 && v != -1) bad_field("constant label must be +1 or -1");
    return ConstantLabel{static_cast<Label>(v)};
  }
  Concept c = concept_from_json(j);
  if (auto* hs = std::get_if<Halfspace>(&c)) return *hs;
  return std::get<Conjunction>(c);
}

json to_json(const QuerySpec& q) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantQuery>) {
          return {{"variant", "constant"}, {"value", v.value}};
        } else if constexpr (std::is_same_v<T, CoordinateCorrelation>) {
          return {{"variant", "coordinate_correlation"},
                  {"index", v.index},
                  {"scale", v.scale}};
        } else if constexpr (std::is_same_v<T, LiteralViolationIndicator>) {
          return {{"variant", "literal_violation"}, {"index", v.index}};
        } else if constexpr (std::is_same_v<T, ErrorIndicator>) {
          return {{"variant", "error_indicator"},
                  {"hypothesis", to_json(v.hypothesis)}};
        } else {
          return {{"variant", "affine"},
                  {"a", v.a},
                  {"lhs", to_json(*v.lhs)},
                  {"b", v.b},
                  {"rhs", to_json(*v.rhs)}};
        }
      },
      q.node);
}

QuerySpec query_from_json(const json& j) {
  std::string tag = variant_tag(j);
  if (tag == "constant") {
    return QuerySpec{ConstantQuery{get_field<double>(j, "value")}};
  }
  if (tag == "coordinate_correlation") {
    return QuerySpec{CoordinateCorrelation{get_field<uint32_t>(j, "index"),
                                           get_field<double>(j, "scale")}};
  }
  if (tag == "literal_violation") {
    return QuerySpec{LiteralViolationIndicator{get_field<uint32_t>(j, "index")}};
  }
  if (tag == "error_indicator") {
    if (!j.contains("hypothesis")) bad_field("error_indicator needs hypothesis");
    return QuerySpec{ErrorIndicator{concept_from_json(j.at("hypothesis"))}};
  }
  if (tag == "affine") {
    if (!j.contains("lhs") || !j.contains("rhs")) {
      bad_field("affine query needs lhs and rhs");
    }
    AffineCombination a;
    a.a = get_field<double>(j, "a");
    a.b = get_field<double>(j, "b");
    a.lhs = make_query(query_from_json(j.at("lhs")));
    a.rhs = make_query(query_from_json(j.at("rhs")));
    return QuerySpec{std::move(a)};
  }
  bad_field("unknown query variant '" + tag + "'");
}

}  // namespace noisysq
