#include "noisysq/oracles.hpp"

#include <cmath>

#include "noisysq/kernels.hpp"

namespace noisysq {

namespace {

constexpr uint64_t kPointSub = 0;
constexpr uint64_t kCoinSub = 1;

SeedSpec sub_seed(SeedSpec seed, uint64_t child) {
  return {seed.master_seed, derive_stream(seed.stream_id, child)};
}

}  // namespace

OracleStream::OracleStream(MarginalSpec marginal, Concept target,
                           std::optional<NoiseSpec> noise, OracleMode mode,
                           SeedSpec seed)
    : marginal_(std::move(marginal)),
      target_(std::move(target)),
      noise_(std::move(noise)),
      mode_(mode),
      d_(noisysq::dim(marginal_)),
      hypercube_(std::holds_alternative<UniformHypercube>(marginal_)),
      packed_ok_(false),
      sampler_(marginal_, sub_seed(seed, kPointSub)),
      coins_(RandomStream(sub_seed(seed, kCoinSub))),
      blocks_(sub_seed(seed, kPointSub)) {
  validate(marginal_);
  validate(target_);
  if (noisysq::dim(target_) != d_) {
    throw ConfigError("target concept dimension does not match marginal");
  }
  if (mode_ != OracleMode::Noiseless) {
    if (!noise_) throw ConfigError("noisy oracle modes need a noise spec");
    validate(*noise_);
  }

  if (hypercube_) {
    const auto* conj = std::get_if<Conjunction>(&target_);
    if (conj) {
      lit_mask_ = 0;
      for (uint32_t lit : conj->literals) lit_mask_ |= (1u << lit);
      if (mode_ == OracleMode::Noiseless || !noise_) {
        class_mask_ = 0;
        thresholds_ = {0u};
        class_etas_ = {0.0};
        packed_ok_ = true;
      } else if (const auto* rcn = std::get_if<Rcn>(&*noise_)) {
        class_mask_ = 0;
        thresholds_ = {flip_threshold(rcn->gamma)};
        class_etas_ = {rcn->gamma};
        packed_ok_ = true;
      } else if (const auto* tab = std::get_if<ClassTable>(&*noise_)) {
        if (tab->dim == d_) {
          class_mask_ = tab->class_bits == 32 ? 0xFFFFFFFFu
                                              : ((1u << tab->class_bits) - 1u);
          thresholds_ = flip_thresholds(*tab);
          class_etas_ = tab->etas;
          packed_ok_ = true;
        }
      }
    }
  }
}

void OracleStream::draw_batch_hypercube(size_t n, DrawBatch& out) {
  out.xs = PointBatch(n, d_);
  out.ys.resize(n);
  bool noisy = mode_ != OracleMode::Noiseless;
  if (noisy) out.eta.resize(n);
  std::vector<double> x(d_);
  for (size_t i = 0; i < n; ++i) {
    uint64_t u0 = blocks_.next_u64();
    (void)blocks_.next_u64();
    uint32_t word = static_cast<uint32_t>(u0);
    uint32_t coin = static_cast<uint32_t>(u0 >> 32);
    auto xi = out.xs.mutable_point(i);
    detail::unpack_hypercube(word, xi);
    Label f = eval_concept(target_, xi);
    if (noisy) {
      double e = flip_probability(*noise_, xi);
      out.eta[i] = e;
      bool flip = static_cast<double>(coin) < e * 4294967296.0;
      out.ys[i] = flip ? static_cast<Label>(-f) : f;
    } else {
      out.ys[i] = f;
    }
  }
}

void OracleStream::draw_batch(size_t n, DrawBatch& out) {
  draws_made_ += n;
  if (hypercube_) {
    draw_batch_hypercube(n, out);
    return;
  }
  out.xs = PointBatch(n, d_);
  out.ys.resize(n);
  sampler_.sample_batch(out.xs);
  eval_concept_batch(target_, out.xs, out.ys);
  if (mode_ == OracleMode::Noiseless) {
    out.eta.clear();
    return;
  }
  out.eta.resize(n);
  flip_probability_batch(*noise_, out.xs, out.eta);
  for (size_t i = 0; i < n; ++i) {
    if (coins_.next() < out.eta[i]) out.ys[i] = -out.ys[i];
  }
}

void OracleStream::draw_batch_packed(size_t n, PackedDrawBatch& out,
                                     bool want_eta) {
  if (!packed_ok_) {
    throw ContractViolation("packed draws unsupported for this configuration");
  }
  draws_made_ += n;
  out.words.resize(n);
  out.ys.resize(n);
  // Packed draws pull whole blocks from the same stream position the dense
  // path would use; hypercube draws keep the stream block-aligned.
  uint64_t ctr0 = blocks_.u64s_consumed() / 2;
  kern::ops().hyper_gen(blocks_.seed().master_seed, blocks_.seed().stream_id,
                        ctr0, n, lit_mask_, class_mask_, thresholds_.data(),
                        out.words.data(), out.ys.data());
  blocks_.skip_u64s(2 * n);
  if (want_eta) {
    out.eta.resize(n);
    for (size_t i = 0; i < n; ++i) {
      out.eta[i] = class_etas_[out.words[i] & class_mask_];
    }
  } else {
    out.eta.clear();
  }
}

Draw OracleStream::draw() {
  DrawBatch b;
  draw_batch(1, b);
  Draw d;
  d.x.assign(b.xs.point(0).begin(), b.xs.point(0).end());
  d.y = b.ys[0];
  if (mode_ == OracleMode::ExtendedNoisy) d.eta = b.eta[0];
  return d;
}

size_t clean_sq_sample_size(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ConfigError("query tolerance must lie in (0, 1]");
  }
  constexpr double kDeltaInternal = 1e-6;
  return static_cast<size_t>(
      std::ceil(2.0 * std::log(2.0 / kDeltaInternal) / (tau * tau)));
}

double clean_sq(const QuerySpec& query, double tau, const MarginalSpec& marginal,
                const Concept& target, SeedSpec seed) {
  validate(query, dim(marginal));
  size_t n = clean_sq_sample_size(tau);
  OracleStream stream(marginal, target, std::nullopt, OracleMode::Noiseless,
                      seed);
  constexpr size_t kChunk = 1u << 14;
  DrawBatch batch;
  std::vector<double> vals(kChunk);
  double total = 0.0;
  size_t left = n;
  while (left > 0) {
    size_t take = std::min(left, kChunk);
    stream.draw_batch(take, batch);
    eval_query_part_batch(query, QueryPart::Full, batch.xs, batch.ys,
                          std::span(vals).first(take));
    total += kern::ops().sum(vals.data(), take);
    left -= take;
  }
  return total / static_cast<double>(n);
}

double clean_csq(const QuerySpec& query, double tau,
                 const MarginalSpec& marginal, const Concept& target,
                 SeedSpec seed) {
  if (!decompose_query(query).ti_zero) {
    throw ContractViolation("clean_csq requires a correlational query");
  }
  return clean_sq(query, tau, marginal, target, seed);
}

void dump_draws_csv(OracleStream& stream, size_t n, std::ostream& os) {
  bool eta = stream.mode() == OracleMode::ExtendedNoisy;
  for (size_t k = 0; k < stream.dim(); ++k) os << "x" << k << ",";
  os << "y";
  if (eta) os << ",eta";
  os << "\n";
  DrawBatch batch;
  stream.draw_batch(n, batch);
  os.precision(17);
  for (size_t i = 0; i < n; ++i) {
    auto x = batch.xs.point(i);
    for (double v : x) os << v << ",";
    os << static_cast<int>(batch.ys[i]);
    if (eta) os << "," << batch.eta[i];
    os << "\n";
  }
}

}  // namespace noisysq
