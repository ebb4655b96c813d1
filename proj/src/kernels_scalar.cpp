// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against.

#include <cstddef>
#include <cstdint>

#include "noisysq/detail/philox_core.hpp"
#include "noisysq/kernels.hpp"

namespace noisysq::kern {
namespace {

double sum_scalar(const double* a, size_t n) {
  // Four independent accumulators; keeps rounding error O(n/4) and matches
  // the lane structure of the vector variant closely enough for tests.
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  for (; i < n; ++i) s0 += a[i];
  return (s0 + s1) + (s2 + s3);
}

double dot_scalar(const double* a, const double* b, size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double sumsq_scalar(const double* a, size_t n) { return dot_scalar(a, a, n); }

void row_dots_scalar(const double* rows, size_t n, size_t d, const double* w,
                     double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double* r = rows + i * d;
    double s = 0;
    for (size_t k = 0; k < d; ++k) s += r[k] * w[k];
    out[i] = s;
  }
}

void row_sumsq_scalar(const double* rows, size_t n, size_t d, double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double* r = rows + i * d;
    double s = 0;
    for (size_t k = 0; k < d; ++k) s += r[k] * r[k];
    out[i] = s;
  }
}

size_t count_sign_diff_scalar(const double* a, const double* b, size_t n) {
  size_t c = 0;
  for (size_t i = 0; i < n; ++i) {
    c += (a[i] >= 0.0) != (b[i] >= 0.0);
  }
  return c;
}

void philox_fill_scalar(uint64_t key, uint64_t stream, uint64_t ctr0,
                        size_t nblocks, uint32_t* out) {
  for (size_t i = 0; i < nblocks; ++i) {
    auto blk = detail::philox4x32_block(key, stream, ctr0 + i);
    out[4 * i + 0] = blk[0];
    out[4 * i + 1] = blk[1];
    out[4 * i + 2] = blk[2];
    out[4 * i + 3] = blk[3];
  }
}

void unit_doubles_scalar(const uint64_t* in, size_t n, double* out) {
  for (size_t i = 0; i < n; ++i) out[i] = detail::unit_double(in[i]);
}

void hyper_gen_scalar(uint64_t key, uint64_t stream, uint64_t ctr0, size_t n,
                      uint32_t lit_mask, uint32_t class_mask,
                      const uint32_t* flip_thresh, uint32_t* words,
                      int8_t* labels) {
  for (size_t i = 0; i < n; ++i) {
    auto blk = detail::philox4x32_block(key, stream, ctr0 + i);
    uint32_t word = blk[0];
    uint32_t coin = blk[1];
    int8_t f = ((word & lit_mask) == lit_mask) ? int8_t{1} : int8_t{-1};
    bool flip = coin < flip_thresh[word & class_mask];
    words[i] = word;
    labels[i] = flip ? static_cast<int8_t>(-f) : f;
  }
}

void class_hist_scalar(const uint32_t* words, size_t n, uint32_t class_mask,
                       uint64_t* hist) {
  for (size_t i = 0; i < n; ++i) ++hist[words[i] & class_mask];
}

void lit_class_hist_scalar(const uint32_t* words, size_t n,
                           uint32_t class_mask, unsigned bit, uint64_t* hist) {
  for (size_t i = 0; i < n; ++i) {
    if (((words[i] >> bit) & 1u) == 0) ++hist[words[i] & class_mask];
  }
}

LitLabelCounts lit_label_counts_scalar(const uint32_t* words,
                                       const int8_t* labels, size_t n,
                                       unsigned bit) {
  LitLabelCounts c;
  for (size_t i = 0; i < n; ++i) {
    if (((words[i] >> bit) & 1u) == 0) {
      if (labels[i] > 0) {
        ++c.pos;
      } else {
        ++c.neg;
      }
    }
  }
  return c;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      sum_scalar,
      dot_scalar,
      sumsq_scalar,
      row_dots_scalar,
      row_sumsq_scalar,
      count_sign_diff_scalar,
      philox_fill_scalar,
      unit_doubles_scalar,
      hyper_gen_scalar,
      class_hist_scalar,
      lit_class_hist_scalar,
      lit_label_counts_scalar,
  };
  return table;
}

}  // namespace noisysq::kern
