// AVX2 kernel variants. Compiled with -mavx2 -mfma and selected at runtime;
// see kernels_dispatch.cpp. Integer kernels reproduce the scalar reference
// bit-for-bit; FP reductions differ only in summation order.

#include "noisysq/kernels.hpp"

#ifdef NOISYSQ_HAVE_AVX2

#include <immintrin.h>

#include <cstring>

#include "noisysq/detail/philox_core.hpp"

namespace noisysq::kern {
namespace {

using detail::kPhiloxM0;
using detail::kPhiloxM1;
using detail::kPhiloxW0;
using detail::kPhiloxW1;

inline void mulwide8(__m256i v, __m256i m, __m256i& lo, __m256i& hi) {
  const __m256i lo32 = _mm256_set1_epi64x(0xFFFFFFFFll);
  __m256i pe = _mm256_mul_epu32(v, m);
  __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(v, 32), m);
  lo = _mm256_or_si256(_mm256_and_si256(pe, lo32), _mm256_slli_epi64(po, 32));
  hi = _mm256_or_si256(_mm256_srli_epi64(pe, 32),
                       _mm256_andnot_si256(lo32, po));
}

struct Philox8 {
  __m256i v0, v1, v2, v3;
};

// NC independent 8-block chains advanced in lockstep. The philox round has a
// serial multiply chain; interleaving chains keeps the multiplier pipe full.
template <int NC>
inline void philox8xN(uint64_t key, uint64_t stream, uint64_t ctr0,
                      Philox8* out) {
  __m256i v0[NC], v1[NC], v2[NC], v3[NC];
  const __m256i stream_lo =
      _mm256_set1_epi32(static_cast<int>(stream & 0xFFFFFFFFu));
  const __m256i stream_hi = _mm256_set1_epi32(static_cast<int>(stream >> 32));
  for (int c = 0; c < NC; ++c) {
    alignas(32) uint32_t lo[8], hi[8];
    for (int lane = 0; lane < 8; ++lane) {
      uint64_t ctr = ctr0 + static_cast<uint64_t>(8 * c + lane);
      lo[lane] = static_cast<uint32_t>(ctr);
      hi[lane] = static_cast<uint32_t>(ctr >> 32);
    }
    v0[c] = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo));
    v1[c] = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi));
    v2[c] = stream_lo;
    v3[c] = stream_hi;
  }
  __m256i k0 = _mm256_set1_epi32(static_cast<int>(key & 0xFFFFFFFFu));
  __m256i k1 = _mm256_set1_epi32(static_cast<int>(key >> 32));
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(kPhiloxM1));
  const __m256i w0 = _mm256_set1_epi32(static_cast<int>(kPhiloxW0));
  const __m256i w1 = _mm256_set1_epi32(static_cast<int>(kPhiloxW1));
  for (int round = 0; round < 10; ++round) {
    for (int c = 0; c < NC; ++c) {
      __m256i lo0, hi0, lo1, hi1;
      mulwide8(v0[c], m0, lo0, hi0);
      mulwide8(v2[c], m1, lo1, hi1);
      __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, v1[c]), k0);
      __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, v3[c]), k1);
      v0[c] = n0;
      v1[c] = lo1;
      v2[c] = n2;
      v3[c] = lo0;
    }
    k0 = _mm256_add_epi32(k0, w0);
    k1 = _mm256_add_epi32(k1, w1);
  }
  for (int c = 0; c < NC; ++c) out[c] = {v0[c], v1[c], v2[c], v3[c]};
}

inline Philox8 philox8(uint64_t key, uint64_t stream, uint64_t ctr0) {
  Philox8 p;
  philox8xN<1>(key, stream, ctr0, &p);
  return p;
}

inline void store_blocks8(const Philox8& p, uint32_t* o) {
  // 4x8 -> 8x4 transpose so blocks land block-major like the reference.
  __m256i t0 = _mm256_unpacklo_epi32(p.v0, p.v1);
  __m256i t1 = _mm256_unpackhi_epi32(p.v0, p.v1);
  __m256i t2 = _mm256_unpacklo_epi32(p.v2, p.v3);
  __m256i t3 = _mm256_unpackhi_epi32(p.v2, p.v3);
  __m256i u0 = _mm256_unpacklo_epi64(t0, t2);  // blocks 0,4
  __m256i u1 = _mm256_unpackhi_epi64(t0, t2);  // blocks 1,5
  __m256i u2 = _mm256_unpacklo_epi64(t1, t3);  // blocks 2,6
  __m256i u3 = _mm256_unpackhi_epi64(t1, t3);  // blocks 3,7
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(o + 0),
                      _mm256_permute2x128_si256(u0, u1, 0x20));
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(o + 8),
                      _mm256_permute2x128_si256(u2, u3, 0x20));
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(o + 16),
                      _mm256_permute2x128_si256(u0, u1, 0x31));
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(o + 24),
                      _mm256_permute2x128_si256(u2, u3, 0x31));
}

void philox_fill_avx2(uint64_t key, uint64_t stream, uint64_t ctr0,
                      size_t nblocks, uint32_t* out) {
  size_t i = 0;
  Philox8 p[2];
  for (; i + 16 <= nblocks; i += 16) {
    philox8xN<2>(key, stream, ctr0 + i, p);
    store_blocks8(p[0], out + 4 * i);
    store_blocks8(p[1], out + 4 * (i + 8));
  }
  for (; i + 8 <= nblocks; i += 8) {
    philox8xN<1>(key, stream, ctr0 + i, p);
    store_blocks8(p[0], out + 4 * i);
  }
  for (; i < nblocks; ++i) {
    auto blk = detail::philox4x32_block(key, stream, ctr0 + i);
    std::memcpy(out + 4 * i, blk.data(), sizeof(blk));
  }
}

void unit_doubles_avx2(const uint64_t* in, size_t n, double* out) {
  const __m256i lo32 = _mm256_set1_epi64x(0xFFFFFFFFll);
  const __m256i exp52 = _mm256_set1_epi64x(0x4330000000000000ll);
  const __m256i exp84 = _mm256_set1_epi64x(0x4530000000000000ll);
  const __m256d joint = _mm256_set1_pd(0x1.00000001p+84);  // 2^84 + 2^52
  const __m256d scale = _mm256_set1_pd(0x1.0p-53);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in + i));
    __m256i v = _mm256_srli_epi64(x, 11);
    __m256i lo = _mm256_or_si256(_mm256_and_si256(v, lo32), exp52);
    __m256i hi = _mm256_or_si256(_mm256_srli_epi64(v, 32), exp84);
    __m256d d = _mm256_add_pd(
        _mm256_sub_pd(_mm256_castsi256_pd(hi), joint), _mm256_castsi256_pd(lo));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, scale));
  }
  for (; i < n; ++i) out[i] = detail::unit_double(in[i]);
}

void hyper_gen_avx2(uint64_t key, uint64_t stream, uint64_t ctr0, size_t n,
                    uint32_t lit_mask, uint32_t class_mask,
                    const uint32_t* flip_thresh, uint32_t* words,
                    int8_t* labels) {
  const __m256i lit = _mm256_set1_epi32(static_cast<int>(lit_mask));
  const __m256i cls = _mm256_set1_epi32(static_cast<int>(class_mask));
  const __m256i sgn = _mm256_set1_epi32(static_cast<int>(0x80000000u));
  const __m256i one8 = _mm256_set1_epi8(1);
  const __m256i negone8 = _mm256_set1_epi8(-1);
  const __m256i lane_fix = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  size_t i = 0;
  Philox8 p[4];
  for (; i + 32 <= n; i += 32) {
    philox8xN<2>(key, stream, ctr0 + i, p);
    philox8xN<2>(key, stream, ctr0 + i + 16, p + 2);
    __m256i lblmask[4];
    for (int g = 0; g < 4; ++g) {
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(words + i + 8 * g),
                          p[g].v0);
      __m256i fpos =
          _mm256_cmpeq_epi32(_mm256_and_si256(p[g].v0, lit), lit);
      __m256i th = _mm256_i32gather_epi32(
          reinterpret_cast<const int*>(flip_thresh),
          _mm256_and_si256(p[g].v0, cls), 4);
      // unsigned coin < thresh
      __m256i flip = _mm256_cmpgt_epi32(_mm256_xor_si256(th, sgn),
                                        _mm256_xor_si256(p[g].v1, sgn));
      lblmask[g] = _mm256_xor_si256(fpos, flip);  // all-ones => label +1
    }
    __m256i t0 = _mm256_packs_epi32(lblmask[0], lblmask[1]);
    __m256i t1 = _mm256_packs_epi32(lblmask[2], lblmask[3]);
    __m256i bytes = _mm256_packs_epi16(t0, t1);
    bytes = _mm256_permutevar8x32_epi32(bytes, lane_fix);
    __m256i lbl = _mm256_blendv_epi8(negone8, one8, bytes);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(labels + i), lbl);
  }
  for (; i < n; ++i) {
    auto blk = detail::philox4x32_block(key, stream, ctr0 + i);
    uint32_t word = blk[0];
    int8_t f = ((word & lit_mask) == lit_mask) ? int8_t{1} : int8_t{-1};
    bool flip = blk[1] < flip_thresh[word & class_mask];
    words[i] = word;
    labels[i] = flip ? static_cast<int8_t>(-f) : f;
  }
}

double sum_avx2(const double* a, size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_add_pd(s0, _mm256_loadu_pd(a + i));
    s1 = _mm256_add_pd(s1, _mm256_loadu_pd(a + i + 4));
    s2 = _mm256_add_pd(s2, _mm256_loadu_pd(a + i + 8));
    s3 = _mm256_add_pd(s3, _mm256_loadu_pd(a + i + 12));
  }
  __m256d s = _mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, s);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += a[i];
  return total;
}

double dot_avx2(const double* a, const double* b, size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                         _mm256_loadu_pd(b + i + 4), s1);
  }
  __m256d s = _mm256_add_pd(s0, s1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, s);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sumsq_avx2(const double* a, size_t n) { return dot_avx2(a, a, n); }

void row_dots_avx2(const double* rows, size_t n, size_t d, const double* w,
                   double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double* r = rows + i * d;
    __m256d acc = _mm256_setzero_pd();
    size_t k = 0;
    for (; k + 4 <= d; k += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(r + k), _mm256_loadu_pd(w + k),
                            acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; k < d; ++k) s += r[k] * w[k];
    out[i] = s;
  }
}

void row_sumsq_avx2(const double* rows, size_t n, size_t d, double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double* r = rows + i * d;
    __m256d acc = _mm256_setzero_pd();
    size_t k = 0;
    for (; k + 4 <= d; k += 4) {
      __m256d v = _mm256_loadu_pd(r + k);
      acc = _mm256_fmadd_pd(v, v, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; k < d; ++k) s += r[k] * r[k];
    out[i] = s;
  }
}

size_t count_sign_diff_avx2(const double* a, const double* b, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t c = 0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ga = _mm256_cmp_pd(_mm256_loadu_pd(a + i), zero, _CMP_GE_OQ);
    __m256d gb = _mm256_cmp_pd(_mm256_loadu_pd(b + i), zero, _CMP_GE_OQ);
    int mask = _mm256_movemask_pd(_mm256_xor_pd(ga, gb));
    c += static_cast<size_t>(__builtin_popcount(mask));
  }
  for (; i < n; ++i) c += (a[i] >= 0.0) != (b[i] >= 0.0);
  return c;
}

LitLabelCounts lit_label_counts_avx2(const uint32_t* words,
                                     const int8_t* labels, size_t n,
                                     unsigned bit) {
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i lane_fix = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  const __m256i zero8 = _mm256_setzero_si256();
  uint64_t pos = 0, neg = 0;
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i m[4];
    for (int g = 0; g < 4; ++g) {
      __m256i wv = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(words + i + 8 * g));
      __m256i bitv = _mm256_and_si256(
          _mm256_srli_epi32(wv, static_cast<int>(bit)), one);
      m[g] = _mm256_cmpeq_epi32(bitv, _mm256_setzero_si256());  // x_bit == -1
    }
    __m256i t0 = _mm256_packs_epi32(m[0], m[1]);
    __m256i t1 = _mm256_packs_epi32(m[2], m[3]);
    __m256i sel = _mm256_permutevar8x32_epi32(_mm256_packs_epi16(t0, t1),
                                              lane_fix);
    __m256i lbl =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(labels + i));
    __m256i lblpos = _mm256_cmpgt_epi8(lbl, zero8);
    uint32_t selm = static_cast<uint32_t>(_mm256_movemask_epi8(sel));
    uint32_t posm = static_cast<uint32_t>(_mm256_movemask_epi8(lblpos));
    pos += static_cast<uint64_t>(__builtin_popcount(selm & posm));
    neg += static_cast<uint64_t>(__builtin_popcount(selm & ~posm));
  }
  for (; i < n; ++i) {
    if (((words[i] >> bit) & 1u) == 0) {
      if (labels[i] > 0) {
        ++pos;
      } else {
        ++neg;
      }
    }
  }
  return {pos, neg};
}

// Histogram updates stay scalar (serial dependent stores); the surrounding
// word generation is what the vector path accelerates.
void class_hist_fallback(const uint32_t* words, size_t n, uint32_t class_mask,
                         uint64_t* hist) {
  for (size_t i = 0; i < n; ++i) ++hist[words[i] & class_mask];
}

void lit_class_hist_fallback(const uint32_t* words, size_t n,
                             uint32_t class_mask, unsigned bit,
                             uint64_t* hist) {
  for (size_t i = 0; i < n; ++i) {
    if (((words[i] >> bit) & 1u) == 0) ++hist[words[i] & class_mask];
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table = {
      "avx2",
      sum_avx2,
      dot_avx2,
      sumsq_avx2,
      row_dots_avx2,
      row_sumsq_avx2,
      count_sign_diff_avx2,
      philox_fill_avx2,
      unit_doubles_avx2,
      hyper_gen_avx2,
      class_hist_fallback,
      lit_class_hist_fallback,
      lit_label_counts_avx2,
  };
  return table;
}

}  // namespace noisysq::kern

#endif  // NOISYSQ_HAVE_AVX2
