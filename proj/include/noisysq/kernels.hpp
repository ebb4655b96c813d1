#pragma once

// Arithmetic and counter-RNG kernels used by the Monte-Carlo inner loops.
// Every kernel has a scalar reference implementation and (on x86-64) an
// AVX2 variant selected at runtime. Integer kernels (philox_fill, hyper_gen,
// histograms, counts) are bit-identical across variants; floating-point
// reductions may differ by summation order at the ulp level.

#include <cstddef>
#include <cstdint>

namespace noisysq::kern {

enum class Isa { Scalar, Avx2 };

// y = +1 / y = -1 counts among draws with the probed coordinate equal to -1.
struct LitLabelCounts {
  uint64_t pos = 0;
  uint64_t neg = 0;
};

struct Ops {
  const char* name;

  // Dense reductions.
  double (*sum)(const double* a, size_t n);
  double (*dot)(const double* a, const double* b, size_t n);
  double (*sumsq)(const double* a, size_t n);
  // out[i] = <rows[i*d .. i*d+d), w>
  void (*row_dots)(const double* rows, size_t n, size_t d, const double* w,
                   double* out);
  // out[i] = sum_k rows[i*d+k]^2
  void (*row_sumsq)(const double* rows, size_t n, size_t d, double* out);
  // #{i : sign(a[i]) != sign(b[i])} with sign(0) = +1
  size_t (*count_sign_diff)(const double* a, const double* b, size_t n);

  // Philox4x32-10 blocks for counters ctr0 .. ctr0+nblocks-1.
  // out receives 4 u32 words per block, block-major.
  void (*philox_fill)(uint64_t key, uint64_t stream, uint64_t ctr0,
                      size_t nblocks, uint32_t* out);
  // out[i] = in[i] mapped to [0,1) with 53-bit resolution.
  void (*unit_doubles)(const uint64_t* in, size_t n, double* out);

  // Packed hypercube draws: one philox block per draw. words[i] = block word0
  // (bit j set <=> coordinate j equals +1), coin = block word1.
  // f = +1 iff (word & lit_mask) == lit_mask; flip iff coin < thresh[word & class_mask];
  // labels[i] = flip ? -f : f.
  void (*hyper_gen)(uint64_t key, uint64_t stream, uint64_t ctr0, size_t n,
                    uint32_t lit_mask, uint32_t class_mask,
                    const uint32_t* flip_thresh, uint32_t* words,
                    int8_t* labels);
  // hist[word & class_mask] += 1 (hist zeroed by caller; accumulates).
  void (*class_hist)(const uint32_t* words, size_t n, uint32_t class_mask,
                     uint64_t* hist);
  // hist[word & class_mask] += 1 only where coordinate `bit` equals -1.
  void (*lit_class_hist)(const uint32_t* words, size_t n, uint32_t class_mask,
                         unsigned bit, uint64_t* hist);
  LitLabelCounts (*lit_label_counts)(const uint32_t* words,
                                     const int8_t* labels, size_t n,
                                     unsigned bit);
};

bool cpu_has_avx2();

// Table for a specific variant (Scalar always valid; Avx2 only if compiled in
// and supported by the CPU — check cpu_has_avx2() first).
const Ops& ops_for(Isa isa);

// Active table. Defaults to the best supported variant; the NOISYSQ_ISA
// environment variable ("scalar" or "avx2") overrides at startup.
const Ops& ops();
Isa active_isa();
bool set_isa(Isa isa);  // false if unsupported

}  // namespace noisysq::kern
