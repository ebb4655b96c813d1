#include <atomic>
#include <cstdlib>
#include <cstring>

#include "noisysq/kernels.hpp"

namespace noisysq::kern {

const Ops& scalar_ops();
#ifdef NOISYSQ_HAVE_AVX2
const Ops& avx2_ops();
#endif

bool cpu_has_avx2() {
#if defined(NOISYSQ_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Isa> g_isa{Isa::Scalar};

const Ops* select_default() {
  Isa want = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  if (const char* env = std::getenv("NOISYSQ_ISA")) {
    if (std::strcmp(env, "scalar") == 0) want = Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) want = Isa::Avx2;
  }
  g_isa.store(want, std::memory_order_relaxed);
#ifdef NOISYSQ_HAVE_AVX2
  if (want == Isa::Avx2) return &avx2_ops();
#endif
  return &scalar_ops();
}

}  // namespace

const Ops& ops_for(Isa isa) {
#ifdef NOISYSQ_HAVE_AVX2
  if (isa == Isa::Avx2 && cpu_has_avx2()) return avx2_ops();
#else
  (void)isa;
#endif
  return scalar_ops();
}

const Ops& ops() {
  const Ops* p = g_active.load(std::memory_order_acquire);
  if (!p) {
    p = select_default();
    g_active.store(p, std::memory_order_release);
  }
  return *p;
}

Isa active_isa() {
  ops();
  return g_isa.load(std::memory_order_relaxed);
}

bool set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) return false;
  g_active.store(&ops_for(isa), std::memory_order_release);
  g_isa.store(isa, std::memory_order_relaxed);
  return true;
}

}  // namespace noisysq::kern
