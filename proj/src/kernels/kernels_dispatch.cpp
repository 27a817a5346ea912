#include "dr/kernels.hpp"

#include <stdexcept>

namespace dr::kernels {

const Ops* avx2_ops_or_null();  // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return avx2_ops_or_null() != nullptr && cpu_has_avx2();
  }
  return false;
}

const Ops& ops_for(Isa isa) {
  if (isa == Isa::Scalar) return scalar_ops();
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) return *avx2_ops_or_null();
  throw std::runtime_error("requested SIMD ISA not available on this CPU");
}

const Ops& active() {
  static const Ops* best =
      isa_available(Isa::Avx2) ? avx2_ops_or_null() : &scalar_ops();
  return *best;
}

const char* active_name() {
  return isa_available(Isa::Avx2) ? "avx2" : "scalar";
}

}  // namespace dr::kernels
