#include <cstdlib>
#include <string>

#include <fmt/core.h>

#include "hetpatrol/simd/kernels.hpp"

namespace hetpatrol::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &detail::kScalarKernels;
    case Isa::Avx2: return detail::avx2_kernels();
    case Isa::Neon: return detail::neon_kernels();
  }
  return nullptr;
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::Scalar};
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (kernels_for(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("HETPATROL_SIMD"); env != nullptr && *env != '\0') {
    const std::string want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == isa_name(isa)) {
        if (const KernelTable* t = kernels_for(isa)) return *t;
        fmt::print(stderr, "HETPATROL_SIMD={} not supported here, using default\n", want);
      }
    }
  }
  const std::vector<Isa> isas = supported_isas();
  return *kernels_for(isas.back());
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace hetpatrol::simd
