#include "hetpatrol/simd/kernels.hpp"
#include "hetpatrol/simd/platform.hpp"

#if HETPATROL_HAVE_AVX2_KERNELS

#include <immintrin.h>

namespace hetpatrol::simd {
namespace {

HETPATROL_TARGET_AVX2
void distance_field(const double* xs, const double* ys, std::size_t n, double sx, double sy,
                    double min_distance, double* out) {
  const __m256d vsx = _mm256_set1_pd(sx);
  const __m256d vsy = _mm256_set1_pd(sy);
  const __m256d vmin = _mm256_set1_pd(min_distance);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vsx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vsy);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_sqrt_pd(d2), vmin));
  }
  if (i < n) detail::kScalarKernels.distance_field(xs + i, ys + i, n - i, sx, sy, min_distance, out + i);
}

HETPATROL_TARGET_AVX2
void within_range(const double* xs, const double* ys, std::size_t n, double qx, double qy,
                  double range_sq, std::uint8_t* out) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vr = _mm256_set1_pd(range_sq);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, vr, _CMP_LE_OQ));
    out[i + 0] = static_cast<std::uint8_t>(mask & 1);
    out[i + 1] = static_cast<std::uint8_t>((mask >> 1) & 1);
    out[i + 2] = static_cast<std::uint8_t>((mask >> 2) & 1);
    out[i + 3] = static_cast<std::uint8_t>((mask >> 3) & 1);
  }
  if (i < n) detail::kScalarKernels.within_range(xs + i, ys + i, n - i, qx, qy, range_sq, out + i);
}

HETPATROL_TARGET_AVX2
void dominated(const double* xs, const double* ys, std::size_t n, std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d xi = _mm256_set1_pd(xs[i]);
    const __m256d yi = _mm256_set1_pd(ys[i]);
    int hit = 0;
    std::size_t j = 0;
    for (; j + 4 <= n && !hit; j += 4) {
      const __m256d xj = _mm256_loadu_pd(xs + j);
      const __m256d yj = _mm256_loadu_pd(ys + j);
      const __m256d weak = _mm256_and_pd(_mm256_cmp_pd(xj, xi, _CMP_LE_OQ),
                                         _mm256_cmp_pd(yj, yi, _CMP_LE_OQ));
      const __m256d strict = _mm256_or_pd(_mm256_cmp_pd(xj, xi, _CMP_LT_OQ),
                                          _mm256_cmp_pd(yj, yi, _CMP_LT_OQ));
      hit = _mm256_movemask_pd(_mm256_and_pd(weak, strict));
    }
    for (; j < n && !hit; ++j) {
      if (xs[j] <= xs[i] && ys[j] <= ys[i] && (xs[j] < xs[i] || ys[j] < ys[i])) hit = 1;
    }
    out[i] = hit ? 1 : 0;
  }
}

HETPATROL_TARGET_AVX2
void min_max(const double* v, std::size_t n, double* lo, double* hi) {
  if (n < 4) {
    detail::kScalarKernels.min_max(v, n, lo, hi);
    return;
  }
  __m256d vlo = _mm256_loadu_pd(v);
  __m256d vhi = vlo;
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    vlo = _mm256_min_pd(vlo, x);
    vhi = _mm256_max_pd(vhi, x);
  }
  alignas(32) double l[4];
  alignas(32) double h[4];
  _mm256_store_pd(l, vlo);
  _mm256_store_pd(h, vhi);
  double a = l[0];
  double b = h[0];
  for (int k = 1; k < 4; ++k) {
    a = l[k] < a ? l[k] : a;
    b = h[k] > b ? h[k] : b;
  }
  for (; i < n; ++i) {
    a = v[i] < a ? v[i] : a;
    b = v[i] > b ? v[i] : b;
  }
  *lo = a + 0.0;
  *hi = b + 0.0;
}

HETPATROL_TARGET_AVX2
void rescale(const double* v, std::size_t n, double lo, double span, double* out) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vspan = _mm256_set1_pd(span);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), vlo), vspan));
  }
  if (i < n) detail::kScalarKernels.rescale(v + i, n - i, lo, span, out + i);
}

const KernelTable kAvx2Kernels{Isa::Avx2, distance_field, within_range, dominated, min_max, rescale};

}  // namespace

namespace detail {
const KernelTable* avx2_kernels() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") ? &kAvx2Kernels : nullptr;
}
}  // namespace detail

}  // namespace hetpatrol::simd

#else

namespace hetpatrol::simd::detail {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace hetpatrol::simd::detail

#endif
