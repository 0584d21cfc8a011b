#include "hetpatrol/simd/kernels.hpp"
#include "hetpatrol/simd/platform.hpp"

#if HETPATROL_HAVE_NEON_KERNELS

#include <arm_neon.h>

namespace hetpatrol::simd {
namespace {

void distance_field(const double* xs, const double* ys, std::size_t n, double sx, double sy,
                    double min_distance, double* out) {
  const float64x2_t vsx = vdupq_n_f64(sx);
  const float64x2_t vsy = vdupq_n_f64(sy);
  const float64x2_t vmin = vdupq_n_f64(min_distance);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vsx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vsy);
    const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    vst1q_f64(out + i, vmaxq_f64(vsqrtq_f64(d2), vmin));
  }
  if (i < n) detail::kScalarKernels.distance_field(xs + i, ys + i, n - i, sx, sy, min_distance, out + i);
}

void within_range(const double* xs, const double* ys, std::size_t n, double qx, double qy,
                  double range_sq, std::uint8_t* out) {
  const float64x2_t vqx = vdupq_n_f64(qx);
  const float64x2_t vqy = vdupq_n_f64(qy);
  const float64x2_t vr = vdupq_n_f64(range_sq);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vqx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vqy);
    const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    const uint64x2_t le = vcleq_f64(d2, vr);
    out[i + 0] = vgetq_lane_u64(le, 0) ? 1 : 0;
    out[i + 1] = vgetq_lane_u64(le, 1) ? 1 : 0;
  }
  if (i < n) detail::kScalarKernels.within_range(xs + i, ys + i, n - i, qx, qy, range_sq, out + i);
}

void dominated(const double* xs, const double* ys, std::size_t n, std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t xi = vdupq_n_f64(xs[i]);
    const float64x2_t yi = vdupq_n_f64(ys[i]);
    bool hit = false;
    std::size_t j = 0;
    for (; j + 2 <= n && !hit; j += 2) {
      const float64x2_t xj = vld1q_f64(xs + j);
      const float64x2_t yj = vld1q_f64(ys + j);
      const uint64x2_t weak = vandq_u64(vcleq_f64(xj, xi), vcleq_f64(yj, yi));
      const uint64x2_t strict = vorrq_u64(vcltq_f64(xj, xi), vcltq_f64(yj, yi));
      const uint64x2_t m = vandq_u64(weak, strict);
      hit = (vgetq_lane_u64(m, 0) | vgetq_lane_u64(m, 1)) != 0;
    }
    for (; j < n && !hit; ++j) {
      if (xs[j] <= xs[i] && ys[j] <= ys[i] && (xs[j] < xs[i] || ys[j] < ys[i])) hit = true;
    }
    out[i] = hit ? 1 : 0;
  }
}

void min_max(const double* v, std::size_t n, double* lo, double* hi) {
  if (n < 2) {
    detail::kScalarKernels.min_max(v, n, lo, hi);
    return;
  }
  float64x2_t vlo = vld1q_f64(v);
  float64x2_t vhi = vlo;
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(v + i);
    vlo = vminq_f64(vlo, x);
    vhi = vmaxq_f64(vhi, x);
  }
  double a = vgetq_lane_f64(vlo, 0);
  double b = vgetq_lane_f64(vhi, 0);
  a = vgetq_lane_f64(vlo, 1) < a ? vgetq_lane_f64(vlo, 1) : a;
  b = vgetq_lane_f64(vhi, 1) > b ? vgetq_lane_f64(vhi, 1) : b;
  for (; i < n; ++i) {
    a = v[i] < a ? v[i] : a;
    b = v[i] > b ? v[i] : b;
  }
  *lo = a + 0.0;
  *hi = b + 0.0;
}

void rescale(const double* v, std::size_t n, double lo, double span, double* out) {
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vspan = vdupq_n_f64(span);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vdivq_f64(vsubq_f64(vld1q_f64(v + i), vlo), vspan));
  }
  if (i < n) detail::kScalarKernels.rescale(v + i, n - i, lo, span, out + i);
}

const KernelTable kNeonKernels{Isa::Neon, distance_field, within_range, dominated, min_max, rescale};

}  // namespace

namespace detail {
// NEON is architectural on AArch64.
const KernelTable* neon_kernels() { return &kNeonKernels; }
}  // namespace detail

}  // namespace hetpatrol::simd

#else

namespace hetpatrol::simd::detail {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace hetpatrol::simd::detail

#endif
