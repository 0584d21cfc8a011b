#include <algorithm>
#include <cmath>

#include "hetpatrol/simd/kernels.hpp"

namespace hetpatrol::simd {
namespace {

void distance_field(const double* xs, const double* ys, std::size_t n, double sx, double sy,
                    double min_distance, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - sx;
    const double dy = ys[i] - sy;
    const double d = std::sqrt(dx * dx + dy * dy);
    out[i] = d < min_distance ? min_distance : d;
  }
}

void within_range(const double* xs, const double* ys, std::size_t n, double qx, double qy,
                  double range_sq, std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = (dx * dx + dy * dy) <= range_sq ? 1 : 0;
  }
}

void dominated(const double* xs, const double* ys, std::size_t n, std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t dom = 0;
    for (std::size_t j = 0; j < n && !dom; ++j) {
      if (xs[j] <= xs[i] && ys[j] <= ys[i] && (xs[j] < xs[i] || ys[j] < ys[i])) dom = 1;
    }
    out[i] = dom;
  }
}

void min_max(const double* v, std::size_t n, double* lo, double* hi) {
  double a = v[0];
  double b = v[0];
  for (std::size_t i = 1; i < n; ++i) {
    a = v[i] < a ? v[i] : a;
    b = v[i] > b ? v[i] : b;
  }
  // Canonical zero so -0.0 and +0.0 inputs give the same bits downstream.
  *lo = a + 0.0;
  *hi = b + 0.0;
}

void rescale(const double* v, std::size_t n, double lo, double span, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (v[i] - lo) / span;
}

}  // namespace

namespace detail {
const KernelTable kScalarKernels{Isa::Scalar, distance_field, within_range, dominated, min_max,
                                 rescale};
}  // namespace detail

}  // namespace hetpatrol::simd
