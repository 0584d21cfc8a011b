#pragma once

// Data-parallel inner loops used by the signal raster, the communication
// step and the Pareto analysis. Each kernel has a scalar reference and
// vector variants; every variant must produce bit-identical output to the
// scalar one (only exactly-rounded IEEE operations are used: +, -, *, /,
// sqrt, min/max and comparisons).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hetpatrol::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = max(sqrt((xs[i]-sx)^2 + (ys[i]-sy)^2), min_distance)
  void (*distance_field)(const double* xs, const double* ys, std::size_t n, double sx, double sy,
                         double min_distance, double* out);
  // out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2 <= range_sq
  void (*within_range)(const double* xs, const double* ys, std::size_t n, double qx, double qy,
                       double range_sq, std::uint8_t* out);
  // out[i] = 1 iff some j has xs[j] <= xs[i], ys[j] <= ys[i] with at least one strict.
  void (*dominated)(const double* xs, const double* ys, std::size_t n, std::uint8_t* out);
  // lo/hi of a non-empty array.
  void (*min_max)(const double* v, std::size_t n, double* lo, double* hi);
  // out[i] = (v[i] - lo) / span
  void (*rescale)(const double* v, std::size_t n, double lo, double span, double* out);
};

namespace detail {
extern const KernelTable kScalarKernels;
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();
}  // namespace detail

/// Kernel table for an ISA, or nullptr when this build or CPU cannot run it.
const KernelTable* kernels_for(Isa isa);

/// ISAs usable on this machine, scalar first.
std::vector<Isa> supported_isas();

/// The table selected at first use: the widest supported ISA, unless the
/// HETPATROL_SIMD environment variable names another (scalar|avx2|neon).
const KernelTable& active();

// Span front-ends over the active table.

inline void distance_field(std::span<const double> xs, std::span<const double> ys, double sx,
                           double sy, double min_distance, std::span<double> out) {
  active().distance_field(xs.data(), ys.data(), xs.size(), sx, sy, min_distance, out.data());
}

inline void within_range(std::span<const double> xs, std::span<const double> ys, double qx,
                         double qy, double range_sq, std::span<std::uint8_t> out) {
  active().within_range(xs.data(), ys.data(), xs.size(), qx, qy, range_sq, out.data());
}

inline void dominated(std::span<const double> xs, std::span<const double> ys,
                      std::span<std::uint8_t> out) {
  active().dominated(xs.data(), ys.data(), xs.size(), out.data());
}

inline void min_max(std::span<const double> v, double& lo, double& hi) {
  active().min_max(v.data(), v.size(), &lo, &hi);
}

inline void rescale(std::span<const double> v, double lo, double span, std::span<double> out) {
  active().rescale(v.data(), v.size(), lo, span, out.data());
}

}  // namespace hetpatrol::simd
