#pragma once

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__) || defined(_M_IX86)
#define HETPATROL_X86 1
#else
#define HETPATROL_X86 0
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define HETPATROL_ARM64 1
#else
#define HETPATROL_ARM64 0
#endif

#if HETPATROL_X86 && (defined(__GNUC__) || defined(__clang__))
#define HETPATROL_HAVE_AVX2_KERNELS 1
#define HETPATROL_TARGET_AVX2 __attribute__((target("avx2")))
#else
#define HETPATROL_HAVE_AVX2_KERNELS 0
#define HETPATROL_TARGET_AVX2
#endif

#if HETPATROL_ARM64
#define HETPATROL_HAVE_NEON_KERNELS 1
#else
#define HETPATROL_HAVE_NEON_KERNELS 0
#endif
