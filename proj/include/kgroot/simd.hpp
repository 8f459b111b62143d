#pragma once

// Dense double-precision kernels used by the embedding, SVM and RGCN inner
// loops. Every kernel has a scalar reference implementation; vectorized
// variants are compiled separately and picked at runtime from the CPU
// features, so one binary runs on any x86-64 host.

#include <cstddef>
#include <span>
#include <string_view>

namespace kgroot::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// True when the variant was compiled in and the running CPU supports it.
bool isa_supported(Isa isa);

// Variant used by the dispatched entry points below. Defaults to the best
// supported one; the KGROOT_SIMD environment variable ("scalar" or "avx2")
// overrides the choice at first use.
Isa active_isa();

// Throws InvalidArgument when the variant is not supported on this host.
void set_active_isa(Isa isa);

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = max(y, x) elementwise
    void (*max_into)(const double* x, double* y, std::size_t n);
    // y *= alpha
    void (*scale)(double alpha, double* y, std::size_t n);
};

const KernelTable& kernels(Isa isa);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void max_into(const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace scalar

#if defined(KGROOT_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void max_into(const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace avx2
#endif

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void max_into(std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> y);

}  // namespace kgroot::simd
