#include <atomic>
#include <cstdlib>
#include <string>

#include "kgroot/error.hpp"
#include "kgroot/simd.hpp"

namespace kgroot::simd {
namespace {

constexpr KernelTable kScalarTable{scalar::dot, scalar::axpy, scalar::max_into, scalar::scale};
#if defined(KGROOT_HAVE_AVX2)
constexpr KernelTable kAvx2Table{avx2::dot, avx2::axpy, avx2::max_into, avx2::scale};
#endif

bool cpu_has_avx2() {
#if defined(KGROOT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    if (const char* env = std::getenv("KGROOT_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2" && cpu_has_avx2()) return Isa::Avx2;
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*>& active_table() {
    static std::atomic<const KernelTable*> table{&kernels(initial_isa())};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2: return cpu_has_avx2();
    }
    return false;
}

const KernelTable& kernels(Isa isa) {
#if defined(KGROOT_HAVE_AVX2)
    if (isa == Isa::Avx2) return kAvx2Table;
#endif
    (void)isa;
    return kScalarTable;
}

Isa active_isa() {
    return active_table().load() == &kScalarTable ? Isa::Scalar : Isa::Avx2;
}

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw InvalidArgument("SIMD variant not supported on this host: " + std::string(isa_name(isa)));
    }
    active_table().store(&kernels(isa));
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    return active_table().load()->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
    active_table().load()->axpy(alpha, x.data(), y.data(), x.size());
}

void max_into(std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("max_into: length mismatch");
    active_table().load()->max_into(x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> y) {
    active_table().load()->scale(alpha, y.data(), y.size());
}

}  // namespace kgroot::simd
