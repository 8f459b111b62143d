#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kgroot/error.hpp"
#include "kgroot/simd.hpp"

using namespace kgroot;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

}  // namespace

TEST_CASE("scalar kernels against naive loops") {
    std::mt19937_64 rng(3);
    const auto& k = simd::kernels(simd::Isa::Scalar);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u}) {
        auto a = random_vec(rng, n), b = random_vec(rng, n);
        CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(naive_dot(a, b)).epsilon(1e-12));

        auto y = b;
        k.axpy(0.5, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.5 * a[i]);

        y = b;
        k.max_into(a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == std::max(a[i], b[i]));

        y = b;
        k.scale(-2.0, y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == -2.0 * b[i]);
    }
}

TEST_CASE("avx2 kernels match the scalar reference") {
    if (!simd::isa_supported(simd::Isa::Avx2)) {
        MESSAGE("avx2 not available on this host");
        return;
    }
    std::mt19937_64 rng(5);
    const auto& s = simd::kernels(simd::Isa::Scalar);
    const auto& v = simd::kernels(simd::Isa::Avx2);
    for (std::size_t n = 0; n < 70; ++n) {
        auto a = random_vec(rng, n), b = random_vec(rng, n);
        // Reassociated sums differ by rounding only.
        CHECK(v.dot(a.data(), b.data(), n) == doctest::Approx(s.dot(a.data(), b.data(), n)).epsilon(1e-12));

        auto ys = b, yv = b;
        s.axpy(1.25, a.data(), ys.data(), n);
        v.axpy(1.25, a.data(), yv.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(yv[i] == doctest::Approx(ys[i]).epsilon(1e-15));

        ys = b, yv = b;
        s.max_into(a.data(), ys.data(), n);
        v.max_into(a.data(), yv.data(), n);
        CHECK(ys == yv);

        ys = b, yv = b;
        s.scale(0.3, ys.data(), n);
        v.scale(0.3, yv.data(), n);
        CHECK(ys == yv);
    }
}

TEST_CASE("isa selection") {
    const auto before = simd::active_isa();
    simd::set_active_isa(simd::Isa::Scalar);
    CHECK(simd::active_isa() == simd::Isa::Scalar);
    CHECK(simd::isa_name(simd::Isa::Scalar) == "scalar");
    if (!simd::isa_supported(simd::Isa::Avx2)) CHECK_THROWS_AS(simd::set_active_isa(simd::Isa::Avx2), InvalidArgument);
    simd::set_active_isa(before);
}

TEST_CASE("span entry points check lengths") {
    std::vector<double> a{1, 2, 3}, b{1, 2};
    CHECK_THROWS_AS(simd::dot(a, b), DimensionMismatch);
    CHECK(simd::dot(a, a) == 14.0);
}
