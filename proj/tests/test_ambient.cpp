#include "doctest.h"

#include <cmath>
#include <random>

#include "lmcf/ambient.hpp"
#include "lmcf/linalg.hpp"

using namespace lmcf::ambient;

namespace {

constexpr double kPi = 3.14159265358979323846;

AmbientVector random_vector(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    return {dist(rng), dist(rng), dist(rng), dist(rng)};
}

}  // namespace

TEST_CASE("J is the standard complex structure") {
    auto close = [](const AmbientVector& a, const AmbientVector& b) {
        return norm(a - b) < 1e-16;
    };
    CHECK(close(apply_J({1, 0, 0, 0}), {0, 1, 0, 0}));
    CHECK(close(apply_J({0, 1, 0, 0}), {-1, 0, 0, 0}));
    CHECK(close(apply_J({0, 0, 1, 0}), {0, 0, 0, 1}));

    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        const auto v = random_vector(rng);
        const auto jj = apply_J(apply_J(v));
        CHECK(norm(jj + v) < 1e-15);
    }
}

TEST_CASE("symplectic form on coordinate frames") {
    CHECK(symplectic_form({{1, 0, 0, 0}, {0, 1, 0, 0}}) == doctest::Approx(1.0));
    CHECK(symplectic_form({{1, 0, 0, 0}, {0, 0, 1, 0}}) == doctest::Approx(0.0));
    for (double alpha : {0.0, 0.3, 0.7, 1.2, kPi / 2}) {
        const AmbientVector b{0, 0, std::cos(alpha), std::sin(alpha)};
        CHECK(std::abs(symplectic_form({{1, 0, 0, 0}, b})) < 1e-16);
    }
}

TEST_CASE("holomorphic volume form on coordinate frames") {
    auto val = holomorphic_volume({{1, 0, 0, 0}, {0, 0, 1, 0}});
    CHECK(std::abs(val - std::complex<double>{1, 0}) < 1e-16);

    for (double alpha : {0.1, 0.7, 2.0}) {
        const AmbientVector b{0, 0, std::cos(alpha), std::sin(alpha)};
        const auto omega = holomorphic_volume({{1, 0, 0, 0}, b});
        CHECK(std::abs(omega - std::polar(1.0, alpha)) < 1e-15);
    }

    // orientation reversal negates the 2-form
    auto reversed = holomorphic_volume({{0, 0, 1, 0}, {1, 0, 0, 0}});
    CHECK(std::abs(reversed - std::complex<double>{-1, 0}) < 1e-16);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_vector(rng), b = random_vector(rng);
        CHECK(std::abs(holomorphic_volume({a, b}) + holomorphic_volume({b, a})) < 1e-14);
    }
}

TEST_CASE("liouville form") {
    CHECK(liouville_form({0, 0, 0, 0}, {1, 1, 1, 1}) == 0.0);
    CHECK(liouville_form({1, 0, 0, 0}, {0, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(liouville_form({0, 1, 0, 0}, {1, 0, 0, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("omega antisymmetry and J-invariance over random frames") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 10000; ++i) {
        const auto a = random_vector(rng), b = random_vector(rng);
        CHECK(std::abs(symplectic_form({a, b}) + symplectic_form({b, a})) < 1e-12);
        CHECK(std::abs(symplectic_form({apply_J(a), apply_J(b)}) -
                       symplectic_form({a, b})) < 1e-12);
    }
}

TEST_CASE("|Omega| calibrates Lagrangian frames") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10000; ++i) {
        auto a = random_vector(rng);
        if (norm(a) < 0.1) continue;
        auto b0 = random_vector(rng);
        // remove the omega(a, .) component: omega(a, Ja) = |a|^2
        const auto b = b0 - (symplectic_form({a, b0}) / norm_sq(a)) * apply_J(a);
        REQUIRE(std::abs(symplectic_form({a, b})) < 1e-12);
        CHECK(std::abs(std::abs(holomorphic_volume({a, b})) - frame_area({a, b})) < 1e-10);
    }
}

TEST_CASE("lambda is the contraction of omega with the position") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 10000; ++i) {
        const auto base = random_vector(rng), v = random_vector(rng);
        CHECK(std::abs(liouville_form(base, v) - symplectic_form({base, v})) < 1e-12);
    }
}

TEST_CASE("principal angles between planes") {
    const TwoFrame xy{{1, 0, 0, 0}, {0, 1, 0, 0}};
    CHECK(lmcf::linalg::max_principal_angle(xy, xy) < 1e-7);
    const TwoFrame rot{{0, 1, 0, 0}, {-1, 0, 0, 0}};  // same plane, rotated basis
    CHECK(lmcf::linalg::max_principal_angle(xy, rot) < 1e-7);
    const TwoFrame zw{{0, 0, 1, 0}, {0, 0, 0, 1}};
    CHECK(lmcf::linalg::max_principal_angle(xy, zw) == doctest::Approx(kPi / 2));
}
