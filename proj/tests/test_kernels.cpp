#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "polyode/ode.hpp"

using namespace polyode;

namespace {

PolyODE make_ode(std::vector<const char*> coeffs, double t0 = 0.0, double T = 1.0) {
    std::vector<Expr> c;
    for (auto* s : coeffs) c.push_back(Expr::parse(s));
    return PolyODE(static_cast<int>(coeffs.size()) - 1, std::move(c), t0, T);
}

// direct summation oracle, no shared code with s_poly
double s_direct(int k, double u, double v) {
    double acc = 0.0;
    for (int j = 0; j <= k - 1; ++j) acc += std::pow(u, j) * std::pow(v, k - 1 - j);
    return acc;
}

}  // namespace

TEST_CASE("rhs via Horner") {
    // y' = -(a0 + a1 y + a2 y^2)
    auto ode = make_ode({"-1", "0", "1"});
    CHECK(ode.rhs(0.0, 0.0) == 1.0);

    auto sq = make_ode({"0", "0", "-1"});
    CHECK(sq.rhs(0.37, 2.0) == 4.0);

    auto ex51ish = make_ode({"-sin(10*t)", "1"});
    CHECK(ex51ish.rhs(0.0, 0.0) == 0.0);
}

TEST_CASE("PolyODE validation") {
    std::vector<Expr> c{Expr::constant(0.0)};
    CHECK_THROWS_AS(PolyODE(1, c, 0.0, 1.0), std::invalid_argument);   // wrong count
    c.push_back(Expr::constant(1.0));
    CHECK_THROWS_AS(PolyODE(1, c, 1.0, 1.0), std::invalid_argument);   // empty interval
    CHECK_THROWS_AS(PolyODE(0, {Expr::constant(1.0)}, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("s_poly basics") {
    CHECK(s_poly(1, 3.2, -7.7) == 1.0);
    CHECK(s_poly(1, 0.0, 0.0) == 1.0);
    CHECK(s_poly(3, 2.0, 1.0) == 7.0);
    const double val = s_poly(5, -1.3, 0.7);
    CHECK(val >= 0.0);
    CHECK_THAT(val, Catch::Matchers::WithinRel(s_direct(5, -1.3, 0.7), 1e-13));
    CHECK_THROWS_AS(s_poly(0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("factorization identity u^k - v^k = (u-v) S_k") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uv(-10.0, 10.0);
    std::uniform_int_distribution<int> kd(1, 12);
    for (int i = 0; i < 20000; ++i) {
        const int k = kd(rng);
        const double u = uv(rng), v = uv(rng);
        const double lhs = std::pow(u, k) - std::pow(v, k);
        const double rhs = (u - v) * s_poly(k, u, v);
        const double scale = std::pow(std::max({1.0, std::fabs(u), std::fabs(v)}), k);
        REQUIRE(std::fabs(lhs - rhs) <= 1e-9 * scale);
    }
}

TEST_CASE("odd S_k is nonnegative, even S_k nondecreasing in u") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> uv(-10.0, 10.0);
    for (int i = 0; i < 5000; ++i) {
        const double u = uv(rng), v = uv(rng);
        for (int k = 1; k <= 15; k += 2) REQUIRE(s_poly(k, u, v) >= -1e-12);
        double u1 = uv(rng), u2 = uv(rng);
        if (u1 > u2) std::swap(u1, u2);
        for (int k = 2; k <= 14; k += 2)
            REQUIRE(s_poly(k, u2, v) >= s_poly(k, u1, v) - 1e-9);
    }
}

TEST_CASE("d_kernel") {
    auto ode = make_ode({"0", "t", "2"});  // a1 = t, a2 = 2
    // n=2: a1 + a2 (u+v)
    CHECK_THAT(d_kernel(ode, 0.5, 1.5, -0.25),
               Catch::Matchers::WithinAbs(0.5 + 2.0 * 1.25, 1e-15));

    // diagonal: sum k a_k u^{k-1}
    auto ode3 = make_ode({"0", "1", "t", "0.5"});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uv(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double t = 0.3, u = uv(rng);
        const double diag = d_kernel(ode3, t, u, u);
        const double expect = 1.0 + 2.0 * t * u + 3.0 * 0.5 * u * u;
        REQUIRE(std::fabs(diag - expect) <= 1e-10 * std::max(1.0, std::fabs(expect)));
    }

    auto bracket = make_ode({"-1", "0", "1"});
    CHECK(d_kernel(bracket, 0.0, 1.0, -1.0) == 0.0);
}

TEST_CASE("d1_majorant") {
    // all coefficients nonnegative and u,v >= 0: equals d_kernel
    auto pos = make_ode({"0", "1", "2", "0.5"});
    for (double u : {0.0, 0.7, 2.0})
        for (double v : {0.0, 0.3, 1.9})
            CHECK_THAT(d1_majorant(pos, 0.2, u, v, MajorantMode::AllPositiveParts),
                       Catch::Matchers::WithinRel(d_kernel(pos, 0.2, u, v), 1e-14));

    // negative a2 is clipped: only a1 survives
    auto clip = make_ode({"0", "2", "-5", "0"});
    CHECK(d1_majorant(clip, 0.1, 3.0, 1.0, MajorantMode::AllPositiveParts) == 2.0);

    // even mode drops odd-degree terms
    auto mixed = make_ode({"0", "1", "1", "1", "1", "1"});
    const double even = d1_majorant(mixed, 0.0, 2.0, 1.0, MajorantMode::EvenPositiveParts);
    CHECK_THAT(even, Catch::Matchers::WithinAbs(
                          1.0 + s_poly(2, 2.0, 1.0) + s_poly(4, 2.0, 1.0), 1e-13));

    // majorization: d_kernel <= AllPositiveParts for u >= v >= 0
    auto sgn = make_ode({"0", "-1", "1", "-2", "0.5"});
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uv(0.0, 4.0);
    for (int i = 0; i < 500; ++i) {
        double v = uv(rng), u = v + uv(rng);
        REQUIRE(d_kernel(sgn, 0.0, u, v) <=
                d1_majorant(sgn, 0.0, u, v, MajorantMode::AllPositiveParts) + 1e-12);
    }
}

TEST_CASE("sign-flipped and reflected equations") {
    auto ode = make_ode({"t", "2", "-1", "0.5"});
    auto flip = ode.sign_flipped();
    // b_k = (-1)^{k+1} a_k
    CHECK(flip.a(0, 0.3) == -0.3);
    CHECK(flip.a(1, 0.3) == 2.0);
    CHECK(flip.a(2, 0.3) == 1.0);
    CHECK(flip.a(3, 0.3) == 0.5);

    auto refl = ode.reflected();
    CHECK(refl.t0 == -1.0);
    CHECK(refl.horizon == 0.0);
    // b_k(t) = (-1)^k a_k(-t)
    CHECK_THAT(refl.a(0, -0.3), Catch::Matchers::WithinAbs(0.3, 1e-15));
    CHECK(refl.a(1, -0.3) == -2.0);
    CHECK(refl.a(2, -0.3) == -1.0);
    CHECK(refl.a(3, -0.3) == -0.5);
}
