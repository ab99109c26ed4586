#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "polyode/closed.hpp"
#include "support/fixtures.hpp"

using namespace polyode;
using fixtures::make;

TEST_CASE("end map closed forms") {
    auto decay = make({"0", "1"}, 0.0, 1.0);  // y' = -y
    for (double g : {-2.0, 0.0, 1.5}) {
        auto v = end_map(decay, g, 1e-11);
        REQUIRE(v.has_value());
        CHECK_THAT(*v, Catch::Matchers::WithinAbs(g * std::exp(-1.0), 1e-9));
    }

    auto relax = fixtures::linear_relax(1.0);  // y' = 1 - y
    for (double g : {-1.0, 0.5, 3.0}) {
        auto v = end_map(relax, g, 1e-11);
        REQUIRE(v.has_value());
        CHECK_THAT(*v, Catch::Matchers::WithinAbs(1.0 + (g - 1.0) * std::exp(-1.0), 1e-9));
    }

    auto escape = make({"0", "0", "-1"}, 0.0, 2.0);  // y' = y^2
    CHECK_FALSE(end_map(escape, 1.0, 1e-9).has_value());
}

TEST_CASE("find_closed on the affine relaxation") {
    auto ode = fixtures::linear_relax(1.0);
    auto r = find_closed(ode, {-3.0, 4.0}, 1e-12);
    CHECK_THAT(r.gamma_star, Catch::Matchers::WithinAbs(1.0, 1e-10));
    CHECK(r.residual <= 1e-12);
    CHECK(r.trajectory.reached_end());
    REQUIRE(r.isolation_exp.has_value());
    CHECK_THAT(*r.isolation_exp, Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK(r.isolated);  // degree-1 tail is trivially nonnegative, a_1 mass positive
}

TEST_CASE("degenerate bracket returns the left endpoint") {
    auto ode = make({"0", "0"}, 0.0, 1.0);
    auto r = find_closed(ode, {0.0, 1.0}, 1e-10);
    CHECK(r.gamma_star == 0.0);
    CHECK(r.note == "continuum suspected");
    REQUIRE(r.isolation_exp.has_value());
    CHECK_THAT(*r.isolation_exp, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_FALSE(r.isolated);
}

TEST_CASE("invalid brackets are rejected") {
    auto ode = fixtures::linear_relax(1.0);
    // both offsets strictly positive: no fixed point inside
    CHECK_THROWS_AS(find_closed(ode, {-5.0, -3.0}, 1e-10), BracketInvalid);
    auto escape = make({"0", "0", "-1"}, 0.0, 2.0);
    CHECK_THROWS_AS(find_closed(escape, {0.5, 2.0}, 1e-10), BracketInvalid);
}

TEST_CASE("scan finds the unique fixed point of the affine relaxation") {
    auto ode = fixtures::linear_relax(1.0);
    auto out = scan_closed(ode, {-5.0, 5.0}, 64, 1e-10);
    REQUIRE(out.results.size() == 1);
    CHECK_THAT(out.results[0].gamma_star, Catch::Matchers::WithinAbs(1.0, 1e-8));
    CHECK_FALSE(out.continuum_suspected);
}

TEST_CASE("scan reports the degenerate continuum") {
    auto ode = make({"0", "0"}, 0.0, 1.0);
    auto out = scan_closed(ode, {-1.0, 1.0}, 16, 1e-10);
    CHECK(out.continuum_suspected);
    REQUIRE(out.results.size() == 1);
    CHECK(out.results[0].gamma_star == -1.0);
}

TEST_CASE("scan partitions around escaping probes") {
    // y' = y^2 escapes for gamma above the reciprocal of the horizon
    auto ode = make({"0", "0", "-1"}, 0.0, 2.0);
    auto out = scan_closed(ode, {0.0, 2.0}, 32, 1e-10);
    CHECK_FALSE(out.escaped_probes.empty());
    // gamma* = 0 is the only fixed point that reaches the horizon; it sits on
    // the probe grid (the parabolic tangency has no sign change to bracket)
    REQUIRE(out.results.size() == 1);
    CHECK_THAT(out.results[0].gamma_star, Catch::Matchers::WithinAbs(0.0, 1e-8));

    // off-grid tangency: an empty result list is the documented outcome
    auto off = scan_closed(ode, {-1.0, 2.0}, 32, 1e-10);
    CHECK(off.results.empty());
    CHECK_FALSE(off.escaped_probes.empty());
}

TEST_CASE("zero orbit of a quadratic equation has zero exponent") {
    auto ode = make({"0", "0", "1"}, 0.0, 1.0);
    auto traj = integrate(ode, 0.0, 0.0, 1.0, 1e-11);
    auto e = isolation_exponent(ode, traj);
    REQUIRE_FALSE(e.overflowed);
    CHECK_THAT(e.value, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("exponent matches the finite-difference end-map slope") {
    auto ode = make({"-0.3", "0.8", "0.2", "0.1"}, 0.0, 1.5);
    auto r = find_closed(ode, {-1.0, 2.0}, 1e-11);
    REQUIRE(r.isolation_exp.has_value());
    const double h = 1e-5;
    auto up = end_map(ode, r.gamma_star + h, 1e-12);
    auto dn = end_map(ode, r.gamma_star - h, 1e-12);
    REQUIRE(up.has_value());
    REQUIRE(dn.has_value());
    const double slope = (*up - *dn) / (2.0 * h);
    CHECK_THAT(std::exp(-*r.isolation_exp), Catch::Matchers::WithinRel(slope, 1e-4));
}

TEST_CASE("reflected search maps the fixed point back") {
    auto ode = fixtures::linear_relax(1.0);
    auto r = find_closed_reflected(ode, {-2.0, 0.0}, 1e-10);
    CHECK_THAT(r.gamma_star, Catch::Matchers::WithinAbs(1.0, 1e-8));
    CHECK(r.trajectory.reached_end());
    for (double t : {0.0, 0.5, 1.0})
        CHECK_THAT(r.trajectory(t), Catch::Matchers::WithinAbs(1.0, 1e-8));
    REQUIRE(r.isolation_exp.has_value());
    CHECK_THAT(*r.isolation_exp, Catch::Matchers::WithinAbs(1.0, 1e-7));
}

TEST_CASE("cubic fixture has a closed solution inside the unit bracket") {
    auto ode = fixtures::ex53();
    auto out = scan_closed(ode, {-1.0, 1.0}, 32, 1e-10);
    REQUIRE_FALSE(out.results.empty());
    for (const auto& r : out.results) {
        CHECK(r.residual <= 1e-8);
        CHECK(r.gamma_star >= -1.0);
        CHECK(r.gamma_star <= 1.0);
    }
}

TEST_CASE("end-map monotonicity on random smooth instances (small sample)") {
    std::mt19937_64 rng(515);
    std::uniform_real_distribution<double> cv(-0.5, 0.5);
    int done = 0;
    while (done < 10) {
        std::vector<Expr> c;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k <= n; ++k)
            c.push_back(Expr::binary(
                BinaryOp::Add, Expr::constant(cv(rng)),
                Expr::binary(BinaryOp::Mul, Expr::constant(cv(rng)),
                             Expr::unary(UnaryOp::Cos,
                                         Expr::binary(BinaryOp::Mul, Expr::constant(1.7),
                                                      Expr::variable())))));
        PolyODE ode(n, std::move(c), 0.0, 1.0);
        std::vector<double> gs;
        for (int i = 0; i < 8; ++i) gs.push_back(-1.0 + 2.0 * i / 7);
        std::vector<double> ends;
        bool all = true;
        for (double gmm : gs) {
            auto v = end_map(ode, gmm, 1e-11);
            if (!v) { all = false; break; }
            ends.push_back(*v);
        }
        if (!all) continue;
        for (std::size_t i = 1; i < ends.size(); ++i) REQUIRE(ends[i] > ends[i - 1]);
        ++done;
    }
}
