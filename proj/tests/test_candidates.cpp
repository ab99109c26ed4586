#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "polyode/candidates.hpp"
#include "support/generators.hpp"

using namespace polyode;
using testgen::ode_from_strings;

namespace {

PolyODE make_ode(std::vector<const char*> coeffs, double t0 = 0.0, double T = 1.0) {
    std::vector<Expr> c;
    for (auto* s : coeffs) c.push_back(Expr::parse(s));
    return PolyODE(static_cast<int>(coeffs.size()) - 1, std::move(c), t0, T);
}

CoefficientSplit split_from(std::vector<std::pair<const char*, const char*>> parts) {
    CoefficientSplit s;
    for (auto& [c, d] : parts) s.parts.emplace_back(Expr::parse(c), Expr::parse(d));
    return s;
}

PolyODE example51(double T = 1.0, const char* a1 = "1") {
    return make_ode({"-sin(10*t)", a1, "cos(t)^4", "-2*abs(sin(t)*cos(t)^3)",
                     "sin(t)^2*cos(t)^2", "-sin(t)^2*abs(cos(pi*t))", "sin(t)^2"},
                    0.0, T);
}

CoefficientSplit example51_split() {
    return split_from({{"0", "cos(t)^4"},
                       {"0", "-2*abs(sin(t)*cos(t)^3)"},
                       {"0", "sin(t)^2*cos(t)^2"},
                       {"-abs(cos(pi*t))", "0"}});
}

}  // namespace

TEST_CASE("constant-level candidate") {
    auto ode = make_ode({"-1", "0", "1"});
    auto cand = build_m_star(ode, 2, 1.0);
    CHECK_THAT(cand.m_value, Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK(cand.direction == Direction::Sub);
    auto m = verify_differential_inequality(cand, ode, 0.0, 1.0, 512);
    CHECK(m.value >= -1e-8);

    auto ode2 = make_ode({"-1", "0", "2"});
    CHECK_THAT(build_m_star(ode2, 2, 1.0).m_value, Catch::Matchers::WithinAbs(1.0, 1e-6));

    auto bad = make_ode({"-1", "0", "-1"});
    CHECK_THROWS_AS(build_m_star(bad, 2, 1.0), HypothesisViolation);

    auto degenerate = make_ode({"-1", "0", "t"});  // a_2 vanishes at t=0
    CHECK_THROWS_AS(build_m_star(degenerate, 2, 1.0), DegenerateDenominator);
}

TEST_CASE("glued envelope candidate") {
    SECTION("trivial instance collapses to the constant level") {
        auto ode = make_ode({"0", "0", "0", "1"});
        auto cand = build_eta_star(ode, 1.0, split_from({{"0", "0"}}));
        CHECK_THAT(cand.n_t, Catch::Matchers::WithinAbs(1.0, 1e-9));
        CHECK_THAT(cand.c_t, Catch::Matchers::WithinAbs(0.0, 1e-9));
        for (double t : {0.0, 0.5, 1.0})
            CHECK_THAT(cand(t), Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
    SECTION("negative forcing split is rejected") {
        auto ode = make_ode({"0", "0", "-1", "1"});
        try {
            build_eta_star(ode, 1.0, split_from({{"0", "-1"}}));
            FAIL("expected HypothesisViolation");
        } catch (const HypothesisViolation& hv) {
            CHECK(hv.condition == "(3)");
        }
    }
    SECTION("split consistency is validated, not inferred") {
        auto ode = make_ode({"0", "0", "1", "1"});
        CHECK_THROWS_AS(build_eta_star(ode, 1.0, split_from({{"0", "0"}})),
                        HypothesisViolation);
    }
    SECTION("the printed fixture split builds") {
        auto ode = example51();
        auto cand = build_eta_star(ode, 1.0, example51_split());
        CHECK_THAT(cand.n_t, Catch::Matchers::WithinAbs(1.0, 1e-6));
        // the envelope stays at or above its level on [t0, T]
        for (int i = 0; i <= 64; ++i)
            CHECK(cand(i / 64.0) >= cand.n_t - 1e-10);
        auto m = verify_differential_inequality(cand, ode, 0.0, 1.0, 1024);
        CHECK(m.value >= -1e-8);
    }
}

TEST_CASE("linear envelope candidate") {
    SECTION("pure drift gives eta_c(t) = t") {
        auto ode = make_ode({"-1", "0", "1"});
        auto cand = build_eta_c(ode, 0.0);
        for (double t : {0.0, 0.3, 1.0})
            CHECK_THAT(cand(t), Catch::Matchers::WithinAbs(t, 1e-9));
        CHECK(verify_differential_inequality(cand, ode, 0.0, 1.0, 512).value >= -1e-8);
    }
    SECTION("constant instance") {
        auto ode = make_ode({"0", "0", "1"});
        auto cand = build_eta_c(ode, 1.0);
        for (double t : {0.0, 0.5, 1.0})
            CHECK_THAT(cand(t), Catch::Matchers::WithinAbs(1.0, 1e-10));
    }
    SECTION("dominance condition is enforced") {
        auto ode = make_ode({"0", "0", "1", "1"});
        try {
            build_eta_c(ode, 2.0);
            FAIL("expected HypothesisViolation");
        } catch (const HypothesisViolation& hv) {
            CHECK(hv.condition == "(5)");
        }
    }
    SECTION("c below the admissible range is rejected") {
        auto ode = make_ode({"-1", "0", "1"});  // max W = 1 at t=1... W(t)=t
        CHECK_THROWS_AS(build_eta_c(ode, -0.5), HypothesisViolation);
    }
}

TEST_CASE("bounded linear candidate (theta)") {
    SECTION("decaying closed form") {
        auto ode = make_ode({"0", "1"});  // alpha = -1
        auto cand = build_theta(ode, 0.5, ThetaSign::Plus);
        for (double t : {0.0, 0.4, 1.0})
            CHECK_THAT(cand(t), Catch::Matchers::WithinAbs(0.5 * std::exp(-t), 1e-9));
        CHECK(verify_differential_inequality(cand, ode, 0.0, 1.0, 512).value >= -1e-8);
    }
    SECTION("zero level is admissible for both signs") {
        auto ode = make_ode({"0", "1"});
        CHECK(build_theta(ode, 0.0, ThetaSign::Plus)(0.5) == 0.0);
        CHECK(build_theta(ode, 0.0, ThetaSign::Minus)(0.5) == 0.0);
    }
    SECTION("level above one is rejected") {
        auto ode = make_ode({"0", "0"});  // alpha = 0
        CHECK_THROWS_AS(build_theta(ode, 2.0, ThetaSign::Plus), HypothesisViolation);
    }
    SECTION("minus sign builds the mirrored super candidate") {
        auto ode = make_ode({"-0.2", "1", "0.5"});
        auto cand = build_theta(ode, 0.3, ThetaSign::Minus);
        CHECK(cand.direction == Direction::Super);
        CHECK_THAT(cand(0.0), Catch::Matchers::WithinAbs(-0.3, 1e-10));
        CHECK(verify_differential_inequality(cand, ode, 0.0, 1.0, 512).value >= -1e-8);
    }
}

TEST_CASE("super envelope candidate (zeta*)") {
    SECTION("trivial odd instance is the mirror of eta*") {
        auto ode = make_ode({"0", "0", "0", "1"});
        auto zeta = build_zeta_star(ode, 1.0, split_from({{"0", "0"}}));
        auto eta = build_eta_star(ode, 1.0, split_from({{"0", "0"}}));
        CHECK(zeta.direction == Direction::Super);
        for (double t : {0.0, 0.5, 1.0}) {
            CHECK_THAT(zeta(t), Catch::Matchers::WithinAbs(-1.0, 1e-9));
            CHECK_THAT(eta(t), Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
        CHECK(zeta(0.0) <= eta(0.0));
        CHECK(verify_differential_inequality(zeta, ode, 0.0, 1.0, 512).value >= -1e-8);
    }
    SECTION("even degree is rejected") {
        auto ode = make_ode({"0", "0", "1"});
        try {
            build_zeta_star(ode, 1.0, CoefficientSplit{});
            FAIL("expected HypothesisViolation");
        } catch (const HypothesisViolation& hv) {
            CHECK(hv.condition == "(L)");
        }
    }
    SECTION("the fixture split fails the mirrored forcing condition") {
        // n = 6 is even, so reject before any split inspection; with the
        // parity guard bypassed the mirrored forcing sum is negative at
        // (t,u) = (pi/4, 1), which is what (K) samples.
        auto ode = example51();
        CHECK_THROWS_AS(build_zeta_star(ode, 1.0, example51_split()), HypothesisViolation);
        const double t = 3.14159265358979323846 / 4.0;
        auto split = example51_split();
        double acc = 0.0;
        for (int k = 2; k <= 5; ++k) {
            const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1}
            acc += sgn * split.parts[static_cast<std::size_t>(k - 2)].second(t);
        }
        CHECK(acc < 0.0);
    }
}

TEST_CASE("verify_differential_inequality margins") {
    auto ode = make_ode({"-1", "0", "1"});
    auto sub1 = user_candidate(Expr::parse("1"), Direction::Sub);
    CHECK_THAT(verify_differential_inequality(sub1, ode, 0.0, 1.0, 256).value,
               Catch::Matchers::WithinAbs(0.0, 1e-9));
    auto sup1 = user_candidate(Expr::parse("-1"), Direction::Super);
    CHECK_THAT(verify_differential_inequality(sup1, ode, 0.0, 1.0, 256).value,
               Catch::Matchers::WithinAbs(0.0, 1e-9));
    auto sub0 = user_candidate(Expr::parse("0"), Direction::Sub);
    CHECK_THAT(verify_differential_inequality(sub0, ode, 0.0, 1.0, 256).value,
               Catch::Matchers::WithinAbs(-1.0, 1e-9));
}

TEST_CASE("glue continuity at T") {
    auto ode = example51(2.0);
    auto eta = build_eta_star(ode, 1.0, example51_split());
    const double left = eta(1.0);
    const double right = eta(std::nextafter(1.0, 2.0));
    CHECK(std::fabs(left - right) <= 1e-10);

    auto mst = build_m_star(make_ode({"-sin(t)", "0", "0.5+0.25*cos(t)"}, 0.0, 2.0), 2, 1.0);
    CHECK(std::fabs(mst(1.0) - mst(std::nextafter(1.0, 2.0))) <= 1e-10);
    // nondecreasing tail
    CHECK(mst(1.7) >= mst(1.2) - 1e-12);
}

TEST_CASE("randomized builder soundness (small sample)") {
    std::mt19937_64 rng(2211);
    for (int i = 0; i < 4; ++i) {
        auto inst = testgen::constant_level_instance(rng);
        auto cand = build_m_star(inst.ode, inst.j, inst.ode.horizon);
        auto m = verify_differential_inequality(cand, inst.ode, inst.ode.t0, inst.ode.horizon);
        INFO("constant-level instance " << i << " margin " << m.value << " at " << m.witness_t);
        REQUIRE(m.value >= -1e-8);
    }
    for (int i = 0; i < 4; ++i) {
        auto inst = testgen::glued_envelope_instance(rng);
        auto cand = build_eta_star(inst.ode, inst.ode.horizon, inst.split);
        auto m = verify_differential_inequality(cand, inst.ode, inst.ode.t0, inst.ode.horizon);
        INFO("glued instance " << i << " margin " << m.value);
        REQUIRE(m.value >= -1e-8);
        // the envelope dominates its level everywhere
        for (int g = 0; g <= 128; ++g)
            REQUIRE(cand(g / 128.0) >= cand.n_t - 1e-10);
    }
    for (int i = 0; i < 4; ++i) {
        auto inst = testgen::linear_envelope_instance(rng);
        auto cand = build_eta_c(inst.ode, inst.c);
        auto m = verify_differential_inequality(cand, inst.ode, inst.ode.t0, inst.ode.horizon);
        REQUIRE(m.value >= -1e-8);
        for (int g = 0; g <= 128; ++g) REQUIRE(cand(g / 128.0) >= -1e-10);
    }
    for (int i = 0; i < 4; ++i) {
        auto inst = testgen::bounded_linear_instance(rng);
        auto cand = build_theta(inst.ode, inst.c, ThetaSign::Plus);
        auto m = verify_differential_inequality(cand, inst.ode, inst.ode.t0, inst.ode.horizon);
        REQUIRE(m.value >= -1e-8);
        for (int g = 0; g <= 128; ++g) REQUIRE(cand(g / 128.0) >= -1e-10);
    }
}
