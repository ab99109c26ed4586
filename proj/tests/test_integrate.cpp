#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "polyode/integrate.hpp"

using namespace polyode;

namespace {

PolyODE make_ode(std::vector<const char*> coeffs, double t0 = 0.0, double T = 1.0) {
    std::vector<Expr> c;
    for (auto* s : coeffs) c.push_back(Expr::parse(s));
    return PolyODE(static_cast<int>(coeffs.size()) - 1, std::move(c), t0, T);
}

}  // namespace

TEST_CASE("tanh flow: y' = 1 - y^2") {
    auto ode = make_ode({"-1", "0", "1"}, 0.0, 1.0);
    auto traj = integrate(ode, 0.0, 0.0, 1.0, 1e-10);
    REQUIRE(traj.reached_end());
    CHECK_THAT(traj(1.0), Catch::Matchers::WithinAbs(std::tanh(1.0), 1e-8));
    // dense output matches the analytic flow between nodes too
    for (double t : {0.13, 0.5, 0.77})
        CHECK_THAT(traj(t), Catch::Matchers::WithinAbs(std::tanh(t), 1e-7));
}

TEST_CASE("blow-up detection: y' = y^2") {
    auto ode = make_ode({"0", "0", "-1"}, 0.0, 2.0);
    auto traj = integrate(ode, 0.0, 1.0, 2.0, 1e-9);
    REQUIRE(traj.status == Trajectory::Status::BlowUp);
    CHECK_THAT(traj.t_escape, Catch::Matchers::WithinAbs(1.0, 1e-3));
    CHECK(std::fabs(traj.last_y()) > kEscapeThreshold);
}

TEST_CASE("zero field is constant") {
    auto ode = make_ode({"0", "0"}, 0.0, 5.0);
    auto traj = integrate(ode, 0.0, 3.25, 5.0, 1e-10);
    REQUIRE(traj.reached_end());
    for (double t : {0.0, 1.7, 5.0}) CHECK(traj(t) == 3.25);
}

TEST_CASE("linear decay meets tol budget over a long interval") {
    auto ode = make_ode({"0", "1"}, 0.0, 10.0);  // y' = -y
    const double tol = 1e-9;
    for (double g : {1.0, -2.5, 7.0}) {
        auto traj = integrate(ode, 0.0, g, 10.0, tol);
        REQUIRE(traj.reached_end());
        for (double t : {1.0, 5.0, 10.0})
            REQUIRE(std::fabs(traj(t) - g * std::exp(-t)) <= tol * 10 * std::max(1.0, std::fabs(g)));
    }
}

TEST_CASE("samples strictly increasing from the requested start") {
    auto ode = make_ode({"-1", "2", "0.3"}, 0.0, 2.0);
    auto traj = integrate(ode, 0.25, 0.4, 2.0, 1e-8);
    auto s = traj.samples();
    REQUIRE(s.front().first == 0.25);
    for (std::size_t i = 1; i < s.size(); ++i) REQUIRE(s[i].first > s[i - 1].first);
    REQUIRE(s.back().first == 2.0);
}

TEST_CASE("domain error mid-integration is reported, not thrown") {
    // coefficient leaves its domain at t = 1/2
    auto ode = make_ode({"ln(1-2*t)", "0"}, 0.0, 1.0);
    auto traj = integrate(ode, 0.0, 0.0, 1.0, 1e-8);
    CHECK(traj.status == Trajectory::Status::DomainError);
    CHECK(traj.t_escape <= 0.5 + 1e-6);
}

TEST_CASE("flow monotonicity in the initial value") {
    auto ode = make_ode({"sin(3*t)", "0.4", "0", "0.2"}, 0.0, 2.0);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> g(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        double g1 = g(rng), g2 = g(rng);
        if (g1 == g2) continue;
        if (g1 > g2) std::swap(g1, g2);
        auto t1 = integrate(ode, 0.0, g1, 2.0, 1e-11);
        auto t2 = integrate(ode, 0.0, g2, 2.0, 1e-11);
        if (!t1.reached_end() || !t2.reached_end()) continue;
        for (int i = 0; i <= 40; ++i) {
            const double t = 2.0 * i / 40;
            REQUIRE(t1(t) < t2(t));
        }
    }
}
