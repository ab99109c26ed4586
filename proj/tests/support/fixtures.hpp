#pragma once

// Shared fixture instances: the printed example equations and one
// hand-designed instance per global-solvability criterion.

#include <string>
#include <vector>

#include "polyode/criteria.hpp"

namespace polyode::fixtures {

inline PolyODE make(std::vector<std::string> coeffs, double t0, double T) {
    std::vector<Expr> c;
    for (const auto& s : coeffs) c.push_back(Expr::parse(s));
    return PolyODE(static_cast<int>(coeffs.size()) - 1, std::move(c), t0, T);
}

inline CoefficientSplit split(std::vector<std::pair<std::string, std::string>> parts) {
    CoefficientSplit s;
    for (auto& [c, d] : parts) s.parts.emplace_back(Expr::parse(c), Expr::parse(d));
    return s;
}

// degree-6 oscillatory instance with one free linear coefficient
inline PolyODE ex51(double T = 1.0, const std::string& a1 = "1") {
    return make({"-sin(10*t)", a1, "cos(t)^4", "-2*abs(sin(t)*cos(t)^3)", "sin(t)^2*cos(t)^2",
                 "-sin(t)^2*abs(cos(pi*t))", "sin(t)^2"},
                0.0, T);
}
inline CoefficientSplit ex51_split() {
    return split({{"0", "cos(t)^4"},
                  {"0", "-2*abs(sin(t)*cos(t)^3)"},
                  {"0", "sin(t)^2*cos(t)^2"},
                  {"-abs(cos(pi*t))", "0"}});
}

// degree-7 instance with balanced forcing (zero a_0, unit a_1)
inline PolyODE ex52(double T = 1.0) {
    return make({"0", "1", "sin(t)^8*cos(t)^9", "10*sin(t)^4*cos(exp(t))+2",
                 "4*sin(t)^2*arctan(t)+sin(cos(t))", "7*sin(t)^2*cos(3*t)+2",
                 "sin(t)^2*cos(t)", "sin(t)^2"},
                0.0, T);
}
inline CoefficientSplit ex52_split() {
    return split({{"sin(t)^6*cos(t)^9", "0"},
                  {"10*sin(t)^2*cos(exp(t))", "2"},
                  {"4*arctan(t)", "sin(cos(t))"},
                  {"7*cos(3*t)", "2"},
                  {"cos(t)", "0"}});
}

// cubic instance with sinusoidal forcing on a full period
inline PolyODE ex53() {
    return make({"sin(t)", "1", "0", "1"}, 0.0, 2.0 * 3.14159265358979323846);
}

// y' = 1 - y^2: the two-sided bracket instance
inline PolyODE bracket_ode(double T = 10.0) { return make({"-1", "0", "1"}, 0.0, T); }

// y' = 1 - y: affine relaxation with fixed point 1
inline PolyODE linear_relax(double T = 1.0) { return make({"-1", "1"}, 0.0, T); }

struct TheoremFixture {
    std::string name;
    CriterionId id;
    PolyODE ode;
    TheoremParams params;
};

// One instance per global-solvability driver, each designed to come out
// Satisfied; the acceptance suite integrates from the reported bracket and
// checks the reported bounds.
inline std::vector<TheoremFixture> global_solvability_fixtures() {
    std::vector<TheoremFixture> out;
    {
        TheoremFixture f{"T4.1", CriterionId::T4_1, make({"-1", "0", "1"}, 0.0, 5.0), {}};
        f.params.j = 2;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.2", CriterionId::T4_2, make({"-1", "1", "0", "1"}, 0.0, 5.0), {}};
        f.params.split = split({{"0", "0"}});
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.3", CriterionId::T4_3, make({"-1", "0", "1"}, 0.0, 5.0), {}};
        f.params.gamma = 4.0;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.4", CriterionId::T4_4,
                         make({"-0.5", "1", "2", "-1", "1"}, 0.0, 5.0), {}};
        f.params.split = split({{"0", "2"}, {"-1", "0"}});
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.5", CriterionId::T4_5,
                         make({"-0.5", "0", "1", "0.5"}, 0.0, 1.0), {}};
        f.params.c = 0.5;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.6", CriterionId::T4_6, make({"-0.2", "1", "0.5"}, 0.0, 1.0), {}};
        f.params.c_plus = 0.3;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.7", CriterionId::T4_7, make({"0", "0", "0", "1"}, 0.0, 5.0), {}};
        f.params.split = split({{"0", "0"}});
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"T4.8", CriterionId::T4_8, make({"-0.2", "1", "0.5"}, 0.0, 1.0), {}};
        f.params.c_plus = 0.3;
        f.params.c_minus = 0.3;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"C4.1", CriterionId::C4_1, make({"0", "0", "1"}, 0.0, 5.0), {}};
        f.params.j = 2;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"C4.2", CriterionId::C4_2, make({"-0.1", "-1", "1"}, 0.0, 1.0), {}};
        f.params.c = 0.5;
        out.push_back(std::move(f));
    }
    {
        TheoremFixture f{"C4.3", CriterionId::C4_3, make({"-0.1", "1", "0.5"}, 0.0, 1.0), {}};
        f.params.c = 0.5;
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace polyode::fixtures
