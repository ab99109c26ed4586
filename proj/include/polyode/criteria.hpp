#pragma once

// Criterion checkers: each driver verifies the hypotheses of one comparison,
// global-solvability, or closed-solution criterion on concrete coefficient
// data and reports per-condition margins with witnesses. Margins are signed
// distances from violation; a condition passes when its margin stays above
// -tolerance. Strict inequalities are tightened by a strictness epsilon.
// "For all t" conditions are checked on the finite working interval and the
// verdict is labeled with that interval.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polyode/candidates.hpp"
#include "polyode/integrate.hpp"
#include "polyode/ode.hpp"
#include "polyode/quadrature.hpp"

namespace polyode {

// ---------------------------------------------------------------------------
// identifiers and report types

enum class CriterionId {
    T2_3,
    T3_1, C3_1, T3_2, C3_2,
    T4_1, T4_2, T4_3, T4_4, T4_5, T4_6, T4_7, T4_8,
    C4_1, C4_2, C4_3,
    T5_1, T5_2, T5_3, T5_4, T5_5, T5_6,
    C5_1,
};

inline std::string to_string(CriterionId id) {
    switch (id) {
        case CriterionId::T2_3: return "T2.3";
        case CriterionId::T3_1: return "T3.1";
        case CriterionId::C3_1: return "C3.1";
        case CriterionId::T3_2: return "T3.2";
        case CriterionId::C3_2: return "C3.2";
        case CriterionId::T4_1: return "T4.1";
        case CriterionId::T4_2: return "T4.2";
        case CriterionId::T4_3: return "T4.3";
        case CriterionId::T4_4: return "T4.4";
        case CriterionId::T4_5: return "T4.5";
        case CriterionId::T4_6: return "T4.6";
        case CriterionId::T4_7: return "T4.7";
        case CriterionId::T4_8: return "T4.8";
        case CriterionId::C4_1: return "C4.1";
        case CriterionId::C4_2: return "C4.2";
        case CriterionId::C4_3: return "C4.3";
        case CriterionId::T5_1: return "T5.1";
        case CriterionId::T5_2: return "T5.2";
        case CriterionId::T5_3: return "T5.3";
        case CriterionId::T5_4: return "T5.4";
        case CriterionId::T5_5: return "T5.5";
        case CriterionId::T5_6: return "T5.6";
        case CriterionId::C5_1: return "C5.1";
    }
    return "?";
}

inline std::optional<CriterionId> criterion_from_string(const std::string& s) {
    static const std::pair<const char*, CriterionId> table[] = {
        {"T2.3", CriterionId::T2_3}, {"T3.1", CriterionId::T3_1}, {"C3.1", CriterionId::C3_1},
        {"T3.2", CriterionId::T3_2}, {"C3.2", CriterionId::C3_2}, {"T4.1", CriterionId::T4_1},
        {"T4.2", CriterionId::T4_2}, {"T4.3", CriterionId::T4_3}, {"T4.4", CriterionId::T4_4},
        {"T4.5", CriterionId::T4_5}, {"T4.6", CriterionId::T4_6}, {"T4.7", CriterionId::T4_7},
        {"T4.8", CriterionId::T4_8}, {"C4.1", CriterionId::C4_1}, {"C4.2", CriterionId::C4_2},
        {"C4.3", CriterionId::C4_3}, {"T5.1", CriterionId::T5_1}, {"T5.2", CriterionId::T5_2},
        {"T5.3", CriterionId::T5_3}, {"T5.4", CriterionId::T5_4}, {"T5.5", CriterionId::T5_5},
        {"T5.6", CriterionId::T5_6}, {"C5.1", CriterionId::C5_1},
    };
    for (auto& [name, id] : table)
        if (s == name) return id;
    return std::nullopt;
}

enum class Verdict { Satisfied, Violated, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Satisfied: return "Satisfied";
        case Verdict::Violated: return "Violated";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct ConditionResult {
    std::string label;
    double margin = 0.0;
    std::optional<double> witness_t;
    std::optional<double> witness_u;
    std::string note;
    bool inconclusive = false;
    // strict conditions already carry the strictness epsilon inside the
    // margin and are judged against zero rather than -tolerance
    bool strict = false;
};

struct CheckOptions {
    int grid_points = 2048;
    int refine = 4;
    double tolerance = 1e-8;
    double strict_eps = 1e-9;
    double quad_tol = 1e-10;
};

struct CriterionReport {
    CriterionId id{};
    Verdict verdict = Verdict::Inconclusive;
    std::vector<ConditionResult> conditions;
    double t_lo = 0.0, t_hi = 0.0;
    CheckOptions opts;

    // conclusion payload (admissible initial bracket and bound envelopes)
    std::optional<std::pair<double, double>> bracket;
    std::function<double(double)> lower_bound, upper_bound;  // empty when n/a
    std::vector<std::string> notes;

    // parameters the driver actually used
    std::optional<double> gamma_used, nu_used, c_used, c_plus_used, c_minus_used, zeta0_used;
    std::optional<int> j_used;

    void finalize(const CheckOptions& o) {
        opts = o;
        bool violated = false, inconclusive = false;
        for (const auto& c : conditions) {
            if (c.inconclusive) inconclusive = true;
            else if (c.margin < (c.strict ? 0.0 : -o.tolerance)) violated = true;
        }
        verdict = violated ? Verdict::Violated
                           : (inconclusive ? Verdict::Inconclusive : Verdict::Satisfied);
    }
};

// ---------------------------------------------------------------------------
// parameters

struct CandidateChoice {
    std::string kind;          // m_star | eta_star | eta_c | theta_c | theta_c_minus |
                               // zeta_star | expr
    std::optional<Expr> expr;  // for kind == "expr"
};

struct TheoremParams {
    std::optional<int> j;
    std::optional<double> gamma, nu, c, c_plus, c_minus, zeta0;
    std::vector<double> partition;
    std::optional<CoefficientSplit> split;
    std::optional<Expr> zeta_expr;                 // reference lower function
    std::optional<Expr> y1_expr, y2_expr;          // explicit comparison functions
    std::optional<double> y1_init;                 // initial value for the b-equation
    std::optional<std::vector<Expr>> b_coeffs, e_coeffs;
    std::optional<CandidateChoice> eta_choice, zeta_choice;
    std::optional<double> glue_T;                  // glue point for piecewise builders
};

// ---------------------------------------------------------------------------
// reusable condition checkers

enum class IntegralSense { NonNegativeForAllT, NonPositiveForAllT };

struct IntegralCheck {
    double margin = 0.0;
    double witness_t = 0.0;
    bool overflowed = false;
};

// Evaluates G(t) = base(t) + int_lo^t exp{int_lo^tau kernel} weight dtau on a
// dense grid (one augmented pass), refined near the worst point, and returns
// the minimal margin for the requested sense.
inline IntegralCheck check_integral_condition(const ScalarFn& kernel, const ScalarFn& weight,
                                              const ScalarFn& base, double lo, double hi,
                                              IntegralSense sense,
                                              const CheckOptions& opts = {}) {
    WeightedPrefix wp(kernel, weight, lo, hi, opts.quad_tol);
    if (wp.overflowed()) return {0.0, wp.covered_to(), true};
    auto q = [&](double t) {
        const double g = base(t) + wp.value(t);
        return sense == IntegralSense::NonNegativeForAllT ? g : -g;
    };
    double worst = std::numeric_limits<double>::infinity();
    double arg = lo;
    const int n = opts.grid_points;
    for (int i = 0; i <= n; ++i) {
        const double t = lo + (hi - lo) * i / n;
        const double v = q(t);
        if (v < worst) { worst = v; arg = t; }
    }
    const double cell = (hi - lo) / n;
    const double rlo = std::max(lo, arg - cell), rhi = std::min(hi, arg + cell);
    const int rn = 8 * std::max(1, opts.refine);
    for (int i = 0; i <= rn; ++i) {
        const double t = rlo + (rhi - rlo) * i / rn;
        const double v = q(t);
        if (v < worst) { worst = v; arg = t; }
    }
    return {worst, arg, false};
}

inline IntegralCheck check_integral_condition(const ScalarFn& kernel, const ScalarFn& weight,
                                              double offset, double lo, double hi,
                                              IntegralSense sense,
                                              const CheckOptions& opts = {}) {
    return check_integral_condition(kernel, weight, [offset](double) { return offset; }, lo, hi,
                                    sense, opts);
}

// Nested-kernel segment condition: on each partition segment [t_l, t_{l+1}],
//   G(t) = int_{t_l}^t exp{ int_{t_l}^tau [a_1 - a_2 J] } a_0 dtau <= 0,
// where J(s) = int_{t_l}^s exp{-int_xi^s a_1} a_0 dxi solves J' = a_0 - a_1 J.
inline std::vector<ConditionResult> check_usable_sequence_condition(
    const PolyODE& ode, const std::vector<double>& partition, const CheckOptions& opts = {}) {
    if (partition.size() < 2 || partition.front() != ode.t0 ||
        partition.back() != ode.horizon)
        throw std::invalid_argument(
            "usable sequence must start at t0 and end at the horizon");
    for (std::size_t i = 1; i < partition.size(); ++i)
        if (!(partition[i] > partition[i - 1]))
            throw std::invalid_argument("usable sequence must be strictly increasing");

    std::vector<ConditionResult> out;
    for (std::size_t l = 0; l + 1 < partition.size(); ++l) {
        const double seg_lo = partition[l], seg_hi = partition[l + 1];
        DenseSolution<3> sol;  // [J, L, G]
        StepControl ctl;
        ctl.tol = opts.quad_tol;
        bool overflow = false;
        auto rhs = [&ode](double t, const std::array<double, 3>& y, std::array<double, 3>& dy) {
            const double a0 = ode.a(0, t), a1 = ode.a(1, t), a2 = ode.a(2, t);
            dy[0] = a0 - a1 * y[0];
            dy[1] = a1 - a2 * y[0];
            dy[2] = std::exp(std::min(y[1], kLogOverflowLimit)) * a0;
        };
        auto halt = [&overflow](const SolutionNode<3>& n, double) {
            if (n.y[1] > kLogOverflowLimit || !std::isfinite(n.y[2])) {
                overflow = true;
                return true;
            }
            return false;
        };
        rk45_integrate<3>(rhs, seg_lo, {0.0, 0.0, 0.0}, seg_hi, ctl, sol, halt);

        ConditionResult c;
        c.label = "(D)[" + std::to_string(l) + "]";
        if (overflow) {
            c.inconclusive = true;
            c.note = "quadrature overflow";
        } else {
            double worst = std::numeric_limits<double>::infinity(), arg = seg_lo;
            for (int i = 0; i <= opts.grid_points; ++i) {
                const double t = seg_lo + (seg_hi - seg_lo) * i / opts.grid_points;
                const double v = -sol(t)[2];
                if (v < worst) { worst = v; arg = t; }
            }
            c.margin = worst;
            c.witness_t = arg;
        }
        out.push_back(std::move(c));
    }
    return out;
}

// I_gamma(t): the weighted linear envelope gamma exp{-int a_1} +
// int exp{-int_tau^t a_1} |a_0|; solves I' = -a_1 I + |a_0|, I(t0) = gamma.
struct IGammaBound {
    double gamma = 0.0;
    std::function<double(double)> value_at;
};

inline IGammaBound build_i_gamma(const PolyODE& ode, double gamma, double tol = 1e-12) {
    auto sol = std::make_shared<DenseSolution<1>>();
    StepControl ctl;
    ctl.tol = tol;
    auto rhs = [&ode](double t, const std::array<double, 1>& y, std::array<double, 1>& dy) {
        dy[0] = -ode.a(1, t) * y[0] + std::fabs(ode.a(0, t));
    };
    rk45_integrate<1>(rhs, ode.t0, {gamma}, ode.horizon, ctl, *sol,
                      [](const SolutionNode<1>&, double) { return false; });
    return {gamma, [sol](double t) { return (*sol)(t)[0]; }};
}

// ---------------------------------------------------------------------------
// driver internals

namespace criteria_detail {

struct RefFunction {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;  // may be empty -> central differences
};

inline RefFunction ref_from_expr(const Expr& e, double lo, double hi) {
    RefFunction rf;
    rf.eval = [e](double t) { return e(t); };
    const double h = (hi - lo) * 1e-6;
    rf.deriv = [e, lo, hi, h](double t) {
        const double tl = std::max(lo, t - h), tr = std::min(hi, t + h);
        return (e(tr) - e(tl)) / (tr - tl);
    };
    return rf;
}

// zeta' + sum a_k zeta^k along a reference function
inline ScalarFn residual_along(const PolyODE& ode, const RefFunction& rf) {
    return [&ode, rf](double t) {
        const double y = rf.eval(t);
        double acc = 0.0;
        for (int k = ode.n; k >= 0; --k) acc = acc * y + ode.a(k, t);
        return rf.deriv(t) + acc;
    };
}

inline ConditionResult pointwise_min(const std::string& label, const ScalarFn& f, double lo,
                                     double hi, const CheckOptions& opts, bool strict = false,
                                     const std::string& note = "") {
    SupResult m = grid_min(f, lo, hi, opts.grid_points);
    // refine near the worst sample
    const double cell = (hi - lo) / opts.grid_points;
    SupResult r = grid_min(f, std::max(lo, m.arg - cell), std::min(hi, m.arg + cell),
                           8 * std::max(1, opts.refine));
    if (r.value < m.value) m = r;
    ConditionResult c;
    c.label = label;
    c.margin = strict ? m.value - opts.strict_eps : m.value;
    c.strict = strict;
    c.witness_t = m.arg;
    c.note = note;
    return c;
}

inline void append(std::vector<ConditionResult>& into, std::vector<ConditionResult> more) {
    for (auto& c : more) into.push_back(std::move(c));
}

// nu-scan for the existential "for some nu in [lo, hi]": returns the chosen
// nu. margin(nu) = nu - base0 - maxG is affine, so pick the smallest passing
// scan value to keep the reported bracket wide.
inline double choose_nu(double lo, double hi, double base0, double max_g, double tolerance) {
    if (hi <= lo) return lo;
    for (int i = 0; i <= 32; ++i) {
        const double nu = lo + (hi - lo) * i / 32;
        if (nu - base0 - max_g >= 0.0) return nu;
    }
    return lo - base0 - max_g >= -tolerance ? lo : hi;
}

// gamma-scan grid for "for some gamma >= 0": zero plus a log ladder.
inline std::vector<double> gamma_scan_grid(double scale) {
    std::vector<double> g{0.0};
    const double top = std::max(1.0, scale) * 10.0;
    const double bottom = top * 1e-4;
    for (int i = 0; i < 31; ++i)
        g.push_back(bottom * std::pow(top / bottom, i / 30.0));
    return g;
}

inline bool any_violated(const std::vector<ConditionResult>& cs, const CheckOptions& o) {
    return std::any_of(cs.begin(), cs.end(), [&](const ConditionResult& c) {
        return !c.inconclusive && c.margin < (c.strict ? 0.0 : -o.tolerance);
    });
}

inline ScalarFn coeff_fn(const PolyODE& ode, int k) {
    return [&ode, k](double t) { return ode.a(k, t); };
}

}  // namespace criteria_detail

// ---------------------------------------------------------------------------
// grouped hypothesis checkers (shared by several drivers)

// sign block of the constant-level construction: a_k >= 0 for k in [j,n] and
// sum_{k=j}^n a_k > 0
inline std::vector<ConditionResult> check_constant_level_conditions(const PolyODE& ode, int j,
                                                                    const CheckOptions& opts,
                                                                    bool flipped_signs = false) {
    namespace cd = criteria_detail;
    std::vector<ConditionResult> out;
    auto sgn = [flipped_signs](int k) {
        return flipped_signs ? (k % 2 == 0 ? 1.0 : -1.0) : 1.0;
    };
    {
        double worst = std::numeric_limits<double>::infinity(), arg = ode.t0;
        int worst_k = j;
        for (int k = j; k <= ode.n; ++k) {
            auto f = [&ode, k, &sgn](double t) { return sgn(k) * ode.a(k, t); };
            SupResult m = grid_min(f, ode.t0, ode.horizon, opts.grid_points);
            if (m.value < worst) { worst = m.value; arg = m.arg; worst_k = k; }
        }
        ConditionResult c;
        c.label = flipped_signs ? "(-1)^k a_k >= 0, k=j..n" : "a_k >= 0, k=j..n";
        c.margin = worst;
        c.witness_t = arg;
        c.note = "worst k = " + std::to_string(worst_k);
        out.push_back(std::move(c));
    }
    {
        auto f = [&ode, j, &sgn](double t) {
            double acc = 0.0;
            for (int k = j; k <= ode.n; ++k) acc += sgn(k) * ode.a(k, t);
            return acc;
        };
        out.push_back(cd::pointwise_min(
            flipped_signs ? "sum (-1)^k a_k > 0, k=j..n" : "sum a_k > 0, k=j..n", f, ode.t0,
            ode.horizon, opts, /*strict=*/true));
    }
    return out;
}

// hypotheses of the glued-envelope construction (leading sign, split
// consistency, forcing-sum nonnegativity on the u-ladder)
inline std::vector<ConditionResult> check_split_conditions(const PolyODE& ode,
                                                           const CoefficientSplit& split,
                                                           double T, const CheckOptions& opts,
                                                           const char* l1 = "(1)",
                                                           const char* l2 = "(2)",
                                                           const char* l3 = "(3)",
                                                           bool flipped = false) {
    namespace cd = criteria_detail;
    std::vector<ConditionResult> out;
    const int n = ode.n;
    out.push_back(cd::pointwise_min(l1, cd::coeff_fn(ode, n), ode.t0, ode.horizon, opts));
    {
        double worst = 0.0, arg = ode.t0;
        for (int k = 2; k <= n - 1; ++k) {
            const auto& [ck, dk] = split.parts[static_cast<std::size_t>(k - 2)];
            auto f = [&ode, &ck, &dk, k, n](double t) {
                return -std::fabs(ode.a(k, t) - (ode.a(n, t) * ck(t) + dk(t)));
            };
            SupResult m = grid_min(f, ode.t0, ode.horizon, opts.grid_points);
            if (m.value < worst) { worst = m.value; arg = m.arg; }
        }
        ConditionResult c;
        c.label = l2;
        c.margin = worst + 1e-9;  // consistency is checked to 1e-9
        c.witness_t = arg;
        out.push_back(std::move(c));
    }
    {
        auto abs_c_sum = [&split](double t) {
            double acc = 0.0;
            for (const auto& [ck, dk] : split.parts) acc += std::fabs(ck(t));
            return acc;
        };
        const double n_T = std::max(1.0, sup_on_interval(abs_c_sum, ode.t0, T).value);
        double worst = std::numeric_limits<double>::infinity();
        double arg_t = ode.t0, arg_u = n_T;
        for (int ig = 0; ig <= 512; ++ig) {
            const double t = ode.t0 + (ode.horizon - ode.t0) * ig / 512;
            double u = n_T;
            for (int iu = 0; iu <= 40; ++iu) {
                double acc = 0.0, scale = 1.0;
                for (int k = 2; k <= n - 1; ++k) {
                    const double flip = flipped ? (k % 2 == 0 ? -1.0 : 1.0) : 1.0;
                    const double term =
                        flip * split.parts[static_cast<std::size_t>(k - 2)].second(t) *
                        std::pow(u, k);
                    acc += term;
                    scale = std::max(scale, std::fabs(term));
                }
                const double v = acc / scale;
                if (v < worst) { worst = v; arg_t = t; arg_u = u; }
                u *= 1.25;
            }
        }
        ConditionResult c;
        c.label = l3;
        c.margin = worst == std::numeric_limits<double>::infinity() ? 0.0 : worst;
        c.witness_t = arg_t;
        c.witness_u = arg_u;
        c.note = "sampled on u-ladder from N_T = " + std::to_string(n_T);
        out.push_back(std::move(c));
    }
    return out;
}

// hypotheses of the linear-envelope construction: a_2 > 0, c admissible,
// and the higher-degree dominance bound
inline std::vector<ConditionResult> check_linear_envelope_conditions(
    const PolyODE& ode, double c, const CheckOptions& opts, const char* l4 = "(4)",
    const char* l5a = "(5a)", const char* l5b = "(5b)") {
    namespace cd = criteria_detail;
    std::vector<ConditionResult> out;
    if (ode.n < 2) {
        out.push_back({l4, -1.0, ode.t0, std::nullopt, "degree below 2", false});
        return out;
    }
    out.push_back(
        cd::pointwise_min(l4, cd::coeff_fn(ode, 2), ode.t0, ode.horizon, opts, true));
    const double cmin = eta_c_min_level(ode);
    {
        ConditionResult cc;
        cc.label = l5a;
        cc.margin = c - cmin;
        cc.note = "minimal admissible c = " + std::to_string(cmin);
        out.push_back(std::move(cc));
    }
    if (c >= cmin - opts.tolerance) {
        LinearWeights weights(ode);
        auto eta = [&weights, c](double t) {
            return std::exp(-weights.a1_integral(t)) * (c - weights.weighted_a0(t));
        };
        auto dom = [&ode, &eta](double t) {
            const double e = std::max(0.0, eta(t));
            double acc = 0.0, p = 1.0;
            for (int k = 3; k <= ode.n; ++k) {
                p *= e;
                acc += std::fabs(ode.a(k, t)) * p;
            }
            return ode.a(2, t) - acc;
        };
        out.push_back(cd::pointwise_min(l5b, dom, ode.t0, ode.horizon, opts));
    }
    return out;
}

// ---------------------------------------------------------------------------
// spec-named grouped entry points

std::vector<ConditionResult> check_pointwise_conditions(const PolyODE& ode, CriterionId id,
                                                        const TheoremParams& params,
                                                        const CheckOptions& opts = {});
std::vector<ConditionResult> check_boundary_conditions(const PolyODE& ode, CriterionId id,
                                                       const TheoremParams& params,
                                                       const CheckOptions& opts = {});
CriterionReport check_theorem(const PolyODE& ode, CriterionId id, const TheoremParams& params,
                              const CheckOptions& opts = {});

// ---------------------------------------------------------------------------
// implementation

namespace criteria_detail {

inline CandidateFunction realize_candidate(const PolyODE& ode, const CandidateChoice& choice,
                                           const TheoremParams& params, Direction dir) {
    const double T = params.glue_T.value_or(ode.horizon);
    if (choice.kind == "expr") {
        if (!choice.expr) throw std::invalid_argument("candidate kind 'expr' needs a formula");
        return user_candidate(*choice.expr, dir);
    }
    if (choice.kind == "m_star")
        return build_m_star(ode, params.j.value_or(2), T, params.gamma.value_or(0.0));
    if (choice.kind == "eta_star") {
        if (!params.split) throw std::invalid_argument("eta_star candidate needs a split");
        return build_eta_star(ode, T, *params.split);
    }
    if (choice.kind == "zeta_star") {
        if (!params.split) throw std::invalid_argument("zeta_star candidate needs a split");
        return build_zeta_star(ode, T, *params.split);
    }
    if (choice.kind == "eta_c")
        return params.c ? build_eta_c(ode, *params.c) : build_eta_c(ode);
    if (choice.kind == "theta_c")
        return params.c_plus ? build_theta(ode, *params.c_plus, ThetaSign::Plus)
                             : build_theta(ode, ThetaSign::Plus);
    if (choice.kind == "theta_c_minus")
        return params.c_minus ? build_theta(ode, *params.c_minus, ThetaSign::Minus)
                              : build_theta(ode, ThetaSign::Minus);
    throw std::invalid_argument("unknown candidate kind '" + choice.kind + "'");
}

// Build a theta candidate and record its unit-bound margin as a condition
// instead of throwing.
inline CandidateFunction build_theta_checked(const PolyODE& ode, double c, ThetaSign sign,
                                             std::vector<ConditionResult>& conditions,
                                             const char* label = nullptr) {
    CandidateFunction cand = build_theta_unchecked(ode, c, sign);
    SupResult s = sign == ThetaSign::Plus
                      ? sup_on_interval(cand.eval, ode.t0, ode.horizon, 4096, 0.0)
                      : sup_on_interval(
                            [&cand](double t) { return std::fabs(cand.eval(t)); }, ode.t0,
                            ode.horizon, 4096, 0.0);
    ConditionResult cc;
    cc.label = label ? label : (sign == ThetaSign::Plus ? "theta+ <= 1" : "|theta-| <= 1");
    cc.margin = 1.0 - s.value;
    cc.witness_t = s.arg;
    conditions.push_back(std::move(cc));
    return cand;
}

// Comparison-integral block shared by the section-4 drivers: for the chosen
// upper envelope `upper`, reference `zeta`, and weight zeta' + sum a_k zeta^k,
// checks  zeta(t0) - nu + int exp{int kernel} weight <= 0  for all t.
struct EnvelopeIntegral {
    ConditionResult condition;
    double nu = 0.0;
};

inline EnvelopeIntegral envelope_integral(const PolyODE& ode, const CandidateFunction& upper,
                                          const RefFunction& zeta, MajorantMode mode,
                                          std::optional<double> nu_param,
                                          const std::string& label, const CheckOptions& opts,
                                          std::optional<ScalarFn> weight_override = {}) {
    auto kernel = [&ode, &upper, &zeta, mode](double s) {
        return d1_majorant(ode, s, upper.eval(s), zeta.eval(s), mode);
    };
    ScalarFn weight = weight_override ? *weight_override : residual_along(ode, zeta);
    const double z0 = zeta.eval(ode.t0);
    const double up0 = upper.eval(ode.t0);

    WeightedPrefix wp(kernel, weight, ode.t0, ode.horizon, opts.quad_tol);
    EnvelopeIntegral out;
    out.condition.label = label;
    if (wp.overflowed()) {
        out.condition.inconclusive = true;
        out.condition.note = "quadrature overflow";
        out.nu = nu_param.value_or(z0);
        return out;
    }
    double max_g = -std::numeric_limits<double>::infinity();
    double arg = ode.t0;
    for (int i = 0; i <= opts.grid_points; ++i) {
        const double t = ode.t0 + (ode.horizon - ode.t0) * i / opts.grid_points;
        const double v = wp.value(t);
        if (v > max_g) { max_g = v; arg = t; }
    }
    const double nu = nu_param ? *nu_param : choose_nu(z0, up0, z0, max_g, opts.tolerance);
    out.nu = nu;
    out.condition.margin = nu - z0 - max_g;
    out.condition.witness_t = arg;
    return out;
}

}  // namespace criteria_detail

inline std::vector<ConditionResult> check_pointwise_conditions(const PolyODE& ode,
                                                               CriterionId id,
                                                               const TheoremParams& params,
                                                               const CheckOptions& opts) {
    namespace cd = criteria_detail;
    std::vector<ConditionResult> out;
    const int j = params.j.value_or(2);
    switch (id) {
        case CriterionId::T2_3: case CriterionId::T4_3: case CriterionId::T5_2: {
            double worst = std::numeric_limits<double>::infinity(), arg = ode.t0;
            for (int k = 2; k <= ode.n; ++k) {
                SupResult m = grid_min(cd::coeff_fn(ode, k), ode.t0, ode.horizon,
                                       opts.grid_points);
                if (m.value < worst) { worst = m.value; arg = m.arg; }
            }
            out.push_back({"(C) a_k >= 0, k=2..n", worst, arg, std::nullopt, "", false});
            break;
        }
        case CriterionId::T5_1:
            cd::append(out, check_constant_level_conditions(ode, j, opts));
            out.front().label = "1) signs";
            out.back().label = "1) positive sum";
            break;
        case CriterionId::C5_1:
            cd::append(out, check_constant_level_conditions(ode, j, opts, true));
            break;
        case CriterionId::T4_4: {
            auto f = [&ode](int k) {
                return [&ode, k](double t) {
                    return (k % 2 == 0 ? 1.0 : -1.0) * ode.a(k, t);
                };
            };
            double worst = std::numeric_limits<double>::infinity(), arg = ode.t0;
            for (int k = 2; k <= ode.n; ++k) {
                SupResult m = grid_min(f(k), ode.t0, ode.horizon, opts.grid_points);
                if (m.value < worst) { worst = m.value; arg = m.arg; }
            }
            out.push_back({"(F) (-1)^k a_k >= 0, k=2..n", worst, arg, std::nullopt, "", false});
            break;
        }
        case CriterionId::C4_2:
            out.push_back(cd::pointwise_min("(I) a_1 < 0",
                                            [&ode](double t) { return -ode.a(1, t); }, ode.t0,
                                            ode.horizon, opts, true));
            break;
        case CriterionId::C4_3:
            out.push_back(cd::pointwise_min("a_1 > 0", cd::coeff_fn(ode, 1), ode.t0,
                                            ode.horizon, opts, true));
            break;
        case CriterionId::T4_7: case CriterionId::T5_5: {
            ConditionResult c;
            c.label = id == CriterionId::T4_7 ? "(L) n odd" : "16) n odd";
            c.margin = ode.n % 2 == 1 ? 0.0 : -1.0;
            c.note = "n = " + std::to_string(ode.n);
            out.push_back(std::move(c));
            break;
        }
        default: break;
    }
    return out;
}

inline std::vector<ConditionResult> check_boundary_conditions(const PolyODE& ode,
                                                              CriterionId id,
                                                              const TheoremParams& params,
                                                              const CheckOptions& opts) {
    std::vector<ConditionResult> out;
    LinearWeights weights(ode);
    auto W = [&weights](double t) { return weights.weighted_a0(t); };
    const double A = weights.a1_integral(ode.horizon);
    const double R = weights.weighted_a0(ode.horizon);
    const double growth = 1.0 - std::exp(std::min(A, kLogOverflowLimit));

    switch (id) {
        case CriterionId::T5_3: {
            const double cmax = sup_on_interval(W, ode.t0, ode.horizon, 4096, 0.0).value;
            ConditionResult c;
            c.label = "6)";
            c.margin = R - cmax * growth;
            c.note = "max prefix = " + std::to_string(cmax);
            out.push_back(std::move(c));
            break;
        }
        case CriterionId::T5_4: {
            const double c_level = params.c.value_or(eta_c_min_level(ode));
            ConditionResult c;
            c.label = "11)";
            c.margin = R - c_level * growth;
            out.push_back(std::move(c));
            break;
        }
        case CriterionId::T5_5: {
            const double wmax = sup_on_interval(W, ode.t0, ode.horizon, 4096, 0.0).value;
            const double wmin = inf_on_interval(W, ode.t0, ode.horizon, 4096).value;
            out.push_back({"17)", R - wmax * growth, std::nullopt, std::nullopt, "", false});
            out.push_back({"18)", wmin * growth - R, std::nullopt, std::nullopt, "", false});
            break;
        }
        case CriterionId::T5_6: {
            const double cp = params.c_plus.value_or(theta_min_level(ode, ThetaSign::Plus));
            const double cm = params.c_minus.value_or(theta_min_level(ode, ThetaSign::Minus));
            CandidateFunction up = build_theta_unchecked(ode, cp, ThetaSign::Plus);
            CandidateFunction dn = build_theta_unchecked(ode, cm, ThetaSign::Minus);
            out.push_back({"20) upper endpoint", up.eval(ode.t0) - up.eval(ode.horizon),
                           ode.horizon, std::nullopt, "theta+(t0) >= theta+(T)", false});
            out.push_back({"20) lower endpoint", dn.eval(ode.horizon) - dn.eval(ode.t0),
                           ode.horizon, std::nullopt, "theta-(t0) <= theta-(T)", false});
            break;
        }
        default: break;
    }
    return out;
}

namespace criteria_detail {

inline void conclude_interval_note(CriterionReport& rep, const PolyODE& ode) {
    rep.t_lo = ode.t0;
    rep.t_hi = ode.horizon;
    rep.notes.push_back("conditions checked on [" + std::to_string(ode.t0) + ", " +
                        std::to_string(ode.horizon) + "]");
}

}  // namespace criteria_detail

inline CriterionReport check_theorem(const PolyODE& ode, CriterionId id,
                                     const TheoremParams& params, const CheckOptions& opts) {
    namespace cd = criteria_detail;
    CriterionReport rep;
    rep.id = id;
    cd::conclude_interval_note(rep, ode);

    const Expr zero = Expr::constant(0.0);
    cd::RefFunction zeta = cd::ref_from_expr(params.zeta_expr.value_or(zero), ode.t0,
                                             ode.horizon);
    const double T = params.glue_T.value_or(ode.horizon);

    auto add_candidate_failure = [&rep](const HypothesisViolation& hv) {
        ConditionResult c;
        c.label = hv.condition;
        c.margin = -1.0;
        c.witness_t = hv.witness_t;
        if (!std::isnan(hv.witness_u)) c.witness_u = hv.witness_u;
        c.note = "candidate construction failed";
        rep.conditions.push_back(std::move(c));
    };

    try {
        switch (id) {
            case CriterionId::T2_3: {
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                std::vector<double> part = params.partition.empty()
                                               ? std::vector<double>{ode.t0, ode.horizon}
                                               : params.partition;
                cd::append(rep.conditions, check_usable_sequence_condition(ode, part, opts));
                rep.notes.push_back(
                    "conclusion: nonnegative solutions from any gamma >= 0, bounded by the "
                    "weighted linear envelope");
                break;
            }

            case CriterionId::T3_1: {
                if (!params.b_coeffs || !params.y1_init)
                    throw std::invalid_argument("T3.1 needs b coefficients and y1 initial value");
                PolyODE odeB(ode.n, *params.b_coeffs, ode.t0, ode.horizon);
                Trajectory y1 = integrate(odeB, ode.t0, *params.y1_init, ode.horizon,
                                          opts.quad_tol);
                if (!y1.reached_end()) {
                    rep.conditions.push_back({"(y1)", 0.0, y1.t_escape, std::nullopt,
                                              "comparison trajectory did not reach the horizon",
                                              true});
                    break;
                }
                CandidateChoice upper_choice =
                    params.eta_choice.value_or(CandidateChoice{"m_star", std::nullopt});
                CandidateFunction upper =
                    cd::realize_candidate(ode, upper_choice, params, Direction::Sub);

                // (I): pick the admissible majorant
                MajorantMode mode = MajorantMode::AllPositiveParts;
                double y1_min = std::numeric_limits<double>::infinity();
                for (int i = 0; i <= opts.grid_points; ++i) {
                    const double t = ode.t0 + (ode.horizon - ode.t0) * i / opts.grid_points;
                    y1_min = std::min(y1_min, y1(t));
                }
                if (y1_min >= -opts.tolerance) {
                    rep.conditions.push_back({"(I)", y1_min, std::nullopt, std::nullopt,
                                              "majorant: positive parts (reference nonnegative)",
                                              false});
                } else {
                    double worst = std::numeric_limits<double>::infinity(), arg = ode.t0;
                    for (int k = 2; k <= ode.n; ++k) {
                        auto f = [&ode, k](double t) {
                            return (k % 2 == 0 ? 1.0 : -1.0) * ode.a(k, t);
                        };
                        SupResult m = grid_min(f, ode.t0, ode.horizon, opts.grid_points);
                        if (m.value < worst) { worst = m.value; arg = m.arg; }
                    }
                    mode = MajorantMode::EvenPositiveParts;
                    rep.conditions.push_back({"(I)", worst, arg, std::nullopt,
                                              "majorant: even positive parts (alternating signs)",
                                              false});
                }

                auto kernel = [&ode, &upper, &y1, mode](double s) {
                    return d1_majorant(ode, s, upper.eval(s), y1(s), mode);
                };
                auto weight = [&ode, &odeB, &y1](double tau) {
                    const double v = y1(tau);
                    double acc = 0.0, p = 1.0;
                    for (int k = 0; k <= ode.n; ++k) {
                        acc += (odeB.a(k, tau) - ode.a(k, tau)) * p;
                        p *= v;
                    }
                    return acc;
                };
                const double y10 = y1(ode.t0), up0 = upper.eval(ode.t0);
                rep.conditions.push_back({"y1(t0) < eta*(t0)", up0 - y10 - opts.strict_eps,
                                          ode.t0, std::nullopt, "", false, true});

                double best_margin = -std::numeric_limits<double>::infinity();
                double best_gamma = y10, best_witness = ode.t0;
                bool overflow = false;
                std::vector<double> gammas;
                if (params.gamma) gammas.push_back(*params.gamma);
                else
                    for (int i = 0; i <= 32; ++i) gammas.push_back(y10 + (up0 - y10) * i / 32);
                // gamma enters only through the base, so one quadrature pass serves all
                WeightedPrefix wp(kernel, weight, ode.t0, ode.horizon, opts.quad_tol);
                if (wp.overflowed()) overflow = true;
                for (double g : gammas) {
                    if (overflow) break;
                    double worst = std::numeric_limits<double>::infinity(), arg = ode.t0;
                    for (int i = 0; i <= opts.grid_points; ++i) {
                        const double t =
                            ode.t0 + (ode.horizon - ode.t0) * i / opts.grid_points;
                        const double q = g - y1(t) + wp.value(t);
                        if (q < worst) { worst = q; arg = t; }
                    }
                    if (worst > best_margin) {
                        best_margin = worst;
                        best_gamma = g;
                        best_witness = arg;
                    }
                }
                ConditionResult cII;
                cII.label = "(II)";
                if (overflow) {
                    cII.inconclusive = true;
                    cII.note = "quadrature overflow";
                } else {
                    cII.margin = best_margin;
                    cII.witness_t = best_witness;
                }
                rep.conditions.push_back(std::move(cII));
                rep.gamma_used = best_gamma;
                rep.bracket = {{best_gamma, up0}};
                rep.lower_bound = [y1t = std::make_shared<Trajectory>(std::move(y1))](double t) {
                    return (*y1t)(t);
                };
                rep.upper_bound = upper.eval;
                break;
            }

            case CriterionId::C3_1: {
                CandidateChoice upper_choice =
                    params.eta_choice.value_or(CandidateChoice{"m_star", std::nullopt});
                CandidateFunction upper =
                    cd::realize_candidate(ode, upper_choice, params, Direction::Sub);
                // (I) with the reference zeta in place of y1
                double z_min = std::numeric_limits<double>::infinity();
                for (int i = 0; i <= opts.grid_points; ++i) {
                    const double t = ode.t0 + (ode.horizon - ode.t0) * i / opts.grid_points;
                    z_min = std::min(z_min, zeta.eval(t));
                }
                MajorantMode mode = MajorantMode::AllPositiveParts;
                rep.conditions.push_back({"(I)", z_min, std::nullopt, std::nullopt,
                                          "majorant: positive parts (reference nonnegative)",
                                          false});
                const double z0 = zeta.eval(ode.t0), up0 = upper.eval(ode.t0);
                rep.conditions.push_back({"zeta(t0) < eta*(t0)", up0 - z0 - opts.strict_eps,
                                          ode.t0, std::nullopt, "", false, true});
                auto block = cd::envelope_integral(ode, upper, zeta, mode, params.gamma,
                                                   "(II0)", opts);
                rep.conditions.push_back(block.condition);
                rep.gamma_used = block.nu;
                rep.bracket = {{block.nu, up0}};
                rep.lower_bound = zeta.eval;
                rep.upper_bound = upper.eval;
                break;
            }

            case CriterionId::T3_2: {
                if (!params.y1_expr || !params.y2_expr)
                    throw std::invalid_argument("T3.2 needs y1 and y2 formulas");
                cd::RefFunction y1 = cd::ref_from_expr(*params.y1_expr, ode.t0, ode.horizon);
                cd::RefFunction y2 = cd::ref_from_expr(*params.y2_expr, ode.t0, ode.horizon);
                auto r1 = cd::residual_along(ode, y1);
                auto r2 = cd::residual_along(ode, y2);
                rep.conditions.push_back(cd::pointwise_min(
                    "(III)", [&r1](double t) { return -r1(t); }, ode.t0, ode.horizon, opts));
                rep.conditions.push_back(
                    cd::pointwise_min("(IV)", r2, ode.t0, ode.horizon, opts));
                const double lo0 = y1.eval(ode.t0), hi0 = y2.eval(ode.t0);
                rep.conditions.push_back({"y1(t0) <= y2(t0)", hi0 - lo0, ode.t0, std::nullopt,
                                          "", false});
                rep.bracket = {{lo0, hi0}};
                rep.lower_bound = y1.eval;
                rep.upper_bound = y2.eval;
                break;
            }

            case CriterionId::C3_2: {
                if (!params.eta_choice || !params.zeta_choice)
                    throw std::invalid_argument("C3.2 needs eta and zeta candidates");
                CandidateFunction eta =
                    cd::realize_candidate(ode, *params.eta_choice, params, Direction::Sub);
                CandidateFunction zt =
                    cd::realize_candidate(ode, *params.zeta_choice, params, Direction::Super);
                Margin ms = verify_differential_inequality(eta, ode, ode.t0, ode.horizon,
                                                           opts.grid_points);
                rep.conditions.push_back({"sub residual", ms.value, ms.witness_t, std::nullopt,
                                          "", false});
                Margin mz = verify_differential_inequality(zt, ode, ode.t0, ode.horizon,
                                                           opts.grid_points);
                rep.conditions.push_back({"super residual", mz.value, mz.witness_t,
                                          std::nullopt, "", false});
                rep.conditions.push_back(cd::pointwise_min(
                    "zeta* <= eta*",
                    [&eta, &zt](double t) { return eta.eval(t) - zt.eval(t); }, ode.t0,
                    ode.horizon, opts));
                rep.bracket = {{zt.eval(ode.t0), eta.eval(ode.t0)}};
                rep.lower_bound = zt.eval;
                rep.upper_bound = eta.eval;
                break;
            }

            case CriterionId::T4_1: {
                const int j = params.j.value_or(2);
                rep.j_used = j;
                cd::append(rep.conditions, check_constant_level_conditions(ode, j, opts));
                if (cd::any_violated(rep.conditions, opts)) break;
                CandidateFunction upper = build_m_star(ode, j, T, params.gamma.value_or(0.0));
                rep.gamma_used = params.gamma.value_or(0.0);
                const double z0 = zeta.eval(ode.t0);
                rep.conditions.push_back(cd::pointwise_min("zeta >= 0", zeta.eval, ode.t0,
                                                           ode.horizon, opts));
                rep.conditions.push_back({"zeta(t0) < M*(t0)",
                                          upper.eval(ode.t0) - z0 - opts.strict_eps, ode.t0,
                                          std::nullopt, "", false, true});
                auto block = cd::envelope_integral(ode, upper, zeta,
                                                   MajorantMode::AllPositiveParts, params.nu,
                                                   "(A)", opts);
                rep.conditions.push_back(block.condition);
                rep.nu_used = block.nu;
                rep.bracket = {{block.nu, upper.eval(ode.t0)}};
                rep.lower_bound = zeta.eval;
                rep.upper_bound = upper.eval;
                break;
            }

            case CriterionId::T4_2: case CriterionId::T4_4: {
                if (!params.split) throw std::invalid_argument("needs a coefficient split");
                cd::append(rep.conditions,
                           check_split_conditions(ode, *params.split, T, opts));
                if (id == CriterionId::T4_4)
                    cd::append(rep.conditions,
                               check_pointwise_conditions(ode, CriterionId::T4_4, params, opts));
                if (cd::any_violated(rep.conditions, opts)) break;
                CandidateFunction upper = build_eta_star(ode, T, *params.split);
                const double z0 = zeta.eval(ode.t0);
                if (id == CriterionId::T4_2)
                    rep.conditions.push_back(cd::pointwise_min("zeta >= 0", zeta.eval, ode.t0,
                                                               ode.horizon, opts));
                rep.conditions.push_back({"zeta(t0) < eta*(t0)",
                                          upper.eval(ode.t0) - z0 - opts.strict_eps, ode.t0,
                                          std::nullopt, "", false, true});
                auto block = cd::envelope_integral(
                    ode, upper, zeta,
                    id == CriterionId::T4_2 ? MajorantMode::AllPositiveParts
                                            : MajorantMode::EvenPositiveParts,
                    params.nu, id == CriterionId::T4_2 ? "(B)" : "(G)", opts);
                rep.conditions.push_back(block.condition);
                rep.nu_used = block.nu;
                rep.bracket = {{block.nu, upper.eval(ode.t0)}};
                rep.lower_bound = zeta.eval;
                rep.upper_bound = upper.eval;
                break;
            }

            case CriterionId::T4_3: {
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                std::vector<double> part = params.partition.empty()
                                               ? std::vector<double>{ode.t0, ode.horizon}
                                               : params.partition;
                cd::append(rep.conditions, check_usable_sequence_condition(ode, part, opts));
                const double gamma = params.gamma.value_or(0.0);
                rep.gamma_used = gamma;
                IGammaBound ig = build_i_gamma(ode, gamma);
                auto kernel = [&ode, &ig](double s) {
                    const double u = ig.value_at(s);
                    double acc = ode.a(1, s), p = 1.0;
                    for (int k = 2; k <= ode.n; ++k) {
                        p *= u;
                        acc += ode.a(k, s) * p;
                    }
                    return acc;
                };
                IntegralCheck e = check_integral_condition(kernel, cd::coeff_fn(ode, 0), 0.0,
                                                           ode.t0, ode.horizon,
                                                           IntegralSense::NonPositiveForAllT,
                                                           opts);
                rep.conditions.push_back({"(E)", e.margin, e.witness_t, std::nullopt,
                                          e.overflowed ? "quadrature overflow" : "",
                                          e.overflowed});
                rep.bracket = {{gamma, gamma}};
                rep.lower_bound = [](double) { return 0.0; };
                rep.upper_bound = ig.value_at;
                break;
            }

            case CriterionId::T4_5: case CriterionId::T4_6: {
                CandidateFunction upper;
                if (id == CriterionId::T4_5) {
                    const double c = params.c.value_or(eta_c_min_level(ode));
                    rep.c_used = c;
                    cd::append(rep.conditions,
                               check_linear_envelope_conditions(ode, c, opts));
                    upper = build_eta_c(ode, c);
                } else {
                    const double c = params.c_plus.value_or(
                        params.c.value_or(theta_min_level(ode, ThetaSign::Plus)));
                    rep.c_used = c;
                    const double cmin = theta_min_level(ode, ThetaSign::Plus);
                    rep.conditions.push_back({"c admissible", c - cmin, std::nullopt,
                                              std::nullopt,
                                              "minimal admissible c = " + std::to_string(cmin),
                                              false});
                    upper = build_theta(ode, c, ThetaSign::Plus);
                    auto sup = sup_on_interval(upper.eval, ode.t0, ode.horizon, 4096, 0.0);
                    rep.conditions.push_back({"theta <= 1", 1.0 - sup.value, sup.arg,
                                              std::nullopt, "", false});
                }
                const double z0 = zeta.eval(ode.t0);
                rep.conditions.push_back(cd::pointwise_min("zeta >= 0", zeta.eval, ode.t0,
                                                           ode.horizon, opts));
                rep.conditions.push_back({"zeta(t0) < upper(t0)",
                                          upper.eval(ode.t0) - z0 - opts.strict_eps, ode.t0,
                                          std::nullopt, "", false, true});
                auto block = cd::envelope_integral(ode, upper, zeta,
                                                   MajorantMode::AllPositiveParts, params.nu,
                                                   "(H)", opts);
                rep.conditions.push_back(block.condition);
                rep.nu_used = block.nu;
                rep.bracket = {{block.nu, upper.eval(ode.t0)}};
                rep.lower_bound = zeta.eval;
                rep.upper_bound = upper.eval;
                break;
            }

            case CriterionId::C4_1: {
                CandidateFunction upper;
                if (params.split) {
                    cd::append(rep.conditions,
                               check_split_conditions(ode, *params.split, T, opts));
                    upper = build_eta_star(ode, T, *params.split);
                } else {
                    const int j = params.j.value_or(2);
                    rep.j_used = j;
                    cd::append(rep.conditions, check_constant_level_conditions(ode, j, opts));
                    upper = build_m_star(ode, j, T);
                }
                rep.conditions.push_back(cd::pointwise_min(
                    "a_0 <= 0", [&ode](double t) { return -ode.a(0, t); }, ode.t0, ode.horizon,
                    opts));
                rep.bracket = {{0.0, upper.eval(ode.t0)}};
                rep.lower_bound = [](double) { return 0.0; };
                rep.upper_bound = upper.eval;
                rep.notes.push_back(
                    "conclusion: nonnegative initial data yield global nonnegative solutions");
                break;
            }

            case CriterionId::C4_2: case CriterionId::C4_3: {
                const bool lower_positive = id == CriterionId::C4_2;
                const double c = params.c.value_or(eta_c_min_level(ode) + 1e-6);
                rep.c_used = c;
                cd::append(rep.conditions, check_linear_envelope_conditions(ode, c, opts));
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                CandidateFunction upper = build_eta_c(ode, c);
                const double up0 = upper.eval(ode.t0);

                // admissible flat reference level
                auto slack = [&ode](double z) {
                    // min over t of |a_1| - sum_{k>=2} |a_k| z^{k-1}
                    auto f = [&ode, z](double t) {
                        double acc = 0.0, p = 1.0;
                        for (int k = 2; k <= ode.n; ++k) {
                            p *= std::fabs(z);
                            acc += std::fabs(ode.a(k, t)) * p;
                        }
                        return std::fabs(ode.a(1, t)) - acc;
                    };
                    return grid_min(f, ode.t0, ode.horizon, 512).value;
                };
                double z0;
                if (params.zeta0) {
                    z0 = *params.zeta0;
                } else {
                    // bisect for the largest admissible magnitude, then back off
                    double lo = 0.0, hi = lower_positive ? std::max(1e-9, up0) : 10.0;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (slack(mid) >= 0.0) lo = mid;
                        else hi = mid;
                    }
                    z0 = 0.5 * lo;
                    if (!lower_positive) z0 = -z0;
                    if (lower_positive && z0 <= 0.0) z0 = std::min(1e-6, up0 / 2);
                }
                rep.zeta0_used = z0;
                rep.conditions.push_back({"smallness of zeta0", slack(z0), std::nullopt,
                                          std::nullopt, "zeta0 = " + std::to_string(z0),
                                          false});
                if (lower_positive)
                    rep.conditions.push_back({"zeta0 in (0, eta_c(t0))",
                                              std::min(z0, up0 - z0) - opts.strict_eps, ode.t0,
                                              std::nullopt, "", false, true});
                else
                    rep.conditions.push_back({"zeta0 < 0", -z0 - opts.strict_eps, ode.t0,
                                              std::nullopt, "", false, true});

                cd::RefFunction flat;
                flat.eval = [z0](double) { return z0; };
                flat.deriv = [](double) { return 0.0; };
                auto block = cd::envelope_integral(ode, upper, flat,
                                                   MajorantMode::AllPositiveParts, params.nu,
                                                   "(J)", opts, cd::coeff_fn(ode, 0));
                rep.conditions.push_back(block.condition);
                rep.nu_used = block.nu;
                rep.bracket = {{block.nu, up0}};
                rep.lower_bound = [z0](double) { return z0; };
                rep.upper_bound = upper.eval;
                break;
            }

            case CriterionId::T4_7: {
                if (!params.split) throw std::invalid_argument("T4.7 needs a coefficient split");
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                cd::append(rep.conditions,
                           check_split_conditions(ode, *params.split, T, opts));
                {
                    auto flipped = check_split_conditions(ode.sign_flipped(),
                                                          params.split->sign_flipped(), T, opts,
                                                          "(1~)", "(2~)", "(K)");
                    rep.conditions.push_back(flipped.back());
                }
                if (cd::any_violated(rep.conditions, opts)) break;
                CandidateFunction eta = build_eta_star(ode, T, *params.split);
                CandidateFunction zt = build_zeta_star(ode, T, *params.split);
                rep.bracket = {{zt.eval(ode.t0), eta.eval(ode.t0)}};
                rep.lower_bound = zt.eval;
                rep.upper_bound = eta.eval;
                break;
            }

            case CriterionId::T4_8: {
                const double cp = params.c_plus.value_or(theta_min_level(ode, ThetaSign::Plus));
                const double cm = params.c_minus.value_or(theta_min_level(ode, ThetaSign::Minus));
                rep.c_plus_used = cp;
                rep.c_minus_used = cm;
                const double cp_min = theta_min_level(ode, ThetaSign::Plus);
                const double cm_min = theta_min_level(ode, ThetaSign::Minus);
                rep.conditions.push_back({"c+ admissible", cp - cp_min, std::nullopt,
                                          std::nullopt, "", false});
                rep.conditions.push_back({"c- admissible", cm - cm_min, std::nullopt,
                                          std::nullopt, "", false});
                if (cp < cp_min - opts.tolerance || cm < cm_min - opts.tolerance) break;
                CandidateFunction up = cd::build_theta_checked(ode, cp, ThetaSign::Plus,
                                                               rep.conditions);
                CandidateFunction dn = cd::build_theta_checked(ode, cm, ThetaSign::Minus,
                                                               rep.conditions);
                rep.bracket = {{dn.eval(ode.t0), up.eval(ode.t0)}};
                rep.lower_bound = dn.eval;
                rep.upper_bound = up.eval;
                break;
            }

            case CriterionId::T5_1: {
                const int j = params.j.value_or(2);
                rep.j_used = j;
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                if (cd::any_violated(rep.conditions, opts)) break;
                CandidateFunction base_level = build_m_star(ode, j, T);
                double best = -std::numeric_limits<double>::infinity();
                double best_gamma = 0.0, best_witness = ode.t0;
                bool overflow = false;
                std::vector<double> gammas = params.gamma
                                                 ? std::vector<double>{*params.gamma}
                                                 : cd::gamma_scan_grid(base_level.m_value);
                for (double g : gammas) {
                    const double level = base_level.m_value + g;
                    auto kernel = [&ode, level](double s) {
                        double acc = ode.a(1, s), p = 1.0;
                        for (int k = 2; k <= ode.n; ++k) {
                            p *= level;
                            acc += positive_part(ode.a(k, s)) * p;
                        }
                        return acc;
                    };
                    IntegralCheck e = check_integral_condition(
                        kernel, cd::coeff_fn(ode, 0), 0.0, ode.t0, ode.horizon,
                        IntegralSense::NonPositiveForAllT, opts);
                    if (e.overflowed) { overflow = true; continue; }
                    if (e.margin > best) {
                        best = e.margin;
                        best_gamma = g;
                        best_witness = e.witness_t;
                    }
                }
                ConditionResult c2;
                c2.label = "2)";
                c2.note = "constant level read as M_{T,j} + gamma";
                if (best == -std::numeric_limits<double>::infinity() && overflow) {
                    c2.inconclusive = true;
                    c2.note += "; quadrature overflow";
                } else {
                    c2.margin = best;
                    c2.witness_t = best_witness;
                }
                rep.conditions.push_back(std::move(c2));
                rep.gamma_used = best_gamma;
                rep.bracket = {{0.0, base_level.m_value + best_gamma}};
                // conclusion refinements
                PrefixIntegral a1int(cd::coeff_fn(ode, 1), ode.t0, ode.horizon, opts.quad_tol);
                const double a0_min = grid_min(cd::coeff_fn(ode, 0), ode.t0, ode.horizon,
                                               opts.grid_points).value;
                const double a0_mag =
                    sup_on_interval([&ode](double t) { return std::fabs(ode.a(0, t)); },
                                    ode.t0, ode.horizon, 2048, 0.0).value;
                if (a0_min >= -opts.tolerance && a0_mag > opts.tolerance)
                    rep.notes.push_back("refinement: the closed solution is positive");
                if (j == 2 && a1int(ode.horizon) > opts.strict_eps)
                    rep.notes.push_back("refinement: the closed solution is isolated");
                break;
            }

            case CriterionId::C5_1: {
                const int j = params.j.value_or(2);
                rep.j_used = j;
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                // bracket for the reflected search
                try {
                    PolyODE refl = ode.reflected();
                    CandidateFunction level = build_m_star(refl, j, refl.horizon);
                    rep.bracket = {{-level.m_value, 0.0}};
                } catch (const std::exception&) {
                    // bracket is advisory here
                }
                PrefixIntegral a1int(cd::coeff_fn(ode, 1), ode.t0, ode.horizon, opts.quad_tol);
                const double a0_max = sup_on_interval(cd::coeff_fn(ode, 0), ode.t0, ode.horizon,
                                                      2048, 0.0).value;
                const double a0_mag =
                    sup_on_interval([&ode](double t) { return std::fabs(ode.a(0, t)); },
                                    ode.t0, ode.horizon, 2048, 0.0).value;
                rep.notes.push_back("conclusion: nonpositive closed solution (search the "
                                    "reflected equation)");
                if (a0_max <= opts.tolerance && a0_mag > opts.tolerance)
                    rep.notes.push_back("refinement: the closed solution is negative");
                if (j == 2 && a1int(ode.horizon) > opts.strict_eps)
                    rep.notes.push_back("refinement: the closed solution is isolated");
                break;
            }

            case CriterionId::T5_2: {
                TheoremParams inner = params;
                CriterionReport sub = check_theorem(ode, CriterionId::T4_3, inner, opts);
                cd::append(rep.conditions, std::move(sub.conditions));
                PrefixIntegral a1int(cd::coeff_fn(ode, 1), ode.t0, ode.horizon, opts.quad_tol);
                const double a1_total = a1int(ode.horizon);
                auto sum_hi = [&ode](double t) {
                    double acc = 0.0;
                    for (int k = 2; k <= ode.n; ++k) acc += std::fabs(ode.a(k, t));
                    return acc;
                };
                const double mass = sup_on_interval(sum_hi, ode.t0, ode.horizon, 2048, 0.0).value;
                ConditionResult extra;
                extra.label = "nontriviality";
                extra.margin = std::max(mass, a1_total) - opts.strict_eps;
                extra.strict = true;
                extra.note = "needs sum_{k>=2} a_k not identically zero or a positive a_1 mass";
                rep.conditions.push_back(std::move(extra));
                rep.gamma_used = sub.gamma_used;
                rep.bracket = sub.bracket;
                rep.lower_bound = sub.lower_bound;
                rep.upper_bound = sub.upper_bound;
                if (a1_total > opts.strict_eps)
                    rep.notes.push_back("refinement: the closed solution is isolated");
                break;
            }

            case CriterionId::T5_3: {
                if (!params.split) throw std::invalid_argument("T5.3 needs a coefficient split");
                cd::append(rep.conditions,
                           check_split_conditions(ode, *params.split, T, opts, "3)", "4)", "5)"));
                cd::append(rep.conditions, check_boundary_conditions(ode, id, params, opts));
                double best = -std::numeric_limits<double>::infinity();
                double best_gamma = 0.0, best_witness = ode.t0;
                bool overflow = false;
                std::vector<double> gammas = params.gamma ? std::vector<double>{*params.gamma}
                                                          : cd::gamma_scan_grid(1.0);
                CandidateFunction env;
                for (double g : gammas) {
                    CandidateFunction eta_g = build_eta_gamma(ode, g, T);
                    auto kernel = [&ode, &eta_g](double s) {
                        const double u = eta_g.eval(s);
                        double acc = ode.a(1, s), p = 1.0;
                        for (int k = 2; k <= ode.n; ++k) {
                            p *= u;
                            acc += positive_part(ode.a(k, s)) * p;
                        }
                        return acc;
                    };
                    IntegralCheck e = check_integral_condition(
                        kernel, cd::coeff_fn(ode, 0), 0.0, ode.t0, ode.horizon,
                        IntegralSense::NonPositiveForAllT, opts);
                    if (e.overflowed) { overflow = true; continue; }
                    if (e.margin > best) {
                        best = e.margin;
                        best_gamma = g;
                        best_witness = e.witness_t;
                        env = eta_g;
                    }
                }
                ConditionResult c7;
                c7.label = "7)";
                if (best == -std::numeric_limits<double>::infinity() && overflow) {
                    c7.inconclusive = true;
                    c7.note = "quadrature overflow";
                } else {
                    c7.margin = best;
                    c7.witness_t = best_witness;
                }
                rep.conditions.push_back(std::move(c7));
                rep.gamma_used = best_gamma;
                if (env.eval) {
                    rep.bracket = {{0.0, env.eval(ode.t0)}};
                    rep.upper_bound = env.eval;
                    rep.lower_bound = [](double) { return 0.0; };
                }
                break;
            }

            case CriterionId::T5_4: {
                const double c = params.c.value_or(eta_c_min_level(ode));
                rep.c_used = c;
                cd::append(rep.conditions,
                           check_linear_envelope_conditions(ode, c, opts, "8)", "9a)", "9b)"));
                TheoremParams bparams = params;
                bparams.c = c;
                cd::append(rep.conditions, check_boundary_conditions(ode, id, bparams, opts));
                const bool ok = !cd::any_violated(rep.conditions, opts);
                if (ok) {
                    CandidateFunction upper = build_eta_c(ode, c);
                    auto kernel = [&ode, &upper](double s) {
                        const double u = upper.eval(s);
                        double acc = ode.a(1, s), p = 1.0;
                        for (int k = 2; k <= ode.n; ++k) {
                            p *= u;
                            acc += positive_part(ode.a(k, s)) * p;
                        }
                        return acc;
                    };
                    IntegralCheck e = check_integral_condition(
                        kernel, cd::coeff_fn(ode, 0), 0.0, ode.t0, ode.horizon,
                        IntegralSense::NonPositiveForAllT, opts);
                    rep.conditions.push_back({"10)", e.margin, e.witness_t, std::nullopt,
                                              e.overflowed ? "quadrature overflow" : "",
                                              e.overflowed});
                    rep.bracket = {{0.0, upper.eval(ode.t0)}};
                    rep.upper_bound = upper.eval;
                    rep.lower_bound = [](double) { return 0.0; };
                }
                break;
            }

            case CriterionId::T5_5: {
                if (!params.split) throw std::invalid_argument("T5.5 needs a coefficient split");
                cd::append(rep.conditions,
                           check_split_conditions(ode, *params.split, T, opts, "12)", "13)",
                                                  "14)"));
                {
                    auto flipped = check_split_conditions(ode.sign_flipped(),
                                                          params.split->sign_flipped(), T, opts,
                                                          "12~)", "13~)", "15)");
                    rep.conditions.push_back(flipped.back());
                }
                cd::append(rep.conditions, check_pointwise_conditions(ode, id, params, opts));
                cd::append(rep.conditions, check_boundary_conditions(ode, id, params, opts));
                const bool ok = !cd::any_violated(rep.conditions, opts);
                if (ok) {
                    CandidateFunction eta = build_eta_star(ode, T, *params.split);
                    CandidateFunction zt = build_zeta_star(ode, T, *params.split);
                    rep.bracket = {{zt.eval(ode.t0), eta.eval(ode.t0)}};
                    rep.lower_bound = zt.eval;
                    rep.upper_bound = eta.eval;
                }
                break;
            }

            case CriterionId::T5_6: {
                const double cp = params.c_plus.value_or(theta_min_level(ode, ThetaSign::Plus));
                const double cm = params.c_minus.value_or(theta_min_level(ode, ThetaSign::Minus));
                rep.c_plus_used = cp;
                rep.c_minus_used = cm;
                rep.conditions.push_back({"19) c+ admissible",
                                          cp - theta_min_level(ode, ThetaSign::Plus),
                                          std::nullopt, std::nullopt, "", false});
                rep.conditions.push_back({"19) c- admissible",
                                          cm - theta_min_level(ode, ThetaSign::Minus),
                                          std::nullopt, std::nullopt, "", false});
                if (rep.conditions[0].margin < -opts.tolerance ||
                    rep.conditions[1].margin < -opts.tolerance)
                    break;
                CandidateFunction up = cd::build_theta_checked(ode, cp, ThetaSign::Plus,
                                                               rep.conditions,
                                                               "19) theta+ <= 1");
                CandidateFunction dn = cd::build_theta_checked(ode, cm, ThetaSign::Minus,
                                                               rep.conditions,
                                                               "19) |theta-| <= 1");
                TheoremParams bparams = params;
                bparams.c_plus = cp;
                bparams.c_minus = cm;
                cd::append(rep.conditions, check_boundary_conditions(ode, id, bparams, opts));
                rep.bracket = {{dn.eval(ode.t0), up.eval(ode.t0)}};
                rep.lower_bound = dn.eval;
                rep.upper_bound = up.eval;
                break;
            }
        }
    } catch (const HypothesisViolation& hv) {
        add_candidate_failure(hv);
    } catch (const DegenerateDenominator& dd) {
        ConditionResult c;
        c.label = "degenerate denominator";
        c.inconclusive = true;
        c.witness_t = dd.witness_t;
        c.note = dd.what();
        rep.conditions.push_back(std::move(c));
    }

    rep.finalize(opts);
    return rep;
}

}  // namespace polyode
