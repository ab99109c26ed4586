#pragma once

// Explicit sub/super solution candidates for the differential inequalities
//
//   (sub)    eta'  + sum_k a_k(t) eta^k  >= 0
//   (super)  zeta' + sum_k a_k(t) zeta^k <= 0
//
// Each builder verifies its hypotheses on a dense grid, assembles an
// evaluable candidate together with the derivative of its defining ODE, and
// exposes the constants it computed. Suprema over intervals are taken by
// dense sampling plus golden-section refinement, then inflated by a small
// safety margin.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polyode/integrate.hpp"
#include "polyode/ode.hpp"
#include "polyode/quadrature.hpp"

namespace polyode {

struct HypothesisViolation : std::runtime_error {
    std::string condition;  // failing condition label
    double witness_t;
    double witness_u;  // NaN when not applicable
    HypothesisViolation(std::string cond, double t,
                        double u = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error("hypothesis " + cond + " violated at t=" + std::to_string(t)),
          condition(std::move(cond)), witness_t(t), witness_u(u) {}
};

struct DegenerateDenominator : std::runtime_error {
    double witness_t;
    explicit DegenerateDenominator(double t)
        : std::runtime_error("denominator vanishes at t=" + std::to_string(t)), witness_t(t) {}
};

// ---------------------------------------------------------------------------
// interval extrema helpers

struct SupResult {
    double value;
    double arg;
};

inline SupResult sup_on_interval(const std::function<double(double)>& f, double lo, double hi,
                                 int samples = 4096, double inflate = 1e-9) {
    double best = -std::numeric_limits<double>::infinity();
    double arg = lo;
    for (int i = 0; i <= samples; ++i) {
        const double t = lo + (hi - lo) * i / samples;
        const double v = f(t);
        if (v > best) { best = v; arg = t; }
    }
    // golden-section refinement around the best sample
    const double cell = (hi - lo) / samples;
    double a = std::max(lo, arg - cell), b = std::min(hi, arg + cell);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::fabs(arg)); ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = f(x1);
        }
    }
    if (f1 > best) { best = f1; arg = x1; }
    if (f2 > best) { best = f2; arg = x2; }
    if (inflate > 0.0) best += inflate * std::max(1.0, std::fabs(best));
    return {best, arg};
}

inline SupResult inf_on_interval(const std::function<double(double)>& f, double lo, double hi,
                                 int samples = 4096) {
    auto neg = [&f](double t) { return -f(t); };
    SupResult r = sup_on_interval(neg, lo, hi, samples, 0.0);
    return {-r.value, r.arg};
}

// min over an evenly spaced grid, with the witness point
inline SupResult grid_min(const std::function<double(double)>& f, double lo, double hi,
                          int samples) {
    double worst = std::numeric_limits<double>::infinity();
    double arg = lo;
    for (int i = 0; i <= samples; ++i) {
        const double t = lo + (hi - lo) * i / samples;
        const double v = f(t);
        if (v < worst) { worst = v; arg = t; }
    }
    return {worst, arg};
}

// ---------------------------------------------------------------------------
// shared weighted-integral state: A1(t) = int a_1, W(t) = int exp{A1} a_0

class LinearWeights {
  public:
    LinearWeights(const PolyODE& ode, double tol = 1e-12) {
        StepControl ctl;
        ctl.tol = tol;
        auto rhs = [&ode](double t, const std::array<double, 2>& y, std::array<double, 2>& dy) {
            dy[0] = ode.a(1, t);
            dy[1] = std::exp(std::min(y[0], kLogOverflowLimit)) * ode.a(0, t);
        };
        rk45_integrate<2>(rhs, ode.t0, {0.0, 0.0}, ode.horizon, ctl, sol_,
                          [](const SolutionNode<2>&, double) { return false; });
    }
    double a1_integral(double t) const { return sol_(t)[0]; }      // A1
    double weighted_a0(double t) const { return sol_(t)[1]; }      // W
  private:
    DenseSolution<2> sol_;
};

// ---------------------------------------------------------------------------
// candidates

enum class CandidateKind { MStar, EtaStar, EtaC, ThetaC, ThetaCMinus, ZetaStar, UserSupplied };
enum class Direction { Sub, Super };

struct CandidateFunction {
    CandidateKind kind = CandidateKind::UserSupplied;
    Direction direction = Direction::Sub;
    std::function<double(double)> eval;
    std::function<double(double)> deriv;  // defining-ODE derivative; empty for user functions

    // exposed construction constants (meaning depends on kind)
    double m_value = 0.0;   // MStar: the constant level on [t0, T]
    double n_t = 0.0;       // EtaStar/ZetaStar: N_T
    double c_t = 0.0;       // EtaStar/ZetaStar: c(T); EtaC/ThetaC: c
    double glue_t = 0.0;    // piecewise kinds: the glue point T
    int j = 0;              // MStar: the chosen power

    double operator()(double t) const { return eval(t); }
};

inline CandidateFunction user_candidate(const Expr& e, Direction dir) {
    CandidateFunction c;
    c.kind = CandidateKind::UserSupplied;
    c.direction = dir;
    c.eval = [e](double t) { return e(t); };
    return c;
}

namespace detail {

// prefix maximum of f over [t0, t] backed by a fine grid; exact at the grid
// nodes, linear in between, and clamped below by the refined value at T.
class PrefixSup {
  public:
    PrefixSup() = default;
    PrefixSup(std::function<double(double)> f, double lo, double hi, int samples = 4096)
        : lo_(lo), hi_(hi) {
        vals_.resize(static_cast<std::size_t>(samples) + 1);
        double run = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= samples; ++i) {
            const double t = lo + (hi - lo) * i / samples;
            run = std::max(run, f(t));
            vals_[static_cast<std::size_t>(i)] = run;
        }
    }
    double operator()(double t) const {
        if (vals_.empty()) return 0.0;
        if (t <= lo_) return vals_.front();
        if (t >= hi_) return vals_.back();
        const double x = (t - lo_) / (hi_ - lo_) * (static_cast<double>(vals_.size()) - 1);
        const std::size_t i = static_cast<std::size_t>(x);
        const double frac = x - static_cast<double>(i);
        const std::size_t i2 = std::min(i + 1, vals_.size() - 1);
        return vals_[i] * (1 - frac) + vals_[i2] * frac;
    }

  private:
    double lo_ = 0.0, hi_ = 1.0;
    std::vector<double> vals_;
};

inline void check_sign_range(const PolyODE& ode, int k_lo, int k_hi, double lo, double hi,
                             const std::string& label, int grid = 2048) {
    for (int k = k_lo; k <= k_hi; ++k) {
        auto f = [&ode, k](double t) { return ode.a(k, t); };
        SupResult m = grid_min(f, lo, hi, grid);
        if (m.value < -1e-12) throw HypothesisViolation(label, m.arg);
    }
}

}  // namespace detail

// Constant-level sub solution: the smallest constant that the top power
// block dominates, glued to its running version past T.
inline CandidateFunction build_m_star(const PolyODE& ode, int j, double T,
                                      double gamma_offset = 0.0) {
    if (j < 2 || j > ode.n) throw std::invalid_argument("build_m_star: j must lie in [2, n]");
    if (!(T > ode.t0) || T > ode.horizon)
        throw std::invalid_argument("build_m_star: T must lie in (t0, horizon]");

    detail::check_sign_range(ode, j, ode.n, ode.t0, ode.horizon, "a_k >= 0 for k in [j, n]");

    auto denom = [&ode, j](double t) {
        double acc = 0.0;
        for (int k = j; k <= ode.n; ++k) acc += ode.a(k, t);
        return acc;
    };
    SupResult dmin = grid_min(denom, ode.t0, ode.horizon, 4096);
    if (dmin.value < -1e-12) throw HypothesisViolation("sum_{k>=j} a_k > 0", dmin.arg);
    if (dmin.value <= 1e-12) throw DegenerateDenominator(dmin.arg);

    auto ratio = [&ode, j, &denom](double t) {
        double num = 0.0;
        for (int k = 0; k < j; ++k) num += std::fabs(ode.a(k, t));
        return num / denom(t);
    };
    const double level = std::max(1.0, sup_on_interval(ratio, ode.t0, T).value) + gamma_offset;

    auto prefix = std::make_shared<detail::PrefixSup>(ratio, ode.t0, ode.horizon);
    CandidateFunction cand;
    cand.kind = CandidateKind::MStar;
    cand.direction = Direction::Sub;
    cand.m_value = level;
    cand.glue_t = T;
    cand.j = j;
    cand.eval = [level, T, gamma_offset, prefix](double t) {
        if (t <= T) return level;
        return std::max(level, std::max(1.0, (*prefix)(t)) + gamma_offset);
    };
    cand.deriv = [](double) { return 0.0; };
    return cand;
}

// The coefficient split used by the eta*/zeta* constructions.
struct CoefficientSplit {
    // entry i corresponds to k = 2 + i, for k = 2 .. n-1
    std::vector<std::pair<Expr, Expr>> parts;  // (c_k, d_k)

    CoefficientSplit sign_flipped() const {
        CoefficientSplit out;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const int k = static_cast<int>(i) + 2;
            Expr c = parts[i].first, d = parts[i].second;
            if (k % 2 == 0) { c = c.negated(); d = d.negated(); }  // (-1)^{k+1}
            out.parts.emplace_back(std::move(c), std::move(d));
        }
        return out;
    }
};

// Linear-comparison sub solution glued at T:
//   eta(t) = gamma + exp{-A1(t)} [ c(T) - W(t) ],  gamma = N_T on [t0, T],
// with N and c promoted to their running suprema past T.
inline CandidateFunction build_eta_star(const PolyODE& ode, double T,
                                        const CoefficientSplit& split,
                                        const char* label_prefix = "") {
    const int n = ode.n;
    if (static_cast<int>(split.parts.size()) != std::max(0, n - 2))
        throw std::invalid_argument("build_eta_star: split must cover k = 2 .. n-1");
    if (!(T > ode.t0) || T > ode.horizon)
        throw std::invalid_argument("build_eta_star: T must lie in (t0, horizon]");
    auto lab = [label_prefix](const char* base) { return std::string(label_prefix) + base; };

    // (1) leading coefficient sign
    {
        auto an = [&ode, n](double t) { return ode.a(n, t); };
        SupResult m = grid_min(an, ode.t0, ode.horizon, 2048);
        if (m.value < -1e-12) throw HypothesisViolation(lab("(1)"), m.arg);
    }
    // (2) split consistency a_k = a_n c_k + d_k
    for (int k = 2; k <= n - 1; ++k) {
        const auto& [ck, dk] = split.parts[static_cast<std::size_t>(k - 2)];
        auto resid = [&, k](double t) {
            return -std::fabs(ode.a(k, t) - (ode.a(n, t) * ck(t) + dk(t)));
        };
        SupResult m = grid_min(resid, ode.t0, ode.horizon, 2048);
        if (m.value < -1e-9) throw HypothesisViolation(lab("(2)"), m.arg);
    }

    auto abs_c_sum = [&split](double t) {
        double acc = 0.0;
        for (const auto& [ck, dk] : split.parts) acc += std::fabs(ck(t));
        return acc;
    };
    const double n_T = std::max(1.0, sup_on_interval(abs_c_sum, ode.t0, T).value);

    // (3) sum d_k u^k >= 0 for u >= N_T, sampled on a geometric ladder plus
    //     the sign of the leading nonzero d_k
    {
        for (int ig = 0; ig <= 512; ++ig) {
            const double t = ode.t0 + (ode.horizon - ode.t0) * ig / 512;
            double u = n_T;
            for (int iu = 0; iu <= 40; ++iu) {
                double acc = 0.0, scale = 0.0;
                for (int k = 2; k <= n - 1; ++k) {
                    const double term =
                        split.parts[static_cast<std::size_t>(k - 2)].second(t) * std::pow(u, k);
                    acc += term;
                    scale = std::max(scale, std::fabs(term));
                }
                if (acc < -1e-9 * std::max(1.0, scale))
                    throw HypothesisViolation(lab("(3)"), t, u);
                u *= 1.25;
            }
        }
        int k_lead = 0;
        for (int k = n - 1; k >= 2; --k) {
            auto absd = [&split, k](double t) {
                return std::fabs(split.parts[static_cast<std::size_t>(k - 2)].second(t));
            };
            if (sup_on_interval(absd, ode.t0, ode.horizon, 512, 0.0).value > 1e-14) {
                k_lead = k;
                break;
            }
        }
        if (k_lead >= 2) {
            auto dlead = [&split, k_lead](double t) {
                return split.parts[static_cast<std::size_t>(k_lead - 2)].second(t);
            };
            SupResult m = grid_min(dlead, ode.t0, ode.horizon, 2048);
            if (m.value < -1e-12) throw HypothesisViolation(lab("(3)"), m.arg);
        }
    }

    auto weights = std::make_shared<LinearWeights>(ode);
    auto W = [weights](double t) { return weights->weighted_a0(t); };
    const double c_T = sup_on_interval(W, ode.t0, T).value;

    auto prefix_n = std::make_shared<detail::PrefixSup>(abs_c_sum, ode.t0, ode.horizon);
    auto prefix_c = std::make_shared<detail::PrefixSup>(W, ode.t0, ode.horizon);

    CandidateFunction cand;
    cand.kind = CandidateKind::EtaStar;
    cand.direction = Direction::Sub;
    cand.n_t = n_T;
    cand.c_t = c_T;
    cand.glue_t = T;
    auto gamma_at = [n_T, T, prefix_n](double t) {
        return t <= T ? n_T : std::max(n_T, std::max(1.0, (*prefix_n)(t)));
    };
    auto c_at = [c_T, T, prefix_c](double t) {
        return t <= T ? c_T : std::max(c_T, (*prefix_c)(t));
    };
    cand.eval = [weights, gamma_at, c_at](double t) {
        return gamma_at(t) +
               std::exp(-weights->a1_integral(t)) * (c_at(t) - weights->weighted_a0(t));
    };
    cand.deriv = [ode, cand_eval = cand.eval, gamma_at](double t) {
        return -ode.a(1, t) * (cand_eval(t) - gamma_at(t)) - ode.a(0, t);
    };
    return cand;
}

// Super-solution mirror of eta*: built on the sign-flipped equation and negated.
inline CandidateFunction build_zeta_star(const PolyODE& ode, double T,
                                         const CoefficientSplit& split) {
    if (ode.n % 2 == 0) throw HypothesisViolation("(L)", ode.t0);
    PolyODE flipped = ode.sign_flipped();
    CoefficientSplit fsplit = split.sign_flipped();
    CandidateFunction inner;
    try {
        inner = build_eta_star(flipped, T, fsplit, "~");
    } catch (const HypothesisViolation& hv) {
        if (hv.condition == "~(3)") throw HypothesisViolation("(K)", hv.witness_t, hv.witness_u);
        if (!hv.condition.empty() && hv.condition.front() == '~')
            throw HypothesisViolation(hv.condition.substr(1), hv.witness_t, hv.witness_u);
        throw;
    }
    CandidateFunction cand;
    cand.kind = CandidateKind::ZetaStar;
    cand.direction = Direction::Super;
    cand.n_t = inner.n_t;
    cand.c_t = inner.c_t;
    cand.glue_t = T;
    cand.eval = [e = inner.eval](double t) { return -e(t); };
    cand.deriv = [d = inner.deriv](double t) { return -d(t); };
    return cand;
}

// Nonnegative sub solution from the linear part:
//   eta_c(t) = exp{-A1(t)} [ c - W(t) ],  c >= max W.
inline CandidateFunction build_eta_c(const PolyODE& ode, double c) {
    if (ode.n < 2) throw HypothesisViolation("(4)", ode.t0);
    auto weights = std::make_shared<LinearWeights>(ode);
    auto W = [weights](double t) { return weights->weighted_a0(t); };
    SupResult cmin = sup_on_interval(W, ode.t0, ode.horizon, 4096, 0.0);
    if (c < cmin.value - 1e-12 * std::max(1.0, std::fabs(cmin.value)))
        throw HypothesisViolation("(5) c lower bound", cmin.arg);

    auto eval = [weights, c](double t) {
        return std::exp(-weights->a1_integral(t)) * (c - weights->weighted_a0(t));
    };

    {
        auto a2 = [&ode](double t) { return ode.a(2, t); };
        SupResult m = grid_min(a2, ode.t0, ode.horizon, 2048);
        if (m.value <= 1e-12) throw HypothesisViolation("(4)", m.arg);
    }
    {
        auto margin = [&ode, &eval](double t) {
            double acc = 0.0;
            const double e = std::max(0.0, eval(t));
            double p = 1.0;
            for (int k = 3; k <= ode.n; ++k) {
                p *= e;  // eta_c^{k-2}
                acc += std::fabs(ode.a(k, t)) * p;
            }
            return ode.a(2, t) - acc;
        };
        SupResult m = grid_min(margin, ode.t0, ode.horizon, 2048);
        if (m.value < -1e-12) throw HypothesisViolation("(5)", m.arg);
    }

    CandidateFunction cand;
    cand.kind = CandidateKind::EtaC;
    cand.direction = Direction::Sub;
    cand.c_t = c;
    cand.eval = eval;
    cand.deriv = [ode, eval](double t) { return -ode.a(1, t) * eval(t) - ode.a(0, t); };
    return cand;
}

// Smallest admissible c for eta_c: the sup of W over the working interval.
inline double eta_c_min_level(const PolyODE& ode) {
    LinearWeights weights(ode);
    auto W = [&weights](double t) { return weights.weighted_a0(t); };
    return sup_on_interval(W, ode.t0, ode.horizon, 4096, 0.0).value;
}

inline CandidateFunction build_eta_c(const PolyODE& ode) {
    return build_eta_c(ode, eta_c_min_level(ode));
}

enum class ThetaSign { Plus, Minus };

// The raw theta function (no admissibility checks): a solution of
// theta' - alpha(t) theta + a_0(t) = 0 with alpha = sum_{k>=2} |a_k| - a_1.
inline CandidateFunction build_theta_unchecked(const PolyODE& ode, double c, ThetaSign sign) {
    auto alpha = [ode](double t) {
        double acc = 0.0;
        for (int k = 2; k <= ode.n; ++k) acc += std::fabs(ode.a(k, t));
        return acc - ode.a(1, t);
    };
    // A(t) = int alpha, V(t) = int exp{-A} a_0
    auto sol = std::make_shared<DenseSolution<2>>();
    {
        StepControl ctl;
        ctl.tol = 1e-12;
        auto rhs = [&alpha, &ode](double t, const std::array<double, 2>& y,
                                  std::array<double, 2>& dy) {
            dy[0] = alpha(t);
            dy[1] = std::exp(std::max(-kLogOverflowLimit, std::min(-y[0], kLogOverflowLimit))) *
                    ode.a(0, t);
        };
        rk45_integrate<2>(rhs, ode.t0, {0.0, 0.0}, ode.horizon, ctl, *sol,
                          [](const SolutionNode<2>&, double) { return false; });
    }
    CandidateFunction cand;
    cand.glue_t = ode.horizon;
    cand.c_t = c;
    if (sign == ThetaSign::Plus) {
        cand.kind = CandidateKind::ThetaC;
        cand.direction = Direction::Sub;
        cand.eval = [sol, c](double t) {
            auto y = (*sol)(t);
            return std::exp(y[0]) * (c - y[1]);
        };
    } else {
        cand.kind = CandidateKind::ThetaCMinus;
        cand.direction = Direction::Super;
        cand.eval = [sol, c](double t) {
            auto y = (*sol)(t);
            return -std::exp(y[0]) * (c + y[1]);
        };
    }
    cand.deriv = [ode, alpha, eval = cand.eval](double t) {
        return alpha(t) * eval(t) - ode.a(0, t);
    };
    return cand;
}

// Smallest admissible c for theta (per sign): sup V for Plus, sup(-V) for Minus.
inline double theta_min_level(const PolyODE& ode, ThetaSign sign) {
    auto alpha = [&ode](double t) {
        double acc = 0.0;
        for (int k = 2; k <= ode.n; ++k) acc += std::fabs(ode.a(k, t));
        return acc - ode.a(1, t);
    };
    DenseSolution<2> sol;
    StepControl ctl;
    ctl.tol = 1e-12;
    auto rhs = [&alpha, &ode](double t, const std::array<double, 2>& y,
                              std::array<double, 2>& dy) {
        dy[0] = alpha(t);
        dy[1] = std::exp(std::max(-kLogOverflowLimit, std::min(-y[0], kLogOverflowLimit))) *
                ode.a(0, t);
    };
    rk45_integrate<2>(rhs, ode.t0, {0.0, 0.0}, ode.horizon, ctl, sol,
                      [](const SolutionNode<2>&, double) { return false; });
    auto V = [&sol, sign](double t) {
        const double v = sol(t)[1];
        return sign == ThetaSign::Plus ? v : -v;
    };
    return sup_on_interval(V, ode.t0, ode.horizon, 4096, 0.0).value;
}

// Checked variant: enforces the admissible c range and the unit bound.
inline CandidateFunction build_theta(const PolyODE& ode, double c, ThetaSign sign) {
    const double cmin = theta_min_level(ode, sign);
    if (c < cmin - 1e-12 * std::max(1.0, std::fabs(cmin)))
        throw HypothesisViolation("c lower bound", ode.t0);
    CandidateFunction cand = build_theta_unchecked(ode, c, sign);
    if (sign == ThetaSign::Plus) {
        SupResult smax = sup_on_interval(cand.eval, ode.t0, ode.horizon, 4096, 0.0);
        if (smax.value > 1.0 + 1e-12) throw HypothesisViolation("theta <= 1", smax.arg);
    } else {
        SupResult smag = sup_on_interval(
            [&cand](double t) { return std::fabs(cand.eval(t)); }, ode.t0, ode.horizon, 4096,
            0.0);
        if (smag.value > 1.0 + 1e-12) throw HypothesisViolation("|theta-| <= 1", smag.arg);
    }
    return cand;
}

inline CandidateFunction build_theta(const PolyODE& ode, ThetaSign sign) {
    return build_theta(ode, theta_min_level(ode, sign), sign);
}

// Non-glued comparison candidate gamma + exp{-A1} [c(T) - W] on [t0, T];
// identical to eta* with the level shifted from N_T to gamma.
inline CandidateFunction build_eta_gamma(const PolyODE& ode, double gamma, double T) {
    auto weights = std::make_shared<LinearWeights>(ode);
    auto W = [weights](double t) { return weights->weighted_a0(t); };
    const double c_T = sup_on_interval(W, ode.t0, T).value;
    CandidateFunction cand;
    cand.kind = CandidateKind::EtaStar;
    cand.direction = Direction::Sub;
    cand.c_t = c_T;
    cand.glue_t = T;
    cand.eval = [weights, gamma, c_T](double t) {
        return gamma + std::exp(-weights->a1_integral(t)) * (c_T - weights->weighted_a0(t));
    };
    cand.deriv = [ode, cand_eval = cand.eval, gamma](double t) {
        return -ode.a(1, t) * (cand_eval(t) - gamma) - ode.a(0, t);
    };
    return cand;
}

// ---------------------------------------------------------------------------
// verification of the defining inequality on a grid

struct Margin {
    double value;      // min signed residual; pass iff >= -1e-8
    double witness_t;  // where the minimum is attained
};

inline Margin verify_differential_inequality(const CandidateFunction& cand, const PolyODE& ode,
                                             double lo, double hi, int grid_n = 2048) {
    const double h_fd = (hi - lo) / (10.0 * grid_n);
    auto deriv_at = [&](double t) {
        if (cand.deriv) return cand.deriv(t);
        const double tl = std::max(lo, t - h_fd), tr = std::min(hi, t + h_fd);
        return (cand.eval(tr) - cand.eval(tl)) / (tr - tl);
    };
    Margin m{std::numeric_limits<double>::infinity(), lo};
    for (int i = 0; i <= grid_n; ++i) {
        const double t = lo + (hi - lo) * i / grid_n;
        const double y = cand.eval(t);
        double acc = 0.0;
        for (int k = ode.n; k >= 0; --k) acc = acc * y + ode.a(k, t);
        double resid = deriv_at(t) + acc;
        if (cand.direction == Direction::Super) resid = -resid;
        if (resid < m.value) { m.value = resid; m.witness_t = t; }
    }
    return m;
}

}  // namespace polyode
