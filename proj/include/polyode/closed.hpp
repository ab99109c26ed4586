#pragma once

// Closed solutions y(t0) = y(T) located as fixed points of the end map
// gamma -> y(T; t0, gamma), which is strictly monotone in gamma by scalar
// trajectory non-crossing. The search is bisection with secant acceleration
// inside a sign bracket of g(gamma) = end_map(gamma) - gamma; isolation is
// certified through the accumulated linearization exponent along the orbit.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyode/integrate.hpp"
#include "polyode/ode.hpp"
#include "polyode/quadrature.hpp"

namespace polyode {

struct BracketInvalid : std::runtime_error {
    double g_lo, g_hi;
    BracketInvalid(const std::string& what, double lo, double hi)
        : std::runtime_error(what), g_lo(lo), g_hi(hi) {}
};

struct BlowUpInsideBracket : std::runtime_error {
    double gamma;
    explicit BlowUpInsideBracket(double g)
        : std::runtime_error("trajectory escaped for probed initial value " +
                             std::to_string(g)),
          gamma(g) {}
};

inline std::optional<double> end_map(const PolyODE& ode, double gamma, double tol) {
    Trajectory t = integrate(ode, ode.t0, gamma, ode.horizon, tol);
    if (t.status == Trajectory::Status::BlowUp) return std::nullopt;
    if (t.status == Trajectory::Status::DomainError)
        throw std::runtime_error("end_map: coefficient evaluation failed at t=" +
                                 std::to_string(t.t_escape));
    return t(ode.horizon);
}

struct ClosedSolutionResult {
    double gamma_star = 0.0;
    double residual = 0.0;  // |end_map(gamma*) - gamma*|
    Trajectory trajectory;
    std::optional<double> isolation_exp;  // linearization exponent E, when finite
    bool isolated = false;                // certified via the sign block and a_1 mass
    std::pair<double, double> bracket_used{0.0, 0.0};
    std::string note;
};

// E = int_{t0}^{T} [ sum_{k=2}^n a_k k y*^{k-1} + a_1 ] dtau: the end-map
// difference of two nearby closed orbits contracts by exp(-E).
inline QuadResult isolation_exponent(const PolyODE& ode, const Trajectory& closed) {
    DenseSolution<1> sol;
    StepControl ctl;
    ctl.tol = 1e-12;
    bool bad = false;
    auto rhs = [&ode, &closed](double t, const std::array<double, 1>&,
                               std::array<double, 1>& dy) {
        const double y = closed(t);
        double acc = ode.a(1, t);
        double p = 1.0;
        for (int k = 2; k <= ode.n; ++k) {
            p *= y;
            acc += ode.a(k, t) * static_cast<double>(k) * p;
        }
        dy[0] = acc;
    };
    auto halt = [&bad](const SolutionNode<1>& n, double) {
        if (!std::isfinite(n.y[0]) || std::fabs(n.y[0]) > 1e300) {
            bad = true;
            return true;
        }
        return false;
    };
    rk45_integrate<1>(rhs, ode.t0, {0.0}, ode.horizon, ctl, sol, halt);
    if (bad) return {0.0, true};
    return {sol(ode.horizon)[0], false};
}

namespace closed_detail {

// isolation verdict per the certified route: the quadratic-and-up block has
// nonnegative signs and the linear coefficient has positive mass
inline bool isolation_certificate(const PolyODE& ode, double exponent, double tol = 1e-9) {
    if (exponent <= tol) return false;
    for (int k = 2; k <= ode.n; ++k) {
        for (int i = 0; i <= 512; ++i) {
            const double t = ode.t0 + (ode.horizon - ode.t0) * i / 512;
            if (ode.a(k, t) < -1e-9) return false;
        }
    }
    PrefixIntegral a1int([&ode](double t) { return ode.a(1, t); }, ode.t0, ode.horizon, 1e-10);
    return a1int(ode.horizon) > tol;
}

inline ClosedSolutionResult finish(const PolyODE& ode, double gamma, double integration_tol,
                                   std::pair<double, double> bracket, std::string note = "") {
    ClosedSolutionResult r;
    r.gamma_star = gamma;
    r.trajectory = integrate(ode, ode.t0, gamma, ode.horizon, integration_tol);
    if (!r.trajectory.reached_end()) throw BlowUpInsideBracket(gamma);
    r.residual = std::fabs(r.trajectory(ode.horizon) - gamma);
    QuadResult e = isolation_exponent(ode, r.trajectory);
    if (!e.overflowed) {
        r.isolation_exp = e.value;
        r.isolated = isolation_certificate(ode, e.value);
    }
    r.bracket_used = bracket;
    r.note = std::move(note);
    return r;
}

}  // namespace closed_detail

// Bracketed fixed-point search. Accepts the downward bracket
// g(lo) >= -tol >= ... >= g(hi) and its upward mirror.
inline ClosedSolutionResult find_closed(const PolyODE& ode, std::pair<double, double> bracket,
                                        double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("find_closed: tol must be positive");
    double a = bracket.first, b = bracket.second;
    if (a > b) throw std::invalid_argument("find_closed: bracket must be ordered");
    const double itol = std::min(tol, 1e-10) * 0.01;

    auto g = [&](double gamma) -> std::optional<double> {
        auto v = end_map(ode, gamma, itol);
        if (!v) return std::nullopt;
        return *v - gamma;
    };

    auto ga = g(a), gb = g(b);
    if (!ga || !gb)
        throw BracketInvalid("bracket endpoint trajectory escaped", a, b);

    // degenerate bracket: every probe is already a fixed point
    {
        bool flat = std::fabs(*ga) <= tol && std::fabs(*gb) <= tol;
        for (int i = 1; i < 7 && flat; ++i) {
            auto gi = g(a + (b - a) * i / 7);
            flat = gi && std::fabs(*gi) <= tol;
        }
        if (flat)
            return closed_detail::finish(ode, a, itol, bracket, "continuum suspected");
    }

    int sense;  // +1: g decreasing through zero; -1: increasing
    if (*ga >= -tol && *gb <= tol) sense = +1;
    else if (*ga <= tol && *gb >= -tol) sense = -1;
    else
        throw BracketInvalid("end-map offsets do not bracket a fixed point", *ga, *gb);

    double fa = *ga, fb = *gb;
    double best_g = std::fabs(fa) <= std::fabs(fb) ? a : b;
    double best_f = std::min(std::fabs(fa), std::fabs(fb));

    for (int it = 0; it < 200 && best_f > tol; ++it) {
        double x;
        // secant proposal on even iterations, plain midpoint on odd ones so
        // the bracket provably halves every other step
        if (it % 2 == 0 && std::fabs(fb - fa) > 1e-300) {
            x = b - fb * (b - a) / (fb - fa);
            const double m = 0.025 * (b - a);
            x = std::clamp(x, a + m, b - m);
        } else {
            x = 0.5 * (a + b);
        }
        if (!(x > a && x < b)) x = 0.5 * (a + b);

        std::optional<double> fx = g(x);
        // escape while probing: shrink toward the endpoint that reached T
        for (int shrink = 0; !fx && shrink < 40; ++shrink) {
            x = 0.5 * (a + x);
            if (!(x > a)) break;
            fx = g(x);
        }
        if (!fx) throw BlowUpInsideBracket(x);

        if ((sense > 0 && *fx >= 0.0) || (sense < 0 && *fx <= 0.0)) {
            a = x;
            fa = *fx;
        } else {
            b = x;
            fb = *fx;
        }
        if (std::fabs(*fx) < best_f) {
            best_f = std::fabs(*fx);
            best_g = x;
        }
        if (b - a <= 1e-15 * std::max(1.0, std::fabs(a))) break;
    }
    return closed_detail::finish(ode, best_g, itol, bracket);
}

struct ScanOutcome {
    std::vector<ClosedSolutionResult> results;
    bool continuum_suspected = false;
    std::vector<double> escaped_probes;  // probes whose trajectories blew up
};

// Probe the end map across a range, launch a bracketed search at every sign
// change or near-zero probe, deduplicate, and sort by gamma.
inline ScanOutcome scan_closed(const PolyODE& ode, std::pair<double, double> range,
                               int n_probe = 64, double tol = 1e-10) {
    if (n_probe < 2) throw std::invalid_argument("scan_closed: need at least two probes");
    const double lo = range.first, hi = range.second;
    if (!(hi > lo)) throw std::invalid_argument("scan_closed: empty range");
    const double itol = std::min(tol, 1e-10) * 0.01;

    ScanOutcome out;
    std::vector<std::optional<double>> gv(static_cast<std::size_t>(n_probe) + 1);
    std::vector<double> gx(static_cast<std::size_t>(n_probe) + 1);
    int valid = 0, flat = 0;
    for (int i = 0; i <= n_probe; ++i) {
        const double x = lo + (hi - lo) * i / n_probe;
        gx[static_cast<std::size_t>(i)] = x;
        auto v = end_map(ode, x, itol);
        if (v) {
            gv[static_cast<std::size_t>(i)] = *v - x;
            ++valid;
            if (std::fabs(*v - x) <= tol) ++flat;
        } else {
            out.escaped_probes.push_back(x);
        }
    }
    if (valid > 0 && flat == valid) {
        out.continuum_suspected = true;
        // deterministic tie-break: report the left-most valid probe
        for (int i = 0; i <= n_probe; ++i)
            if (gv[static_cast<std::size_t>(i)]) {
                out.results.push_back(closed_detail::finish(
                    ode, gx[static_cast<std::size_t>(i)], itol,
                    {gx[static_cast<std::size_t>(i)], gx[static_cast<std::size_t>(i)]},
                    "continuum suspected"));
                break;
            }
        return out;
    }

    for (int i = 0; i < n_probe; ++i) {
        const auto& f0 = gv[static_cast<std::size_t>(i)];
        const auto& f1 = gv[static_cast<std::size_t>(i + 1)];
        if (!f0 || !f1) continue;
        const bool crossing = (*f0 > tol && *f1 < -tol) || (*f0 < -tol && *f1 > tol) ||
                              std::fabs(*f0) <= tol;
        if (!crossing) continue;
        try {
            out.results.push_back(find_closed(
                ode, {gx[static_cast<std::size_t>(i)], gx[static_cast<std::size_t>(i + 1)]},
                tol));
        } catch (const BracketInvalid&) {
        } catch (const BlowUpInsideBracket&) {
        }
    }
    // right endpoint may itself be a fixed point
    if (gv.back() && std::fabs(*gv.back()) <= tol)
        out.results.push_back(closed_detail::finish(ode, gx.back(), itol,
                                                    {gx.back(), gx.back()}));

    // escape-basin boundaries: a separatrix grazing orbit is closed exactly
    // when the end-map offset vanishes as the boundary is approached from the
    // surviving side (a pole at the boundary is filtered by the residual)
    const double boundary_accept = std::max(100.0 * tol, 1e-8);
    for (int i = 0; i < n_probe; ++i) {
        const bool left_ok = gv[static_cast<std::size_t>(i)].has_value();
        const bool right_ok = gv[static_cast<std::size_t>(i + 1)].has_value();
        if (left_ok == right_ok) continue;
        double bad = left_ok ? gx[static_cast<std::size_t>(i + 1)]
                             : gx[static_cast<std::size_t>(i)];
        double good = left_ok ? gx[static_cast<std::size_t>(i)]
                              : gx[static_cast<std::size_t>(i + 1)];
        std::optional<double> g_good = left_ok ? gv[static_cast<std::size_t>(i)]
                                               : gv[static_cast<std::size_t>(i + 1)];
        for (int it = 0; it < 70; ++it) {
            const double mid = 0.5 * (bad + good);
            if (mid == bad || mid == good) break;
            auto v = end_map(ode, mid, itol);
            if (v) {
                good = mid;
                g_good = *v - mid;
            } else {
                bad = mid;
            }
        }
        if (!g_good) continue;
        if (std::fabs(*g_good) <= boundary_accept) {
            // the separatrix itself closes up
            try {
                out.results.push_back(closed_detail::finish(
                    ode, good, itol, {std::min(bad, good), std::max(bad, good)},
                    "basin-boundary orbit"));
            } catch (const BlowUpInsideBracket&) {
            }
            continue;
        }
        // otherwise the boundary anchors one side of a sign bracket against
        // the neighbouring valid probe (repelling orbits hide in the strip
        // between the basin boundary and the probe grid)
        const double neighbour = left_ok ? gx[static_cast<std::size_t>(i)]
                                         : gx[static_cast<std::size_t>(i + 1)];
        const double g_neighbour = left_ok ? *gv[static_cast<std::size_t>(i)]
                                           : *gv[static_cast<std::size_t>(i + 1)];
        if (*g_good * g_neighbour < 0.0) {
            try {
                out.results.push_back(find_closed(
                    ode, {std::min(good, neighbour), std::max(good, neighbour)}, tol));
            } catch (const BracketInvalid&) {
            } catch (const BlowUpInsideBracket&) {
            }
        }
    }

    std::sort(out.results.begin(), out.results.end(),
              [](const ClosedSolutionResult& x, const ClosedSolutionResult& y) {
                  return x.gamma_star < y.gamma_star;
              });
    std::vector<ClosedSolutionResult> dedup;
    for (auto& r : out.results) {
        if (!dedup.empty() && std::fabs(r.gamma_star - dedup.back().gamma_star) <= 10.0 * tol)
            continue;
        dedup.push_back(std::move(r));
    }
    out.results = std::move(dedup);
    return out;
}

// ---------------------------------------------------------------------------
// reflected search: substituting y = -z, t -> -t turns nonpositive closed
// solutions of the original equation into nonnegative ones of the reflected
// equation. Results are mapped back onto the original time axis.

namespace closed_detail {

inline Trajectory map_back(const PolyODE& ode, const Trajectory& z) {
    Trajectory y;
    y.status = z.status;
    y.start_t = ode.t0;
    y.end_t = ode.horizon;
    y.dense.nodes.reserve(z.dense.nodes.size());
    for (auto it = z.dense.nodes.rbegin(); it != z.dense.nodes.rend(); ++it)
        y.dense.nodes.push_back({-it->t, {-it->y[0]}, {it->f[0]}});
    return y;
}

inline ClosedSolutionResult map_back(const PolyODE& ode, ClosedSolutionResult r) {
    r.trajectory = map_back(ode, r.trajectory);
    r.gamma_star = r.trajectory(ode.t0);
    r.bracket_used = {-r.bracket_used.second, -r.bracket_used.first};
    QuadResult e = isolation_exponent(ode, r.trajectory);
    if (!e.overflowed) {
        r.isolation_exp = e.value;
        r.isolated = isolation_certificate(ode, e.value);
    } else {
        r.isolation_exp.reset();
        r.isolated = false;
    }
    return r;
}

}  // namespace closed_detail

inline ClosedSolutionResult find_closed_reflected(const PolyODE& ode,
                                                  std::pair<double, double> z_bracket,
                                                  double tol = 1e-10) {
    PolyODE refl = ode.reflected();
    return closed_detail::map_back(ode, find_closed(refl, z_bracket, tol));
}

inline ScanOutcome scan_closed_reflected(const PolyODE& ode, std::pair<double, double> z_range,
                                         int n_probe = 64, double tol = 1e-10) {
    PolyODE refl = ode.reflected();
    ScanOutcome out = scan_closed(refl, z_range, n_probe, tol);
    for (auto& r : out.results) r = closed_detail::map_back(ode, std::move(r));
    std::sort(out.results.begin(), out.results.end(),
              [](const ClosedSolutionResult& x, const ClosedSolutionResult& y) {
                  return x.gamma_star < y.gamma_star;
              });
    return out;
}

}  // namespace polyode
