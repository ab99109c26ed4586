#pragma once

// Adaptive embedded Runge-Kutta integration (Dormand-Prince 4(5) pair with
// PI step control) for the scalar equation and for the small augmented
// systems the quadrature layer builds. Dense output is cubic Hermite on
// accepted steps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "polyode/ode.hpp"

namespace polyode {

namespace detail {

// Dormand-Prince RKF45 tableau.
struct Dopri5 {
    static constexpr int stages = 7;
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    // 5th order solution weights (same as the last a-row, FSAL)
    static constexpr double b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                     -2187.0 / 6784, 11.0 / 84, 0.0};
    // 4th order embedded weights
    static constexpr double b4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

}  // namespace detail

// One accepted node of a solution: state and derivative, enough for a cubic
// Hermite interpolant on each step.
template <std::size_t N>
struct SolutionNode {
    double t;
    std::array<double, N> y;
    std::array<double, N> f;
};

template <std::size_t N>
class DenseSolution {
  public:
    std::vector<SolutionNode<N>> nodes;

    double front_t() const { return nodes.front().t; }
    double back_t() const { return nodes.back().t; }

    std::array<double, N> operator()(double t) const {
        if (nodes.size() == 1) return nodes.front().y;
        // clamp to the covered range
        if (t <= nodes.front().t) return nodes.front().y;
        if (t >= nodes.back().t) return nodes.back().y;
        auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                                   [](double v, const SolutionNode<N>& n) { return v < n.t; });
        const SolutionNode<N>& hi = *it;
        const SolutionNode<N>& lo = *(it - 1);
        const double h = hi.t - lo.t;
        if (h <= 0.0) return lo.y;
        const double s = (t - lo.t) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        std::array<double, N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = h00 * lo.y[i] + h * h10 * lo.f[i] + h01 * hi.y[i] + h * h11 * hi.f[i];
        return out;
    }

    double component(double t, std::size_t i) const { return (*this)(t)[i]; }
};

enum class StepOutcome { Completed, Halted };

struct StepControl {
    double tol = 1e-10;
    long max_steps = 4000000;
};

// Raised when the state cannot be advanced even at the machine-scale step:
// the stage values overflow, which for smooth coefficients means the state
// left every bounded region between two nodes.
template <std::size_t N>
struct StateEscaped {
    double t;
    std::array<double, N> y;
    std::array<double, N> f;
};

// Generic adaptive driver. `f` fills dy from (t, y); may throw EvalError.
// `halt` inspects each accepted node (with the accepted step size) and may
// stop the run early.
template <std::size_t N, typename F, typename Halt>
StepOutcome rk45_integrate(F&& f, double t0, std::array<double, N> y0, double t1,
                           const StepControl& ctl, DenseSolution<N>& out, Halt&& halt) {
    using Tab = detail::Dopri5;
    const double span = t1 - t0;
    if (!(span > 0.0)) throw std::invalid_argument("rk45: end time must exceed start time");
    const double h_eps = span * std::numeric_limits<double>::epsilon() * 16;

    std::array<double, N> y = y0;
    std::array<double, N> k[Tab::stages];
    double t = t0;
    f(t, y, k[0]);
    out.nodes.clear();
    out.nodes.push_back({t, y, k[0]});
    if (halt(out.nodes.back(), h_eps)) return StepOutcome::Halted;

    double h = span / 100.0;
    double err_prev = 1.0;
    long steps = 0;
    bool fsal_valid = true;

    while (t < t1) {
        if (++steps > ctl.max_steps)
            throw std::runtime_error("rk45: step limit exceeded");
        h = std::min(h, t1 - t);
        bool forced = false;
        if (h < h_eps) { h = std::min(h_eps, t1 - t); forced = true; }

        if (!fsal_valid) f(t, y, k[0]);
        std::array<double, N> ytmp;
        bool stage_ok = true;
        for (int s = 1; s < Tab::stages; ++s) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j) acc += Tab::a[s][j] * k[j][i];
                ytmp[i] = y[i] + h * acc;
            }
            for (std::size_t i = 0; i < N; ++i)
                if (!std::isfinite(ytmp[i])) { stage_ok = false; break; }
            if (!stage_ok) break;
            f(t + Tab::c[s] * h, ytmp, k[s]);
        }

        double err = std::numeric_limits<double>::infinity();
        std::array<double, N> y5{};
        if (stage_ok) {
            err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double acc5 = 0.0, acc4 = 0.0;
                for (int s = 0; s < Tab::stages; ++s) {
                    acc5 += Tab::b5[s] * k[s][i];
                    acc4 += Tab::b4[s] * k[s][i];
                }
                y5[i] = y[i] + h * acc5;
                const double sc = ctl.tol + ctl.tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
                const double ratio = std::fabs(h * (acc5 - acc4)) / sc;
                // a non-finite estimate must reject the step, never slip
                // through the max
                if (!std::isfinite(y5[i]) || !std::isfinite(ratio)) {
                    err = std::numeric_limits<double>::infinity();
                    break;
                }
                err = std::max(err, ratio);
            }
        }

        if (err <= 1.0 || forced) {
            bool y5_ok = stage_ok;
            for (std::size_t i = 0; i < N && y5_ok; ++i)
                if (!std::isfinite(y5[i])) y5_ok = false;
            if (!y5_ok) throw StateEscaped<N>{t, y, k[0]};
            t += h;
            y = y5;
            k[0] = k[Tab::stages - 1];  // FSAL
            fsal_valid = true;
            out.nodes.push_back({t, y, k[0]});
            if (halt(out.nodes.back(), h)) return StepOutcome::Halted;
            const double e = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            err_prev = e;
            h *= fac;
        } else {
            fsal_valid = true;  // k[0] still matches (t, y)
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
    return StepOutcome::Completed;
}

// ---------------------------------------------------------------------------
// scalar trajectories with blow-up detection

struct Trajectory {
    enum class Status { ReachedEnd, BlowUp, DomainError };

    Status status = Status::ReachedEnd;
    double t_escape = 0.0;  // BlowUp: last accepted t; DomainError: failure t
    DenseSolution<1> dense;
    double start_t = 0.0, end_t = 0.0;

    bool reached_end() const { return status == Status::ReachedEnd; }
    double operator()(double t) const { return dense(t)[0]; }
    double last_t() const { return dense.back_t(); }
    double last_y() const { return dense.nodes.back().y[0]; }

    std::vector<std::pair<double, double>> samples() const {
        std::vector<std::pair<double, double>> out;
        out.reserve(dense.nodes.size());
        for (const auto& n : dense.nodes) out.emplace_back(n.t, n.y[0]);
        return out;
    }
};

inline constexpr double kEscapeThreshold = 1e8;
inline constexpr double kMinStepFraction = 1e-12;

// Integrate from (start_t, y0) to end_t. Declares BlowUp when |y| exceeds the
// escape threshold while the accepted step has collapsed below the floor
// 1e-12*(horizon - t0), which separates finite-time escape from stiffness.
inline Trajectory integrate(const PolyODE& ode, double start_t, double y0, double end_t,
                            double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("integrate: tol must be positive");
    Trajectory traj;
    traj.start_t = start_t;
    traj.end_t = end_t;
    const double floor_h = kMinStepFraction * (ode.horizon - ode.t0);

    StepControl ctl;
    ctl.tol = tol;

    auto f = [&ode](double t, const std::array<double, 1>& y, std::array<double, 1>& dy) {
        dy[0] = ode.rhs(t, y[0]);
    };
    bool blew_up = false;
    double t_last_ok = start_t;
    auto halt = [&](const SolutionNode<1>& node, double h) {
        t_last_ok = node.t;
        if (std::fabs(node.y[0]) > kEscapeThreshold && h <= floor_h) {
            blew_up = true;
            return true;
        }
        return false;
    };

    try {
        rk45_integrate<1>(f, start_t, {y0}, end_t, ctl, traj.dense, halt);
    } catch (const EvalError&) {
        traj.status = Trajectory::Status::DomainError;
        traj.t_escape = t_last_ok;
        return traj;
    } catch (const StateEscaped<1>& esc) {
        // Stage values overflowed at the machine-limit step. Outward motion
        // means finite-time escape; a state collapsing toward the origin this
        // violently is unresolvable stiffness instead.
        if (esc.y[0] * esc.f[0] > 0.0) {
            traj.status = Trajectory::Status::BlowUp;
            traj.t_escape = traj.dense.back_t();
            return traj;
        }
        throw std::runtime_error("integrate: unresolvable contracting layer at t=" +
                                 std::to_string(esc.t));
    }
    if (blew_up) {
        traj.status = Trajectory::Status::BlowUp;
        traj.t_escape = traj.dense.back_t();
    } else {
        traj.status = Trajectory::Status::ReachedEnd;
    }
    return traj;
}

}  // namespace polyode
