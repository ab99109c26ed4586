#pragma once

// Exponential-weighted integrals of the form
//
//   G(t) = integral_lo^t exp{ integral_lo^tau kernel(s) ds } * weight(tau) dtau
//
// computed by augmenting the quadrature state with the inner integral (one
// adaptive pass, never re-quadrature per sample point), plus the linear
// variation-of-constants residual used as a whole-stack self check.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "polyode/integrate.hpp"
#include "polyode/ode.hpp"

namespace polyode {

using ScalarFn = std::function<double(double)>;

inline constexpr double kLogOverflowLimit = 690.0;

struct QuadResult {
    double value = 0.0;
    bool overflowed = false;
};

// Prefix integral t -> integral_lo^t f(s) ds, queryable at any t in [lo, hi].
class PrefixIntegral {
  public:
    PrefixIntegral(ScalarFn f, double lo, double hi, double tol) {
        StepControl ctl;
        ctl.tol = tol;
        auto rhs = [&f](double t, const std::array<double, 1>&, std::array<double, 1>& dy) {
            dy[0] = f(t);
        };
        rk45_integrate<1>(rhs, lo, {0.0}, hi, ctl, sol_,
                          [](const SolutionNode<1>&, double) { return false; });
    }
    double operator()(double t) const { return sol_(t)[0]; }

  private:
    DenseSolution<1> sol_;
};

// The weighted prefix G(t) together with the inner log-weight L(t).
class WeightedPrefix {
  public:
    WeightedPrefix(ScalarFn kernel, ScalarFn weight, double lo, double hi, double tol)
        : lo_(lo), hi_(hi) {
        StepControl ctl;
        ctl.tol = tol;
        auto rhs = [&kernel, &weight](double t, const std::array<double, 2>& y,
                                      std::array<double, 2>& dy) {
            dy[0] = kernel(t);
            dy[1] = std::exp(std::min(y[0], kLogOverflowLimit)) * weight(t);
        };
        auto halt = [this](const SolutionNode<2>& n, double) {
            if (n.y[0] > kLogOverflowLimit || !std::isfinite(n.y[1])) {
                overflowed_ = true;
                return true;
            }
            return false;
        };
        rk45_integrate<2>(rhs, lo, {0.0, 0.0}, hi, ctl, sol_, halt);
    }

    bool overflowed() const { return overflowed_; }
    double covered_to() const { return sol_.back_t(); }
    double log_weight(double t) const { return sol_(t)[0]; }
    double value(double t) const { return sol_(t)[1]; }

  private:
    double lo_, hi_;
    bool overflowed_ = false;
    DenseSolution<2> sol_;
};

inline QuadResult exp_weighted_integral(const ScalarFn& kernel, const ScalarFn& weight,
                                        double t_lo, double t_hi, double tol) {
    WeightedPrefix wp(kernel, weight, t_lo, t_hi, tol);
    if (wp.overflowed()) return {0.0, true};
    return {wp.value(t_hi), false};
}

// |LHS - RHS| of the variation-of-constants identity relating two
// trajectories: with delta = yA - yB and the forcing sum over coefficient
// differences along yB,
//
//   delta(t) = exp{-int D} [delta(t1) - int exp{int D} sum (a_k - b_k) yB^k].
//
// Both trajectories must cover [start, t] and the equations share degree n.
inline QuadResult cauchy_residual(const PolyODE& odeA, const PolyODE& odeB,
                                  const Trajectory& trajA, const Trajectory& trajB, double t,
                                  double tol = 1e-10) {
    if (odeA.n != odeB.n)
        throw std::invalid_argument("cauchy_residual: equations must share degree");
    const double t1 = std::max(trajA.dense.front_t(), trajB.dense.front_t());
    if (t < t1 || t > trajA.dense.back_t() || t > trajB.dense.back_t())
        throw std::invalid_argument("cauchy_residual: t outside the covered range");

    auto kernel = [&](double tau) {
        return d_kernel(odeA, tau, trajA(tau), trajB(tau));
    };
    auto weight = [&](double tau) {
        const double yb = trajB(tau);
        double acc = 0.0, p = 1.0;
        for (int k = 0; k <= odeA.n; ++k) {
            acc += (odeA.a(k, tau) - odeB.a(k, tau)) * p;
            p *= yb;
        }
        return acc;
    };
    WeightedPrefix wp(kernel, weight, t1, t, tol);
    if (wp.overflowed()) return {0.0, true};
    const double L = wp.log_weight(t);
    if (std::fabs(L) > kLogOverflowLimit) return {0.0, true};
    const double delta0 = trajA(t1) - trajB(t1);
    const double rhs = std::exp(-L) * (delta0 - wp.value(t));
    const double lhs = trajA(t) - trajB(t);
    return {std::fabs(lhs - rhs), false};
}

}  // namespace polyode
