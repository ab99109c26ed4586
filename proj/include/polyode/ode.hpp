#pragma once

// The scalar polynomial equation  y' + sum_{k=0}^n a_k(t) y^k = 0  and the
// algebraic kernels shared by every criterion:
//
//   S_k(u,v) = sum_{j=0}^{k-1} u^j v^{k-1-j}      (factors u^k - v^k)
//   D(t,u,v) = sum_{k=1}^n a_k(t) S_k(u,v)
//
// plus the positive-part majorants of D used by the comparison criteria.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polyode/expr.hpp"

namespace polyode {

struct PolyODE {
    int n = 1;                  // degree, >= 1
    std::vector<Expr> coeffs;   // index k -> a_k(t), size n+1
    double t0 = 0.0;
    double horizon = 1.0;       // finite working endpoint, > t0

    PolyODE() = default;
    PolyODE(int degree, std::vector<Expr> c, double t_start, double t_end)
        : n(degree), coeffs(std::move(c)), t0(t_start), horizon(t_end) {
        if (n < 1) throw std::invalid_argument("PolyODE: degree must be >= 1");
        if (coeffs.size() != static_cast<std::size_t>(n) + 1)
            throw std::invalid_argument("PolyODE: need exactly n+1 coefficients");
        if (!(horizon > t0)) throw std::invalid_argument("PolyODE: horizon must exceed t0");
    }

    double a(int k, double t) const { return coeffs[static_cast<std::size_t>(k)](t); }

    // y' = -(a_0 + y (a_1 + y (a_2 + ...)))  evaluated by Horner's scheme.
    double rhs(double t, double y) const {
        double acc = 0.0;
        for (int k = n; k >= 0; --k) acc = acc * y + a(k, t);
        return -acc;
    }

    // Coefficient-flipped equation b_k(t) = (-1)^{k+1} a_k(t); its sub
    // solutions are the negatives of this equation's super solutions.
    PolyODE sign_flipped() const {
        std::vector<Expr> c;
        c.reserve(coeffs.size());
        for (int k = 0; k <= n; ++k)
            c.push_back(k % 2 == 0 ? coeffs[static_cast<std::size_t>(k)].negated()
                                   : coeffs[static_cast<std::size_t>(k)]);
        return PolyODE(n, std::move(c), t0, horizon);
    }

    // Substitution y = -z, t -> -t: z' + sum (-1)^k a_k(-t) z^k = 0 on
    // [-horizon, -t0]. Closed solutions map back via y(t) = -z(-t).
    PolyODE reflected() const {
        std::vector<Expr> c;
        c.reserve(coeffs.size());
        for (int k = 0; k <= n; ++k) {
            Expr e = coeffs[static_cast<std::size_t>(k)].reflected_in_t();
            if (k % 2 == 1) e = e.negated();  // (-1)^k
            c.push_back(std::move(e));
        }
        return PolyODE(n, std::move(c), -horizon, -t0);
    }
};

// S_k(u,v) for k >= 1; satisfies u^k - v^k = (u - v) S_k(u,v).
inline double s_poly(int k, double u, double v) {
    if (k < 1) throw std::invalid_argument("s_poly: k must be >= 1");
    double acc = 0.0;
    double upow = 1.0;
    // sum u^j v^{k-1-j}; build v powers from the top down
    std::vector<double> vpow(static_cast<std::size_t>(k));
    vpow[0] = 1.0;
    for (int j = 1; j < k; ++j) vpow[static_cast<std::size_t>(j)] = vpow[static_cast<std::size_t>(j - 1)] * v;
    for (int j = 0; j < k; ++j) {
        acc += upow * vpow[static_cast<std::size_t>(k - 1 - j)];
        upow *= u;
    }
    return acc;
}

// D(t,u,v) = sum_{k=1}^n a_k(t) S_k(u,v)
inline double d_kernel(const PolyODE& ode, double t, double u, double v) {
    double acc = 0.0;
    for (int k = 1; k <= ode.n; ++k) acc += ode.a(k, t) * s_poly(k, u, v);
    return acc;
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

enum class MajorantMode {
    AllPositiveParts,    // sum_{k>=2} a_k^+(t) S_k(u,v) + a_1(t); needs v >= 0
    EvenPositiveParts,   // even k only; valid for any real v
};

// Nondecreasing-in-u upper bounds for D under the respective sign hypotheses.
inline double d1_majorant(const PolyODE& ode, double t, double u, double v, MajorantMode mode) {
    double acc = ode.a(1, t);
    for (int k = 2; k <= ode.n; ++k) {
        if (mode == MajorantMode::EvenPositiveParts && k % 2 != 0) continue;
        const double ak = positive_part(ode.a(k, t));
        if (ak != 0.0) acc += ak * s_poly(k, u, v);
    }
    return acc;
}

}  // namespace polyode
