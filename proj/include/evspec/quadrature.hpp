#pragma once

// Adaptive Gauss-Kronrod (G7, K15) quadrature on finite intervals, usable
// with real- or complex-valued integrands.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace evspec {

namespace detail {

// K15 abscissae on [0,1] (symmetric) with Kronrod and embedded Gauss weights.
inline constexpr double kGK15Node[8] = {
    0.000000000000000000, 0.207784955007898468, 0.405845151377397167, 0.586087235467691130,
    0.741531185599394440, 0.864864423359769073, 0.949107912342758525, 0.991455371120812639};
inline constexpr double kGK15WK[8] = {
    0.209482141084727828, 0.204432940075298892, 0.190350578064785410, 0.169004726639267903,
    0.140653259715525919, 0.104790010322250184, 0.063092092629978553, 0.022935322010529225};
inline constexpr double kGK15WG[8] = {
    0.417959183673469388, 0.0, 0.381830050505118945, 0.0,
    0.279705391489276668, 0.0, 0.129484966168869693, 0.0};

template <class T>
inline double magnitude(const T& v) {
    return std::abs(v);
}

}  // namespace detail

struct QuadratureResult {
    double error = 0.0;       // final error estimate
    int subdivisions = 0;     // intervals processed
    bool converged = false;
};

// Integrates f over [a, b]; bisects the interval with the worst local error
// estimate until the summed estimate meets abs_tol + rel_tol * |integral|.
template <class F>
auto integrate_gk(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0,
                  int max_subdivisions = 4000, QuadratureResult* info = nullptr)
    -> decltype(f(0.0)) {
    using T = decltype(f(0.0));

    struct Segment {
        double lo, hi, err;
        T val;
    };

    auto rule = [&f](double lo, double hi) -> Segment {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        T k15 = T{};
        T g7 = T{};
        for (int i = 0; i < 8; ++i) {
            const double dx = h * detail::kGK15Node[i];
            const T v = (i == 0) ? f(c) : T(f(c + dx) + f(c - dx));
            k15 += detail::kGK15WK[i] * v;
            if (detail::kGK15WG[i] != 0.0) g7 += detail::kGK15WG[i] * v;
        }
        k15 *= h;
        g7 *= h;
        const double diff = detail::magnitude(T(k15 - g7));
        // QUADPACK-style sharpened estimate
        const double err = diff * std::min(1.0, std::pow(200.0 * diff / std::max(detail::magnitude(k15), 1e-300), 1.5)) +
                           1e-300;
        return {lo, hi, err, k15};
    };

    std::vector<Segment> segs;
    segs.push_back(rule(a, b));
    double total_err = segs[0].err;

    int n = 1;
    for (; n < max_subdivisions; ++n) {
        T total = T{};
        for (const auto& s : segs) total += s.val;
        const double target = abs_tol + rel_tol * detail::magnitude(total);
        if (total_err <= target) break;

        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;

        const Segment old = segs[worst];
        const double mid = 0.5 * (old.lo + old.hi);
        if (mid <= old.lo || mid >= old.hi) break;  // interval exhausted at double precision
        total_err -= old.err;
        segs[worst] = rule(old.lo, mid);
        segs.push_back(rule(mid, old.hi));
        total_err += segs[worst].err + segs.back().err;
    }

    T total = T{};
    for (const auto& s : segs) total += s.val;
    if (info) {
        info->error = total_err;
        info->subdivisions = n;
        info->converged = total_err <= abs_tol + rel_tol * detail::magnitude(total);
    }
    return total;
}

// Integrates g over (0, inf) via tau = u^2 / (1 - u), which absorbs an
// inverse-square-root singularity at 0 and power-law decay at infinity.
template <class F>
auto integrate_positive_axis(F&& g, double rel_tol = 1e-10, double abs_tol = 0.0,
                             int max_subdivisions = 4000, QuadratureResult* info = nullptr)
    -> decltype(g(1.0)) {
    auto h = [&g](double u) {
        const double om = 1.0 - u;
        const double tau = u * u / om;
        const double jac = u * (2.0 - u) / (om * om);
        return decltype(g(1.0))(g(tau) * jac);
    };
    return integrate_gk(h, 0.0, 1.0, rel_tol, abs_tol, max_subdivisions, info);
}

}  // namespace evspec
