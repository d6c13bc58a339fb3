#pragma once

// Test-only oracles, deliberately independent of the library's own numerics:
// an adaptive Simpson integrator, characteristic-polynomial eigenvalues
// (Faddeev-LeVerrier coefficients + Durand-Kerner roots), the explicit
// quartic discriminant, and exact Pareto sample grids.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11, int depth = 60) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Integral over (0, inf) with t = u / (1-u)^2, which keeps power-law tails
// t^(-p), p > 1, bounded after the change of variables.
inline double integrate_positive_axis(const std::function<double(double)>& f, double tol = 1e-11) {
    return integrate(
        [&f](double u) {
            const double om = 1.0 - u;
            const double t = u / (om * om);
            const double jac = (1.0 + u) / (om * om * om);
            return f(t) * jac;
        },
        0.0, 1.0, tol);
}

// ---------------------------------------------------------------------------
// Characteristic-polynomial eigenvalue oracle

// Monic characteristic polynomial coefficients, ascending order, via the
// Faddeev-LeVerrier recurrence.
inline std::vector<double> char_poly(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<double> c(n + 1, 0.0);
    c[n] = 1.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        Eigen::MatrixXd AM = A * M;
        c[n - k] = -AM.trace() / k;
        M = AM + c[n - k] * Eigen::MatrixXd::Identity(n, n);
    }
    return c;
}

// All roots of a polynomial with real coefficients (ascending, monic or not)
// by Durand-Kerner simultaneous iteration.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
    using C = std::complex<double>;
    const int n = static_cast<int>(coeffs.size()) - 1;
    auto eval = [&](C z) {
        C v = coeffs[n];
        for (int i = n - 1; i >= 0; --i) v = v * z + coeffs[i];
        return v;
    };
    std::vector<C> z(n);
    C w(0.4, 0.9);
    C p(1.0, 0.0);
    for (int i = 0; i < n; ++i) {
        p *= w;
        z[i] = p;
    }
    for (int it = 0; it < 1000; ++it) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            C denom = coeffs[n];
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= z[i] - z[j];
            const C delta = eval(z[i]) / denom;
            z[i] -= delta;
            worst = std::max(worst, std::abs(delta) / (1.0 + std::abs(z[i])));
        }
        if (worst < 1e-14) break;
    }
    return z;
}

// Eigenvalues of a symmetric matrix through its characteristic polynomial,
// sorted ascending (imaginary parts of the roots are discarded; they vanish
// for symmetric input up to iteration noise).
inline std::vector<double> charpoly_eigenvalues(const Eigen::MatrixXd& A) {
    std::vector<double> out;
    for (const auto& r : poly_roots(char_poly(A))) out.push_back(r.real());
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Quartic discriminant from the coefficients (ascending: e + dx + cx^2 + bx^3 + ax^4)

inline double quartic_discriminant(double e, double d, double c, double b, double a) {
    return 256 * a * a * a * e * e * e - 192 * a * a * b * d * e * e -
           128 * a * a * c * c * e * e + 144 * a * a * c * d * d * e - 27 * a * a * d * d * d * d +
           144 * a * b * b * c * e * e - 6 * a * b * b * d * d * e - 80 * a * b * c * c * d * e +
           18 * a * b * c * d * d * d + 16 * a * c * c * c * c * e - 4 * a * c * c * c * d * d -
           27 * b * b * b * b * e * e + 18 * b * b * b * c * d * e - 4 * b * b * b * d * d * d -
           4 * b * b * c * c * c * e + b * b * c * c * d * d;
}

// ---------------------------------------------------------------------------
// Exact Pareto(alpha) quantile grid on (1, inf): F(x) = 1 - x^(-alpha)

inline std::vector<double> pareto_grid(double alpha, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        x[i] = std::pow(1.0 - u, -1.0 / alpha);
    }
    return x;
}

// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::max(F - i / n, (i + 1.0) / n - F));
    }
    return d;
}

}  // namespace oracles
