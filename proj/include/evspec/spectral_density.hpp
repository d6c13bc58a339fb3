#pragma once

// Limiting spectral density of the elliptic-volatility sample covariance
// ensemble A = X*X/T, T/S -> y, with unit-variance Student(3) volatility.
//
// Three independent evaluation routes are provided:
//   * closed_form_density      - explicit radical expression (y > 1),
//   * quartic_root_oracle      - companion-matrix roots of the quartic the
//                                self-consistent equation squares into,
//   * stieltjes_inversion      - damped fixed-point solve of the equation at
//                                z = x + i*eps with extrapolation eps -> 0.
// The Marchenko-Pastur law serves as the constant-volatility control curve.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evspec/distributions.hpp"
#include "evspec/errors.hpp"
#include "evspec/quadrature.hpp"

namespace evspec {

using Complex = std::complex<double>;

struct AspectRatio {
    double value;
    explicit AspectRatio(double y) : value(y) {
        if (!(y > 0.0)) throw std::domain_error("AspectRatio: y must be positive");
    }
};

// ---------------------------------------------------------------------------
// Support classification

// Cubic G(x; y) = y^3 (x-1)^3 + 3 y^2 (x^2+7x+1) + 3 y (x-1) + 1.
// G > 0 iff x lies strictly inside the continuous support (the quartic below
// then has a unique conjugate pair of complex roots); G = 0 at the edge.
inline double support_cubic(double x, double y) {
    const double xm = x - 1.0;
    return y * y * y * xm * xm * xm + 3.0 * y * y * (x * x + 7.0 * x + 1.0) + 3.0 * y * xm + 1.0;
}

// Left edge of the continuous support: (y^(1/3) - 1)^3 / y.
inline double spectral_edge(double y) {
    if (!(y > 0.0)) throw std::domain_error("spectral_edge: y must be positive");
    const double c = std::cbrt(y) - 1.0;
    return c * c * c / y;
}

// Large-x tail constant c(y): rho(x) ~ c(y) * x^(-5/2) with c(y) = 2/(pi sqrt(y)).
inline double tail_asymptote(AspectRatio y) { return 2.0 / (M_PI * std::sqrt(y.value)); }

// ---------------------------------------------------------------------------
// Closed form

// Quantities entering the closed form: the depressed quartic s^4+As^2+Bs+C,
// the real root w_star of its resolvent cubic (2w-A)(w^2-C)-B^2/4, computed
// through the auxiliary radical q, and R+- = +-2 w_star - A.
struct QuarticIntermediates {
    double q;
    double w_star;
    double A;
    double B;
    double C;
    double R_plus;
    double R_minus;
};

inline QuarticIntermediates quartic_intermediates(double x, double y) {
    const double G = support_cubic(x, y);
    if (!(G > 0.0))
        throw std::domain_error("quartic_intermediates: x is not strictly inside the support");
    const double xm = x - 1.0;
    const double xm2 = xm * xm, xm3 = xm2 * xm, xm4 = xm2 * xm2, xm6 = xm3 * xm3;
    const double xp = x + 1.0, xp2 = xp * xp;
    const double x2 = x * x, x3 = x2 * x, x4 = x2 * x2;
    const double y2 = y * y, y3 = y2 * y, y4 = y2 * y2, y5 = y4 * y, y6 = y3 * y3;

    const double q = y6 * xm6 + 6.0 * y5 * xm3 * (x2 + 4.0 * x + 1.0) +
                     3.0 * y4 * (5.0 * x4 + 16.0 * x3 + 30.0 * x2 + 16.0 * x + 5.0) +
                     3.0 * y2 * (5.0 * x2 + 2.0 * x + 5.0) +
                     4.0 * y3 * (6.0 * x * std::sqrt(x) * std::sqrt(3.0 * G) + 5.0 * x3 + 12.0 * x2 - 12.0 * x - 5.0) +
                     6.0 * y * xm + 1.0;
    const double cq = std::cbrt(q);  // real cube root, signed
    if (cq == 0.0) throw numerical_error("quartic_intermediates: vanishing cube-root radical");

    const double num = y4 * xm4 + 4.0 * y3 * (x3 + 3.0 * x2 - 3.0 * x - 1.0) + 6.0 * y2 * xp2 +
                       4.0 * y * xm + 1.0;
    const double w_star =
        (-y2 * (x2 + 10.0 * x + 1.0) + 2.0 * cq - 2.0 * y * xm - 1.0 + 2.0 * num / cq) / (12.0 * x2);

    const double A = -(y2 * (x2 + 10.0 * x + 1.0) + 2.0 * y * xm + 1.0) / (2.0 * x2);
    const double B = -4.0 * y3 * (1.0 + x) / x2;
    const double C = (y4 * xp2 * (x2 - 14.0 * x + 1.0) + 4.0 * y3 * xm * xp2 + 6.0 * y2 * xp2 +
                      4.0 * y * xm + 1.0) /
                     (16.0 * x4);

    return {q, w_star, A, B, C, 2.0 * w_star - A, -2.0 * w_star - A};
}

// Density via the explicit solution of the quartic: (1/2pi) sqrt(-R- - 2B/sqrt(R+)).
// Returns 0 outside the support. Valid for y > 1; residual checks guard the
// radical construction and raise numerical_error instead of returning garbage.
inline double closed_form_density(double x, AspectRatio y) {
    if (!(y.value > 1.0))
        throw std::domain_error("closed_form_density: closed form established only for y > 1");
    if (!(x > 0.0) || support_cubic(x, y.value) <= 0.0) return 0.0;

    const QuarticIntermediates in = quartic_intermediates(x, y.value);

    const double t1 = (2.0 * in.w_star - in.A) * (in.w_star * in.w_star - in.C);
    const double t2 = 0.25 * in.B * in.B;
    const double scale = std::max({1.0, std::fabs(t1), std::fabs(t2)});
    if (std::fabs(t1 - t2) > 1e-9 * scale) {
        std::ostringstream msg;
        msg << "closed_form_density: resolvent-cubic residual " << std::fabs(t1 - t2) / scale
            << " at x=" << x << ", y=" << y.value;
        throw numerical_error(msg.str());
    }
    if (!(in.R_plus > 0.0)) {
        std::ostringstream msg;
        msg << "closed_form_density: nonpositive R+ at x=" << x << ", y=" << y.value;
        throw numerical_error(msg.str());
    }

    double arg = -in.R_minus - 2.0 * in.B / std::sqrt(in.R_plus);
    if (arg < -1e-9) {
        std::ostringstream msg;
        msg << "closed_form_density: radicand " << arg << " at x=" << x << ", y=" << y.value;
        throw numerical_error(msg.str());
    }
    arg = std::max(arg, 0.0);  // cancellation right at the edge
    return std::sqrt(arg) / (2.0 * M_PI);
}

// ---------------------------------------------------------------------------
// Quartic-root oracle

// Coefficients (ascending powers of s) of the quartic obtained by squaring
// the self-consistent equation at z = x:
//   Q(s) = (4 s (s z + 1)^2) / y - (s - (s/y + 1)(s z + 1))^2.
inline std::array<double, 5> quartic_coefficients(double x, double y) {
    const double u2 = x / y;                // s - (s/y+1)(sz+1) = -u2 s^2 + u1 s - 1
    const double u1 = 1.0 - 1.0 / y - x;
    return {
        -1.0,
        4.0 / y + 2.0 * u1,
        6.0 * x / y - u1 * u1,
        4.0 * x * x / y + 2.0 * u2 * u1,
        -u2 * u2,
    };
}

// Residual of the un-squared self-consistent equation under the principal
// square root: | 1/s + z - (1 + sqrt(s/y))^(-2) |.
inline double stieltjes_equation_residual(Complex s, Complex z, double y) {
    const Complex den = 1.0 + std::sqrt(s / y);
    return std::abs(1.0 / s + z - 1.0 / (den * den));
}

// Density via companion-matrix roots of the squared equation. Roots are kept
// only if they lie in the upper half plane and satisfy the un-squared
// equation (squaring introduces spurious real solutions). Exactly one root
// may qualify; zero qualifying roots means x is outside the support.
inline double quartic_root_oracle(double x, AspectRatio y) {
    if (x <= 0.0) return 0.0;

    const auto c = quartic_coefficients(x, y.value);
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    companion(1, 0) = companion(2, 1) = companion(3, 2) = 1.0;
    for (int i = 0; i < 4; ++i) companion(i, 3) = -c[i] / c[4];

    const Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw numerical_error("quartic_root_oracle: companion eigensolver failed");

    int qualifying = 0;
    Complex root;
    for (int i = 0; i < 4; ++i) {
        const Complex s = solver.eigenvalues()(i);
        if (s.imag() <= 1e-9 * std::max(1.0, std::abs(s))) continue;
        if (stieltjes_equation_residual(s, Complex(x, 0.0), y.value) > 1e-6) continue;
        ++qualifying;
        root = s;
    }
    if (qualifying > 1) {
        std::ostringstream msg;
        msg << "quartic_root_oracle: " << qualifying
            << " upper-half-plane roots satisfy the equation at x=" << x << ", y=" << y.value;
        throw numerical_error(msg.str());
    }
    return qualifying == 1 ? root.imag() / M_PI : 0.0;
}

// ---------------------------------------------------------------------------
// Marchenko-Pastur reference (variance 1)

// Density of the absolutely continuous MP part with edges (1 +- sqrt(ratio))^2.
// For ratio > 1 the law also carries an atom at 0; see mp_atom_at_zero.
inline double mp_density(double x, double ratio) {
    if (!(ratio > 0.0)) throw std::domain_error("mp_density: ratio must be positive");
    const double r = std::sqrt(ratio);
    const double lo = (1.0 - r) * (1.0 - r);
    const double hi = (1.0 + r) * (1.0 + r);
    if (!(x > lo) || !(x < hi) || x <= 0.0) return 0.0;
    return std::sqrt((hi - x) * (x - lo)) / (2.0 * M_PI * ratio * x);
}

inline double mp_atom_at_zero(double ratio) {
    if (!(ratio > 0.0)) throw std::domain_error("mp_atom_at_zero: ratio must be positive");
    return std::max(0.0, 1.0 - 1.0 / ratio);
}

// Stieltjes transform of the MP law, branch with Im m > 0 for Im z > 0.
inline Complex mp_stieltjes(Complex z, double ratio) {
    const double c = ratio;
    const Complex d = z - (1.0 + c);
    Complex w = std::sqrt(d * d - 4.0 * c);
    Complex m = ((1.0 - c) - z + w) / (2.0 * c * z);
    if (m.imag() <= 0.0) m = ((1.0 - c) - z - w) / (2.0 * c * z);
    return m;
}

// ---------------------------------------------------------------------------
// Stieltjes fixed-point inversion

// A solved point of the self-consistent equation 1/s + z = E[tau/(1 + tau s/y)]
// for the squared-volatility law, with Im z > 0 and Im s > 0.
struct StieltjesPoint {
    Complex z;
    Complex s;
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

// Right-hand side E[tau / (1 + tau s / y)] of the self-consistent equation.
inline Complex volatility_transform(Complex s, double y, const VolatilityModel& vol) {
    switch (vol.kind) {
        case VolatilityModel::Kind::StudentRenormalised:
            if (vol.nu == 3.0) {
                const Complex den = 1.0 + std::sqrt(s / y);
                return 1.0 / (den * den);
            }
            return integrate_positive_axis(
                [&](double tau) { return tau * h_nu_pdf(vol.nu, tau) / (1.0 + tau * s / y); },
                1e-10, 1e-14);
        case VolatilityModel::Kind::Constant: {
            const double v = vol.sigma0 * vol.sigma0;
            return v / (1.0 + v * s / y);
        }
        case VolatilityModel::Kind::StandardNormal:
            // sigma^2 is chi-square(1): density exp(-tau/2)/sqrt(2 pi tau)
            return integrate_positive_axis(
                [&](double tau) {
                    return tau * std::exp(-0.5 * tau) / std::sqrt(2.0 * M_PI * tau) /
                           (1.0 + tau * s / y);
                },
                1e-10, 1e-14);
    }
    return Complex{};  // unreachable
}

}  // namespace detail

// Damped fixed-point solve of s = 1/(E[...] - z), started from the
// Marchenko-Pastur value and finished with Newton steps on the residual.
inline StieltjesPoint stieltjes_solve(Complex z, AspectRatio y, const VolatilityModel& vol,
                                      int max_iterations = 10000) {
    if (!(z.imag() > 0.0)) throw std::domain_error("stieltjes_solve: Im z must be positive");
    if (std::fabs(vol.second_moment() - 1.0) > 1e-12)
        throw std::domain_error("stieltjes_solve: volatility law must have unit second moment");

    auto rhs = [&](Complex s) { return detail::volatility_transform(s, y.value, vol); };
    auto residual_of = [&](Complex s) { return std::abs(1.0 / s + z - rhs(s)); };

    Complex s = mp_stieltjes(z, 1.0 / y.value);
    if (!(s.imag() > 0.0)) s = Complex(s.real(), 1e-6);

    constexpr double damping = 0.5;
    int it = 0;
    for (; it < max_iterations; ++it) {
        const Complex next = (1.0 - damping) * s + damping / (rhs(s) - z);
        const double step = std::abs(next - s);
        s = next;
        if (step <= 1e-13 * (1.0 + std::abs(s))) break;
    }

    // Newton polish pushes the residual to roundoff.
    for (int k = 0; k < 8; ++k) {
        const Complex g = 1.0 / s + z - rhs(s);
        if (std::abs(g) <= 1e-13) break;
        const double h = 1e-7 * (1.0 + std::abs(s));
        const Complex gp = (1.0 / (s + h) - rhs(s + h) - (1.0 / (s - h) - rhs(s - h))) / (2.0 * h);
        if (gp == Complex{}) break;
        const Complex candidate = s - g / gp;
        if (!(candidate.imag() > 0.0)) break;
        s = candidate;
    }

    const double resid = residual_of(s);
    if (resid > 1e-10 || !(s.imag() > 0.0)) {
        std::ostringstream msg;
        msg << "stieltjes_solve: no convergence at z=(" << z.real() << "," << z.imag()
            << "), y=" << y.value << "; last residual " << resid;
        throw numerical_error(msg.str());
    }
    return {z, s, resid, it};
}

// Density at x by solving at z = x + i*eps for eps in {1e-2, 1e-3, 1e-4} and
// extrapolating Im s / pi to eps -> 0 (iterated linear extrapolation).
inline double stieltjes_inversion_density(double x, AspectRatio y, const VolatilityModel& vol) {
    if (x <= 0.0) return 0.0;
    constexpr double eps[3] = {1e-2, 1e-3, 1e-4};
    double v[3];
    for (int i = 0; i < 3; ++i)
        v[i] = stieltjes_solve(Complex(x, eps[i]), y, vol).s.imag() / M_PI;

    double t[3] = {v[0], v[1], v[2]};
    double e[3] = {eps[0], eps[1], eps[2]};
    for (int level = 1; level < 3; ++level)
        for (int i = 0; i < 3 - level; ++i)
            t[i] = t[i + 1] + (t[i + 1] - t[i]) * e[i + level] / (e[i] - e[i + level]);
    return std::max(t[0], 0.0);
}

// ---------------------------------------------------------------------------
// Curves over a grid

enum class DensityMethod { ClosedForm, StieltjesInversion, QuarticOracle, MarchenkoPastur };

inline const char* to_string(DensityMethod m) {
    switch (m) {
        case DensityMethod::ClosedForm: return "closed";
        case DensityMethod::StieltjesInversion: return "stieltjes";
        case DensityMethod::QuarticOracle: return "quartic";
        case DensityMethod::MarchenkoPastur: return "mp";
    }
    return "?";
}

struct DensityCurve {
    AspectRatio y;
    std::vector<double> xs;    // strictly increasing
    std::vector<double> rhos;  // nonnegative, same length
    DensityMethod method;
};

// Evaluates the chosen method over the grid. The Marchenko-Pastur method
// draws the constant-volatility control at aspect y, i.e. MP with ratio 1/y.
inline DensityCurve density_curve(AspectRatio y, const std::vector<double>& grid,
                                  DensityMethod method,
                                  const VolatilityModel& vol = VolatilityModel::student(3.0)) {
    if (grid.empty()) throw std::invalid_argument("density_curve: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("density_curve: grid must be strictly increasing");

    DensityCurve curve{y, grid, std::vector<double>(grid.size()), method};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        try {
            switch (method) {
                case DensityMethod::ClosedForm: curve.rhos[i] = closed_form_density(x, y); break;
                case DensityMethod::StieltjesInversion:
                    curve.rhos[i] = stieltjes_inversion_density(x, y, vol);
                    break;
                case DensityMethod::QuarticOracle: curve.rhos[i] = quartic_root_oracle(x, y); break;
                case DensityMethod::MarchenkoPastur:
                    curve.rhos[i] = mp_density(x, 1.0 / y.value);
                    break;
            }
        } catch (const numerical_error& err) {
            std::ostringstream msg;
            msg << "density_curve: failure at grid point x=" << x << ": " << err.what();
            throw numerical_error(msg.str());
        }
    }
    return curve;
}

}  // namespace evspec
