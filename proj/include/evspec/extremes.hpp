#pragma once

// Largest-eigenvalue statistics: the a_T scaling solver, the rescaled maximum
// and its diagonal proxy, the off-diagonal error diagnostic, the infinity-norm
// bound, and the Frechet-band comparison of simulated maxima.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "evspec/distributions.hpp"
#include "evspec/errors.hpp"
#include "evspec/simulator.hpp"

namespace evspec {

// Root of h3_tail(a) = 1/T for the squared unit-variance Student(3) law.
// Monotone bisection on a bracket around the T^(2/3) growth scale; fractional
// T > 1 is accepted so inverse identities can be tested exactly.
inline double solve_a_T(double T) {
    if (!(T > 1.0)) throw std::domain_error("solve_a_T: T must exceed 1");
    const double target = 1.0 / T;
    const double scale = std::pow(T, 2.0 / 3.0);
    double lo = scale / 10.0, hi = scale * 10.0;
    while (h3_tail(lo) < target) lo /= 4.0;   // h3_tail decreases; keep tail(lo) above 1/T
    while (h3_tail(hi) > target) hi *= 4.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (h3_tail(mid) > target ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (std::fabs(h3_tail(root) - target) > 1e-12)
        throw numerical_error("solve_a_T: residual above 1e-12");
    return root;
}

// The limit theorem rescales lambda_max(X X^T) by S * a_T, while Spectrum
// holds eigenvalues of X^T X / T; the bridge is lambda_max(X X^T) = T * max(A).
inline double rescale_max_eig(const Spectrum& spectrum, double a_T) {
    if (spectrum.eigenvalues.empty()) throw std::domain_error("rescale_max_eig: empty spectrum");
    if (!(a_T > 0.0)) throw std::domain_error("rescale_max_eig: a_T must be positive");
    return spectrum.max_eigenvalue() * spectrum.normalization / (spectrum.cols * a_T);
}

// max_t sigma_t^2 ||z_t||^2 / (S a_T); sigma_t^2 ||z_t||^2 is exactly the
// squared norm of row t of X, so zero-volatility rows contribute 0.
inline double diag_proxy(const EVMSample& sample, double a_T) {
    if (!(a_T > 0.0)) throw std::domain_error("diag_proxy: a_T must be positive");
    const double m = sample.X.rowwise().squaredNorm().maxCoeff();
    return m / (sample.X.cols() * a_T);
}

struct OffdiagError {
    double value = 0.0;      // lambda-max norm of X X^T minus its diagonal, over S a_T
    double heuristic = 0.0;  // lower-bound estimate (T/4) / (sqrt(S) a_T)
};

// Off-diagonal part of the row Gram matrix X X^T (T x T, dense); refuses to
// materialize it beyond row_cap.
inline OffdiagError offdiag_error(const EVMSample& sample, double a_T, int row_cap = 4096) {
    if (!(a_T > 0.0)) throw std::domain_error("offdiag_error: a_T must be positive");
    const int T = static_cast<int>(sample.X.rows());
    const int S = static_cast<int>(sample.X.cols());
    if (T > row_cap) {
        std::ostringstream msg;
        msg << "offdiag_error: T=" << T << " exceeds the dense cap " << row_cap;
        throw std::invalid_argument(msg.str());
    }

    OffdiagError out;
    out.heuristic = (T / 4.0) / (std::sqrt(static_cast<double>(S)) * a_T);
    if (T == 1) return out;  // no off-diagonal entries

    Eigen::MatrixXd gram(T, T);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(sample.X, 1.0);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    gram.diagonal().setZero();

    const std::vector<double> lambda = symmetric_eigenvalues(gram);
    const double norm = std::max(std::fabs(lambda.front()), std::fabs(lambda.back()));
    out.value = norm / (static_cast<double>(S) * a_T);
    return out;
}

// Convenience bundle for one replica: everything the error decomposition
// |rescaled - diag_proxy| <= offdiag_norm talks about.
struct MaxEigSample {
    double lambda_max = 0.0;    // of X X^T, unnormalized
    double rescaled = 0.0;      // lambda_max / (S a_T)
    double diag_proxy = 0.0;
    double offdiag_norm = 0.0;
    int rows = 0;
    int cols = 0;
};

inline MaxEigSample max_eig_sample(const EVMSample& sample, double a_T, bool with_offdiag = true,
                                   int row_cap = 4096) {
    MaxEigSample out;
    out.rows = static_cast<int>(sample.X.rows());
    out.cols = static_cast<int>(sample.X.cols());
    const Spectrum spec = gram_spectrum(sample);
    out.lambda_max = spec.max_eigenvalue() * spec.normalization;
    out.rescaled = out.lambda_max / (out.cols * a_T);
    out.diag_proxy = evspec::diag_proxy(sample, a_T);
    if (with_offdiag) out.offdiag_norm = offdiag_error(sample, a_T, row_cap).value;
    return out;
}

struct InfinityNormCheck {
    double lambda_max_norm = 0.0;  // max |eigenvalue|
    double inf_norm = 0.0;         // max row sum of absolute values
};

inline InfinityNormCheck infinity_norm_bound_check(const Eigen::MatrixXd& M) {
    InfinityNormCheck out;
    const std::vector<double> lambda = symmetric_eigenvalues(M);  // also validates symmetry
    out.lambda_max_norm = std::max(std::fabs(lambda.front()), std::fabs(lambda.back()));
    out.inf_norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    return out;
}

// ---------------------------------------------------------------------------
// Frechet band comparison

struct FrechetBand {
    double lower_shift = 0.64;  // F(x - lower_shift) bounds the CDF from below
    double upper_shift = 0.16;  // F(x - upper_shift) bounds it from above
    double shape = 1.5;         // alpha / 2

    FrechetBand() = default;
    FrechetBand(double lower, double upper, double shp)
        : lower_shift(lower), upper_shift(upper), shape(shp) {
        if (!(lower > upper) || !(upper >= 0.0))
            throw std::domain_error("FrechetBand: need lower_shift > upper_shift >= 0");
        if (!(shp > 0.0)) throw std::domain_error("FrechetBand: shape must be positive");
    }
};

struct BandDecile {
    double x = 0.0;
    double ecdf = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool pass = false;
};

struct BandReport {
    std::size_t n = 0;
    double tol = 0.0;       // 1.36 / sqrt(n), the 95% Kolmogorov-Smirnov band
    std::vector<BandDecile> deciles;
    double ks_lower = 0.0;  // sup over samples of (lower curve - ecdf)
    double ks_upper = 0.0;  // sup over samples of (ecdf - upper curve)
    bool pass = false;
};

// Checks the empirical CDF of rescaled maxima against the shifted-Frechet band
// at the sample deciles, with statistical tolerance 1.36/sqrt(n).
inline BandReport frechet_band_test(std::vector<double> rescaled_maxima, const FrechetBand& band) {
    const std::size_t n = rescaled_maxima.size();
    if (n < 50) throw std::domain_error("frechet_band_test: need at least 50 samples");
    std::sort(rescaled_maxima.begin(), rescaled_maxima.end());

    const FrechetLaw law(band.shape);
    BandReport report;
    report.n = n;
    report.tol = 1.36 / std::sqrt(static_cast<double>(n));

    report.ks_lower = -1.0;
    report.ks_upper = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rescaled_maxima[i];
        const double lower = frechet_cdf(law, x - band.lower_shift);
        const double upper = frechet_cdf(law, x - band.upper_shift);
        report.ks_lower = std::max(report.ks_lower, lower - static_cast<double>(i) / n);
        report.ks_upper = std::max(report.ks_upper, (i + 1.0) / n - upper);
    }

    report.pass = true;
    for (int d = 1; d <= 9; ++d) {
        const std::size_t k =
            std::min(n - 1, static_cast<std::size_t>(std::ceil(0.1 * d * n)) - 1);
        BandDecile dec;
        dec.x = rescaled_maxima[k];
        dec.ecdf = static_cast<double>(std::upper_bound(rescaled_maxima.begin(),
                                                        rescaled_maxima.end(), dec.x) -
                                       rescaled_maxima.begin()) /
                   n;
        dec.lower = frechet_cdf(law, dec.x - band.lower_shift);
        dec.upper = frechet_cdf(law, dec.x - band.upper_shift);
        dec.pass = dec.ecdf >= dec.lower - report.tol && dec.ecdf <= dec.upper + report.tol;
        report.pass = report.pass && dec.pass;
        report.deciles.push_back(dec);
    }
    return report;
}

}  // namespace evspec
