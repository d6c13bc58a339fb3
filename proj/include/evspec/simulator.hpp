#pragma once

// Generation of elliptic-volatility matrices X = diag(sigma) * Z, spectra of
// the normalized Gram matrix A = X^T X / T, reproducible replica batches, and
// the shuffled-entries control ensemble.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "evspec/distributions.hpp"
#include "evspec/errors.hpp"
#include "evspec/rng.hpp"

namespace evspec {

struct EVMConfig {
    int rows = 0;  // T, time
    int cols = 0;  // S, stocks
    VolatilityModel volatility = VolatilityModel::student(3.0);
    NoiseModel noise = NoiseModel::gaussian();
    std::uint64_t seed = 0;

    double aspect_ratio() const { return static_cast<double>(rows) / cols; }
};

struct EVMSample {
    Eigen::MatrixXd X;           // rows x cols
    std::vector<double> sigma;   // realized per-row scales; empty after shuffling
};

struct Spectrum {
    std::vector<double> eigenvalues;  // ascending
    int rows = 0;
    int cols = 0;
    double normalization = 0.0;  // divisor applied to X^T X (= rows)

    double max_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
};

// Substream layout under the config seed: replica r draws volatilities from
// substream 2r and noise from substream 2r+1.
inline std::uint64_t sigma_substream(std::uint64_t replica) { return 2 * replica; }
inline std::uint64_t noise_substream(std::uint64_t replica) { return 2 * replica + 1; }

inline EVMSample generate_evm(const EVMConfig& config, std::uint64_t replica = 0) {
    if (config.rows < 1 || config.cols < 1)
        throw std::invalid_argument("generate_evm: dimensions must be positive");

    Philox sigma_gen(config.seed, sigma_substream(replica));
    Philox noise_gen(config.seed, noise_substream(replica));

    EVMSample sample;
    sample.sigma.resize(config.rows);
    for (auto& s : sample.sigma) s = draw(config.volatility, sigma_gen);

    sample.X.resize(config.rows, config.cols);
    for (int t = 0; t < config.rows; ++t)
        for (int s = 0; s < config.cols; ++s)
            sample.X(t, s) = sample.sigma[t] * draw(config.noise, noise_gen);
    return sample;
}

// All eigenvalues of a dense symmetric matrix, ascending. The solver is a
// deterministic dense method (tridiagonalization + implicit QL/QR); its
// output is validated against the trace and Frobenius identities.
inline std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols())
        throw std::domain_error("symmetric_eigenvalues: matrix must be square");
    const double scale = M.cwiseAbs().maxCoeff();
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1e-300))
        throw std::domain_error("symmetric_eigenvalues: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("symmetric_eigenvalues: eigensolver did not converge");

    std::vector<double> lambda(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + M.rows());
    std::sort(lambda.begin(), lambda.end());

    const double sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    const double sq = std::inner_product(lambda.begin(), lambda.end(), lambda.begin(), 0.0);
    const double tr = M.trace();
    const double fro = M.squaredNorm();
    if (std::fabs(sum - tr) > 1e-10 * std::max(1.0, std::fabs(tr)) ||
        std::fabs(sq - fro) > 1e-10 * std::max(1.0, fro))
        throw numerical_error("symmetric_eigenvalues: trace/Frobenius identity violated");
    return lambda;
}

// Spectrum of A = X^T X / T. Diagonalizes whichever Gram matrix is smaller
// (the nonzero spectra coincide) and pads with |T - S| zeros; eigenvalues in
// [-1e-9 * max, 0) are clamped to 0, anything lower is a solver failure.
inline Spectrum gram_spectrum(const EVMSample& sample) {
    const int T = static_cast<int>(sample.X.rows());
    const int S = static_cast<int>(sample.X.cols());
    const int n = std::min(T, S);

    Eigen::MatrixXd gram(n, n);
    gram.setZero();
    if (S <= T)
        gram.selfadjointView<Eigen::Lower>().rankUpdate(sample.X.transpose(), 1.0 / T);
    else
        gram.selfadjointView<Eigen::Lower>().rankUpdate(sample.X, 1.0 / T);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    std::vector<double> lambda = symmetric_eigenvalues(gram);

    const double top = lambda.empty() ? 0.0 : std::max(lambda.back(), 0.0);
    for (auto& v : lambda) {
        if (v < 0.0) {
            if (v < -1e-9 * std::max(top, 1e-300)) {
                std::ostringstream msg;
                msg << "gram_spectrum: eigenvalue " << v << " below the PSD clamp threshold";
                throw numerical_error(msg.str());
            }
            v = 0.0;
        }
    }

    Spectrum spec;
    spec.rows = T;
    spec.cols = S;
    spec.normalization = T;
    if (S > T) spec.eigenvalues.assign(S - T, 0.0);  // rank deficiency of X^T X
    spec.eigenvalues.insert(spec.eigenvalues.end(), lambda.begin(), lambda.end());
    return spec;
}

// Runs body(i) for i in [0, n), on up to `threads` workers. Results must be
// written to per-index slots; the first exception wins and is rethrown.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::mutex mutex;
    std::exception_ptr error;
    std::size_t next = 0;
    auto run = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (next >= n || error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct BatchResult {
    Spectrum pooled;                  // all eigenvalues of all replicas, ascending
    std::vector<double> max_eigenvalues;  // per replica, in replica order
};

// Independent replicas under derived substreams; the result depends only on
// (config, reps), not on the worker count or execution order.
inline BatchResult batch_spectra(const EVMConfig& config, int reps, int threads = 1) {
    if (reps < 1) throw std::invalid_argument("batch_spectra: reps must be positive");

    std::vector<Spectrum> spectra(reps);
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        try {
            spectra[r] = gram_spectrum(generate_evm(config, r));
        } catch (const std::exception& err) {
            std::ostringstream msg;
            msg << "batch_spectra: replica " << r << ": " << err.what();
            throw numerical_error(msg.str());
        }
    });

    BatchResult out;
    out.pooled.rows = config.rows;
    out.pooled.cols = config.cols;
    out.pooled.normalization = config.rows;
    out.max_eigenvalues.reserve(reps);
    for (const auto& spec : spectra) {
        out.pooled.eigenvalues.insert(out.pooled.eigenvalues.end(), spec.eigenvalues.begin(),
                                      spec.eigenvalues.end());
        out.max_eigenvalues.push_back(spec.max_eigenvalue());
    }
    std::sort(out.pooled.eigenvalues.begin(), out.pooled.eigenvalues.end());
    return out;
}

// Applies one uniform permutation to all T*S entries jointly, which destroys
// the shared per-row scales while preserving the entry multiset. The sigma
// field no longer describes the rows and is cleared.
inline EVMSample shuffle_entries(const EVMSample& sample, std::uint64_t seed) {
    EVMSample out;
    out.X = sample.X;
    const std::ptrdiff_t n = out.X.size();
    Philox gen(seed, /*substream=*/0);
    double* data = out.X.data();
    for (std::ptrdiff_t i = n - 1; i > 0; --i)
        std::swap(data[i], data[gen.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
    return out;
}

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> heights;       // sum(height * width) = inside / total
    std::vector<std::int64_t> counts;  // per bin
    std::int64_t inside = 0;
    std::int64_t outside = 0;

    double bin_width() const { return heights.empty() ? 0.0 : (hi - lo) / heights.size(); }
};

// Probability-scale histogram: heights integrate to the fraction of the input
// falling inside [lo, hi]. The right edge belongs to the last bin.
inline Histogram histogram(const std::vector<double>& values, int bins, double lo, double hi) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be positive");
    if (!(lo < hi)) throw std::invalid_argument("histogram: need lo < hi");

    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    h.heights.assign(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (double v : values) {
        if (v < lo || v > hi) {
            ++h.outside;
            continue;
        }
        int b = static_cast<int>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
        ++h.inside;
    }
    const std::int64_t total = h.inside + h.outside;
    if (total > 0)
        for (int b = 0; b < bins; ++b) h.heights[b] = h.counts[b] / (width * total);
    return h;
}

}  // namespace evspec
