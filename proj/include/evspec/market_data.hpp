#pragma once

// Returns-panel pipeline: log-returns from open/close prices, column-wise
// renormalisation, market-mode clearing by projection against the top Gram
// eigenvector, block splitting, per-time volatility estimates, tail-exponent
// fits, and paired-returns extraction.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evspec/errors.hpp"
#include "evspec/simulator.hpp"

namespace evspec {

struct ReturnsPanel {
    enum class Stage { Raw, Renormalised, Cleared };

    Eigen::MatrixXd values;  // T x S
    std::vector<std::string> tickers;     // S labels
    std::vector<std::string> timestamps;  // T labels
    Stage stage = Stage::Raw;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

// Nonpositive prices found where a value was marked present.
class bad_cells_error : public std::domain_error {
public:
    bad_cells_error(std::string what, std::vector<std::pair<int, int>> cells)
        : std::domain_error(std::move(what)), cells_(std::move(cells)) {}
    const std::vector<std::pair<int, int>>& cells() const { return cells_; }

private:
    std::vector<std::pair<int, int>> cells_;
};

// A column with zero sample variance; carries the ticker so callers can drop it.
class zero_variance_error : public std::domain_error {
public:
    zero_variance_error(const std::string& ticker, int column)
        : std::domain_error("zero-variance column '" + ticker + "'"), ticker_(ticker), column_(column) {}
    const std::string& ticker() const { return ticker_; }
    int column() const { return column_; }

private:
    std::string ticker_;
    int column_;
};

// ln(close/open) per cell; NaN in either price marks a missing interval,
// which becomes a 0 return. Nonpositive present prices are rejected with the
// full offending cell list.
inline ReturnsPanel log_returns(const Eigen::MatrixXd& open, const Eigen::MatrixXd& close,
                                std::vector<std::string> tickers,
                                std::vector<std::string> timestamps) {
    if (open.rows() != close.rows() || open.cols() != close.cols())
        throw std::invalid_argument("log_returns: open/close shapes differ");

    ReturnsPanel panel;
    panel.values.setZero(open.rows(), open.cols());
    panel.tickers = std::move(tickers);
    panel.timestamps = std::move(timestamps);

    std::vector<std::pair<int, int>> bad;
    for (int t = 0; t < open.rows(); ++t) {
        for (int s = 0; s < open.cols(); ++s) {
            const double o = open(t, s), c = close(t, s);
            if (std::isnan(o) || std::isnan(c)) continue;  // missing -> 0
            if (!(o > 0.0) || !(c > 0.0)) {
                bad.emplace_back(t, s);
                continue;
            }
            panel.values(t, s) = std::log(c / o);
        }
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "log_returns: " << bad.size() << " nonpositive price cell(s), first at row "
            << bad.front().first << ", col " << bad.front().second;
        throw bad_cells_error(msg.str(), std::move(bad));
    }
    return panel;
}

// Column-wise (x - mean) / std with the unbiased (T-1) standard deviation.
inline ReturnsPanel renormalise(const ReturnsPanel& panel) {
    const int T = panel.rows(), S = panel.cols();
    if (T < 2) throw std::domain_error("renormalise: need at least two rows");

    ReturnsPanel out = panel;
    for (int s = 0; s < S; ++s) {
        const double mean = panel.values.col(s).mean();
        const double sd =
            std::sqrt((panel.values.col(s).array() - mean).square().sum() / (T - 1));
        if (!(sd > 0.0)) {
            const std::string name = s < static_cast<int>(panel.tickers.size())
                                         ? panel.tickers[s]
                                         : ("column " + std::to_string(s));
            throw zero_variance_error(name, s);
        }
        out.values.col(s) = (panel.values.col(s).array() - mean) / sd;
    }
    out.stage = ReturnsPanel::Stage::Renormalised;
    return out;
}

// Removes columns whose sample variance vanishes (e.g. fully missing stocks);
// returns the dropped tickers.
inline std::vector<std::string> drop_zero_variance_columns(ReturnsPanel& panel) {
    const int T = panel.rows(), S = panel.cols();
    std::vector<int> keep;
    std::vector<std::string> dropped;
    for (int s = 0; s < S; ++s) {
        const double mean = panel.values.col(s).mean();
        const double ss = (panel.values.col(s).array() - mean).square().sum();
        if (T >= 2 && ss > 0.0) {
            keep.push_back(s);
        } else {
            dropped.push_back(s < static_cast<int>(panel.tickers.size())
                                  ? panel.tickers[s]
                                  : ("column " + std::to_string(s)));
        }
    }
    if (dropped.empty()) return dropped;

    Eigen::MatrixXd reduced(T, static_cast<int>(keep.size()));
    std::vector<std::string> tickers;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        reduced.col(static_cast<int>(i)) = panel.values.col(keep[i]);
        if (keep[i] < static_cast<int>(panel.tickers.size())) tickers.push_back(panel.tickers[keep[i]]);
    }
    panel.values = std::move(reduced);
    panel.tickers = std::move(tickers);
    return dropped;
}

struct MarketMode {
    Eigen::VectorXd direction;  // unit top eigenvector of X^T X / T, entry-sum >= 0
    double top_eigenvalue = 0.0;
    double second_eigenvalue = 0.0;
    int iterations = 0;
};

// Deterministic power iteration for the dominant Gram eigenpair. The start
// vector is the normalized column-sum vector of the Gram matrix; a deflated
// second iteration estimates the spectral gap so an ambiguous market mode is
// reported rather than silently picked.
inline MarketMode market_mode(const ReturnsPanel& panel, double tol = 1e-12,
                              int max_iterations = 100000) {
    const int T = panel.rows(), S = panel.cols();
    if (T < 1 || S < 1) throw std::domain_error("market_mode: empty panel");

    Eigen::MatrixXd gram(S, S);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(panel.values.transpose(), 1.0 / T);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    Eigen::VectorXd v = gram * Eigen::VectorXd::Ones(S);
    if (!(v.norm() > 0.0)) {
        // ones lies in the kernel; restart from the heaviest diagonal direction
        int imax = 0;
        gram.diagonal().maxCoeff(&imax);
        v = Eigen::VectorXd::Unit(S, imax);
    }
    v.normalize();

    MarketMode mode;
    int it = 0;
    for (; it < max_iterations; ++it) {
        Eigen::VectorXd next = gram * v;
        const double norm = next.norm();
        if (!(norm > 0.0)) break;  // v in the kernel: converged to eigenvalue 0
        next /= norm;
        if (next.dot(v) < 0.0) next = -next;
        const double delta = (next - v).norm();
        v = next;
        if (delta <= tol) break;
    }
    if (it >= max_iterations)
        throw numerical_error("market_mode: power iteration did not converge");

    if (v.sum() < 0.0) v = -v;
    mode.direction = v;
    mode.top_eigenvalue = v.dot(gram * v);
    mode.iterations = it;

    if (S > 1) {
        // deflated iteration, orthogonal start
        int imin = 0;
        v.cwiseAbs().minCoeff(&imin);
        Eigen::VectorXd w = Eigen::VectorXd::Unit(S, imin);
        w -= w.dot(v) * v;
        if (!(w.norm() > 0.0)) w = Eigen::VectorXd::Ones(S) - v.sum() * v;
        w.normalize();
        for (int k = 0; k < 500; ++k) {
            Eigen::VectorXd next = gram * w;
            next -= next.dot(v) * v;
            const double norm = next.norm();
            if (!(norm > 0.0)) {
                w.setZero();
                break;
            }
            next /= norm;
            if (next.dot(w) < 0.0) next = -next;
            const double delta = (next - w).norm();
            w = next;
            if (delta <= 1e-10) break;
        }
        mode.second_eigenvalue = w.norm() > 0.0 ? w.dot(gram * w) : 0.0;
        const double gap = mode.top_eigenvalue - mode.second_eigenvalue;
        if (gap < 1e-10 * std::max(mode.top_eigenvalue, 1e-300))
            throw numerical_error("market_mode: top eigenpair is degenerate (ambiguous mode)");
    }
    return mode;
}

// Projects every row orthogonal to the unit direction: y_t <- y_t - <y_t, d> d.
inline ReturnsPanel clear_rows(const ReturnsPanel& panel, const Eigen::VectorXd& direction) {
    if (direction.size() != panel.cols())
        throw std::invalid_argument("clear_rows: direction length mismatch");
    const double norm = direction.norm();
    if (std::fabs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("clear_rows: direction must be a unit vector");

    ReturnsPanel out = panel;
    out.values -= (panel.values * direction) * direction.transpose();
    out.stage = ReturnsPanel::Stage::Raw;
    return out;
}

// Two-step market-mode removal: project rows against the top Gram eigenvector,
// then renormalise the result.
inline ReturnsPanel clear_market_mode(const ReturnsPanel& panel) {
    if (panel.stage != ReturnsPanel::Stage::Renormalised)
        throw std::domain_error("clear_market_mode: panel must be renormalised first");
    const MarketMode mode = market_mode(panel);
    ReturnsPanel cleared = renormalise(clear_rows(panel, mode.direction));
    cleared.stage = ReturnsPanel::Stage::Cleared;
    return cleared;
}

// Contiguous time blocks of floor(T/k) rows; trailing remainder rows dropped.
inline std::vector<ReturnsPanel> split_blocks(const ReturnsPanel& panel, int k) {
    const int T = panel.rows();
    if (k < 1 || k > T) throw std::domain_error("split_blocks: need 1 <= k <= rows");
    const int block = T / k;

    std::vector<ReturnsPanel> out;
    out.reserve(k);
    for (int b = 0; b < k; ++b) {
        ReturnsPanel part;
        part.values = panel.values.middleRows(b * block, block);
        part.tickers = panel.tickers;
        if (!panel.timestamps.empty())
            part.timestamps.assign(panel.timestamps.begin() + b * block,
                                   panel.timestamps.begin() + (b + 1) * block);
        part.stage = panel.stage;
        out.push_back(std::move(part));
    }
    return out;
}

// Per-row unbiased sample standard deviation, the per-time volatility estimate.
inline std::vector<double> row_volatility(const ReturnsPanel& panel) {
    const int S = panel.cols();
    if (S < 2) throw std::domain_error("row_volatility: need at least two columns");
    std::vector<double> out(panel.rows());
    for (int t = 0; t < panel.rows(); ++t) {
        const double mean = panel.values.row(t).mean();
        out[t] = std::sqrt((panel.values.row(t).array() - mean).square().sum() / (S - 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tail-exponent estimation

enum class TailMethod { Hill, LogLogRegression };

struct TailFit {
    double exponent = 0.0;
    TailMethod method = TailMethod::Hill;
    int k_used = 0;      // order statistics (Hill) or points (regression)
    double stderr_ = 0.0;
};

// Hill estimator over the top k order statistics (default k = ceil(sqrt(n))),
// or a least-squares fit of log tail frequency against log value over the top
// 5% of points.
inline TailFit tail_exponent(const std::vector<double>& values, TailMethod method,
                             int k_opt = 0) {
    std::vector<double> x;
    x.reserve(values.size());
    for (double v : values)
        if (v > 0.0) x.push_back(v);
    const int n = static_cast<int>(x.size());
    if (n < 100) throw std::domain_error("tail_exponent: need at least 100 positive values");
    std::sort(x.begin(), x.end());

    TailFit fit;
    fit.method = method;
    if (method == TailMethod::Hill) {
        const int k = k_opt > 0 ? k_opt : static_cast<int>(std::ceil(std::sqrt(n)));
        if (k >= n) throw std::domain_error("tail_exponent: k must be below the sample size");
        const double threshold = x[n - k - 1];
        double sum = 0.0;
        for (int i = 0; i < k; ++i) sum += std::log(x[n - 1 - i] / threshold);
        if (!(sum > 0.0)) throw std::domain_error("tail_exponent: degenerate upper order statistics");
        fit.exponent = k / sum;
        fit.k_used = k;
        fit.stderr_ = fit.exponent / std::sqrt(static_cast<double>(k));
        return fit;
    }

    const int m = std::max(2, k_opt > 0 ? k_opt : static_cast<int>(std::ceil(0.05 * n)));
    if (m >= n) throw std::domain_error("tail_exponent: too few points for the regression");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> pts(m);
    for (int i = 1; i <= m; ++i) {
        const double lx = std::log(x[n - i]);                      // i-th largest value
        const double ly = std::log(static_cast<double>(i) / n);    // empirical tail at it
        pts[i - 1] = {lx, ly};
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double det = m * sxx - sx * sx;
    if (!(std::fabs(det) > 0.0))
        throw std::domain_error("tail_exponent: degenerate regression (identical points)");
    const double slope = (m * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / m;
    double ssr = 0.0;
    for (const auto& [lx, ly] : pts) {
        const double r = ly - slope * lx - intercept;
        ssr += r * r;
    }
    fit.exponent = -slope;
    fit.k_used = m;
    fit.stderr_ = m > 2 ? std::sqrt(ssr / (m - 2) / (sxx - sx * sx / m)) : 0.0;
    return fit;
}

// Paired cleared returns of two tickers, ready for scatter export.
inline std::vector<std::pair<double, double>> spillover_pairs(const ReturnsPanel& panel,
                                                              const std::string& ticker_a,
                                                              const std::string& ticker_b) {
    auto find = [&](const std::string& name) {
        const auto it = std::find(panel.tickers.begin(), panel.tickers.end(), name);
        if (it == panel.tickers.end())
            throw std::domain_error("spillover_pairs: unknown ticker '" + name + "'");
        return static_cast<int>(it - panel.tickers.begin());
    };
    const int a = find(ticker_a);
    const int b = find(ticker_b);
    std::vector<std::pair<double, double>> out(panel.rows());
    for (int t = 0; t < panel.rows(); ++t) out[t] = {panel.values(t, a), panel.values(t, b)};
    return out;
}

}  // namespace evspec
