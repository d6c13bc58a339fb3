#pragma once

// CSV reading/writing for the file formats the tool exposes. Floats are
// printed with 17 significant digits ('.' decimal point, no locale) so that
// written values parse back bit-identically.

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "evspec/market_data.hpp"
#include "evspec/simulator.hpp"
#include "evspec/spectral_density.hpp"

namespace evspec {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double_field(const std::string& field, const std::string& context) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse number '" + field + "' in " + context);
    }
    if (pos != field.size())
        throw std::invalid_argument("trailing characters in number '" + field + "' in " + context);
    return v;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    return in;
}

// ---------------------------------------------------------------------------
// Density curves: header x,rho,method,y

inline void write_density_curve_csv(const DensityCurve& curve, const std::string& path) {
    auto out = open_output(path);
    out << "x,rho,method,y\n";
    for (std::size_t i = 0; i < curve.xs.size(); ++i)
        out << format_double(curve.xs[i]) << ',' << format_double(curve.rhos[i]) << ','
            << to_string(curve.method) << ',' << format_double(curve.y.value) << '\n';
}

// ---------------------------------------------------------------------------
// Histograms and spectra

inline void write_histogram_csv(const Histogram& h, const std::string& path) {
    auto out = open_output(path);
    out << "bin_lo,bin_hi,height,count\n";
    const double width = h.bin_width();
    for (std::size_t b = 0; b < h.heights.size(); ++b)
        out << format_double(h.lo + b * width) << ',' << format_double(h.lo + (b + 1) * width)
            << ',' << format_double(h.heights[b]) << ',' << h.counts[b] << '\n';
}

inline void write_values_csv(const std::vector<double>& values, const std::string& header,
                             const std::string& path) {
    auto out = open_output(path);
    out << header << '\n';
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << ',' << format_double(values[i]) << '\n';
}

inline std::vector<double> read_column_csv(const std::string& path) {
    auto in = open_input(path);
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string& cell = fields.back();  // value column last (or only)
        if (first) {
            first = false;
            try {
                std::size_t pos = 0;
                (void)std::stod(cell, &pos);
                if (pos != cell.size()) continue;  // header line
            } catch (const std::exception&) {
                continue;  // header line
            }
        }
        values.push_back(parse_double_field(cell, path));
    }
    return values;
}

// ---------------------------------------------------------------------------
// Wide returns panels: header timestamp,<ticker...>; empty cell = missing (0)

inline void write_panel_csv(const ReturnsPanel& panel, const std::string& path) {
    auto out = open_output(path);
    out << "timestamp";
    for (const auto& t : panel.tickers) out << ',' << t;
    out << '\n';
    for (int t = 0; t < panel.rows(); ++t) {
        out << (t < static_cast<int>(panel.timestamps.size()) ? panel.timestamps[t]
                                                              : std::to_string(t));
        for (int s = 0; s < panel.cols(); ++s) out << ',' << format_double(panel.values(t, s));
        out << '\n';
    }
}

inline ReturnsPanel read_panel_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty panel file: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "timestamp")
        throw std::invalid_argument("panel header must start with 'timestamp': " + path);

    ReturnsPanel panel;
    panel.tickers.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("ragged row in " + path + " at line " +
                                        std::to_string(rows.size() + 2));
        panel.timestamps.push_back(fields[0]);
        std::vector<double> row(header.size() - 1);
        for (std::size_t s = 1; s < fields.size(); ++s)
            row[s - 1] = fields[s].empty() ? 0.0 : parse_double_field(fields[s], path);
        rows.push_back(std::move(row));
    }
    panel.values.resize(static_cast<int>(rows.size()), static_cast<int>(panel.tickers.size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t s = 0; s < rows[t].size(); ++s)
            panel.values(static_cast<int>(t), static_cast<int>(s)) = rows[t][s];
    return panel;
}

// ---------------------------------------------------------------------------
// Long OHLC files: header timestamp,ticker,open,close

struct OhlcTable {
    Eigen::MatrixXd open;   // NaN = missing
    Eigen::MatrixXd close;  // NaN = missing
    std::vector<std::string> tickers;     // order of first appearance
    std::vector<std::string> timestamps;  // order of first appearance
};

inline OhlcTable read_ohlc_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty OHLC file: " + path);
    {
        auto header = split_csv_line(line);
        if (header.size() != 4 || header[0] != "timestamp" || header[1] != "ticker" ||
            header[2] != "open" || header[3] != "close")
            throw std::invalid_argument("OHLC header must be timestamp,ticker,open,close: " + path);
    }

    struct Record {
        int t, s;
        double open, close;
    };
    std::vector<Record> records;
    std::vector<std::string> timestamps, tickers;
    auto index_of = [](std::vector<std::string>& labels, const std::string& name) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        labels.push_back(name);
        return static_cast<int>(labels.size()) - 1;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4) throw std::invalid_argument("ragged OHLC row in " + path);
        Record r;
        r.t = index_of(timestamps, fields[0]);
        r.s = index_of(tickers, fields[1]);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.open = fields[2].empty() ? nan : parse_double_field(fields[2], path);
        r.close = fields[3].empty() ? nan : parse_double_field(fields[3], path);
        records.push_back(r);
    }

    OhlcTable table;
    table.tickers = std::move(tickers);
    table.timestamps = std::move(timestamps);
    const int T = static_cast<int>(table.timestamps.size());
    const int S = static_cast<int>(table.tickers.size());
    table.open.setConstant(T, S, std::numeric_limits<double>::quiet_NaN());
    table.close.setConstant(T, S, std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : records) {
        table.open(r.t, r.s) = r.open;
        table.close(r.t, r.s) = r.close;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Scatter pairs: header x,y

inline void write_scatter_csv(const std::vector<std::pair<double, double>>& pairs,
                              const std::string& path) {
    auto out = open_output(path);
    out << "x,y\n";
    for (const auto& [x, y] : pairs) out << format_double(x) << ',' << format_double(y) << '\n';
}

}  // namespace evspec
