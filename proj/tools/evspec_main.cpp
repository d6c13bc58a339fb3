// evspec command-line tool: reproducible simulation, density, extreme-value
// and market-data runs emitting CSV/JSON artifacts plus a JSON manifest that
// records exactly how to regenerate them.
//
// Exit codes: 0 success, 2 usage/parameter/input errors, 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evspec/distributions.hpp"
#include "evspec/extremes.hpp"
#include "evspec/io.hpp"
#include "evspec/market_data.hpp"
#include "evspec/simulator.hpp"
#include "evspec/spectral_density.hpp"

namespace {

using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";
// Fixed default so bare invocations are reproducible.
constexpr std::uint64_t kDefaultSeed = 20240601;

int worker_threads() {
    if (const char* env = std::getenv("EVM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

struct ManifestClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void write_manifest(const std::string& path, const std::string& command, const json& parameters,
                    std::uint64_t seed, const std::vector<std::string>& outputs,
                    const ManifestClock& clock) {
    json manifest;
    manifest["tool"] = "evspec";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["parameters"] = parameters;
    manifest["seed"] = seed;
    manifest["outputs"] = outputs;
    manifest["wall_time_seconds"] = clock.seconds();
    auto out = evspec::open_output(path);
    out << manifest.dump(2) << '\n';
}

evspec::VolatilityModel parse_volatility(const std::string& text) {
    if (text == "student3") return evspec::VolatilityModel::student(3.0);
    if (text == "normal") return evspec::VolatilityModel::standard_normal();
    if (text.rfind("student:", 0) == 0)
        return evspec::VolatilityModel::student(std::stod(text.substr(8)));
    if (text.rfind("constant:", 0) == 0)
        return evspec::VolatilityModel::constant(std::stod(text.substr(9)));
    throw CLI::ValidationError("--vol", "expected student3|student:<nu>|constant:<sigma>|normal");
}

evspec::NoiseModel parse_noise(const std::string& text) {
    if (text == "gaussian") return evspec::NoiseModel::gaussian();
    if (text == "rademacher") return evspec::NoiseModel::rademacher();
    if (text == "uniform") return evspec::NoiseModel::uniform_renormalised();
    throw CLI::ValidationError("--noise", "expected gaussian|rademacher|uniform");
}

// ---------------------------------------------------------------------------

struct DensityArgs {
    double y = 2.0;
    double xmin = 0.0, xmax = 10.0;
    int points = 200;
    std::string method = "closed";
    double nu = 3.0;
    std::string out;
};

int run_density(const DensityArgs& a) {
    ManifestClock clock;
    if (!(a.xmin < a.xmax)) throw CLI::ValidationError("--xmin/--xmax", "need xmin < xmax");

    std::vector<double> grid(a.points);
    for (int i = 0; i < a.points; ++i)
        grid[i] = a.xmin + (a.xmax - a.xmin) * i / (a.points - 1);

    evspec::DensityMethod method;
    if (a.method == "closed") method = evspec::DensityMethod::ClosedForm;
    else if (a.method == "quartic") method = evspec::DensityMethod::QuarticOracle;
    else if (a.method == "stieltjes") method = evspec::DensityMethod::StieltjesInversion;
    else if (a.method == "mp") method = evspec::DensityMethod::MarchenkoPastur;
    else throw CLI::ValidationError("--method", "expected closed|quartic|stieltjes|mp");

    const auto curve = evspec::density_curve(evspec::AspectRatio(a.y), grid, method,
                                             evspec::VolatilityModel::student(a.nu));
    evspec::write_density_curve_csv(curve, a.out);

    write_manifest(a.out + ".manifest.json", "density",
                   {{"y", a.y}, {"xmin", a.xmin}, {"xmax", a.xmax}, {"points", a.points},
                    {"method", a.method}, {"nu", a.nu}, {"out", a.out}},
                   0, {a.out}, clock);
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    int rows = 0, cols = 0;
    std::string vol = "student3";
    std::string noise = "gaussian";
    int reps = 1;
    std::uint64_t seed = kDefaultSeed;
    int bins = 100;
    std::vector<double> range{0.0, 10.0};
    bool shuffle = false;
    std::string prefix;
};

int run_simulate(const SimulateArgs& a) {
    ManifestClock clock;
    evspec::EVMConfig config;
    config.rows = a.rows;
    config.cols = a.cols;
    config.volatility = parse_volatility(a.vol);
    config.noise = parse_noise(a.noise);
    config.seed = a.seed;

    std::vector<evspec::Spectrum> spectra(a.reps);
    evspec::parallel_for(a.reps, worker_threads(), [&](std::size_t r) {
        evspec::EVMSample sample = evspec::generate_evm(config, r);
        if (a.shuffle) sample = evspec::shuffle_entries(sample, a.seed + 1 + r);
        spectra[r] = evspec::gram_spectrum(sample);
    });

    std::vector<double> pooled, maxima;
    for (const auto& spec : spectra) {
        pooled.insert(pooled.end(), spec.eigenvalues.begin(), spec.eigenvalues.end());
        maxima.push_back(spec.max_eigenvalue());
    }
    std::sort(pooled.begin(), pooled.end());

    const auto hist = evspec::histogram(pooled, a.bins, a.range[0], a.range[1]);
    const std::string hist_path = a.prefix + "_histogram.csv";
    const std::string max_path = a.prefix + "_maxeig.csv";
    evspec::write_histogram_csv(hist, hist_path);
    evspec::write_values_csv(maxima, "rep,lambda_max", max_path);

    write_manifest(a.prefix + ".manifest.json", "simulate",
                   {{"rows", a.rows}, {"cols", a.cols}, {"vol", a.vol}, {"noise", a.noise},
                    {"reps", a.reps}, {"bins", a.bins}, {"range", a.range},
                    {"shuffle", a.shuffle}, {"out-prefix", a.prefix},
                    {"eigenvalues_inside", hist.inside}, {"eigenvalues_outside", hist.outside}},
                   a.seed, {hist_path, max_path}, clock);
    return 0;
}

// ---------------------------------------------------------------------------

struct MaxeigArgs {
    int rows = 0, cols = 0;
    int reps = 0;
    std::uint64_t seed = kDefaultSeed;
    bool offdiag = false;
    std::string out;
};

int run_maxeig(const MaxeigArgs& a) {
    ManifestClock clock;
    if (a.reps < 50)
        throw std::domain_error("maxeig: need at least 50 replicas for the band test");

    const double a_T = evspec::solve_a_T(a.rows);
    evspec::EVMConfig config;
    config.rows = a.rows;
    config.cols = a.cols;
    config.seed = a.seed;

    std::vector<evspec::MaxEigSample> samples(a.reps);
    evspec::parallel_for(a.reps, worker_threads(), [&](std::size_t r) {
        samples[r] = evspec::max_eig_sample(evspec::generate_evm(config, r), a_T, a.offdiag);
    });

    std::vector<double> rescaled;
    rescaled.reserve(a.reps);
    for (const auto& s : samples) rescaled.push_back(s.rescaled);
    const auto report = evspec::frechet_band_test(rescaled, evspec::FrechetBand{});
    const double heuristic = (a.rows / 4.0) / (std::sqrt(static_cast<double>(a.cols)) * a_T);

    json doc;
    doc["n"] = report.n;
    doc["a_T"] = a_T;
    doc["tol"] = report.tol;
    doc["offdiag_heuristic"] = heuristic;
    doc["deciles"] = json::array();
    for (const auto& d : report.deciles)
        doc["deciles"].push_back({{"x", d.x}, {"ecdf", d.ecdf}, {"lower", d.lower},
                                  {"upper", d.upper}, {"pass", d.pass}});
    doc["ks_lower"] = report.ks_lower;
    doc["ks_upper"] = report.ks_upper;
    doc["pass"] = report.pass;
    {
        auto out = evspec::open_output(a.out);
        out << doc.dump(2) << '\n';
    }

    const std::string samples_path = a.out + ".samples.csv";
    {
        auto out = evspec::open_output(samples_path);
        out << "rep,lambda_max,rescaled,diag_proxy" << (a.offdiag ? ",offdiag_norm" : "") << '\n';
        for (int r = 0; r < a.reps; ++r) {
            out << r << ',' << evspec::format_double(samples[r].lambda_max) << ','
                << evspec::format_double(samples[r].rescaled) << ','
                << evspec::format_double(samples[r].diag_proxy);
            if (a.offdiag) out << ',' << evspec::format_double(samples[r].offdiag_norm);
            out << '\n';
        }
    }

    write_manifest(a.out + ".manifest.json", "maxeig",
                   {{"rows", a.rows}, {"cols", a.cols}, {"reps", a.reps},
                    {"offdiag", a.offdiag}, {"out", a.out}},
                   a.seed, {a.out, samples_path}, clock);
    return 0;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "wide";
    bool clear = false;
    int blocks = 1;
    std::string prefix;
};

int run_ingest(const IngestArgs& a) {
    ManifestClock clock;

    evspec::ReturnsPanel raw;
    if (a.format == "wide") {
        raw = evspec::read_panel_csv(a.input);
    } else if (a.format == "ohlc") {
        const auto table = evspec::read_ohlc_csv(a.input);
        raw = evspec::log_returns(table.open, table.close, table.tickers, table.timestamps);
    } else {
        throw CLI::ValidationError("--format", "expected wide|ohlc");
    }

    const auto dropped = evspec::drop_zero_variance_columns(raw);
    for (const auto& ticker : dropped)
        std::cerr << "warning: dropping zero-variance column '" << ticker << "'\n";

    auto process = [&](const evspec::ReturnsPanel& part) {
        evspec::ReturnsPanel processed = evspec::renormalise(part);
        if (a.clear) processed = evspec::clear_market_mode(processed);
        return processed;
    };

    std::vector<std::string> outputs;
    auto emit = [&](const evspec::ReturnsPanel& panel, const std::string& stem) {
        const std::string panel_path = stem + "_panel.csv";
        evspec::write_panel_csv(panel, panel_path);
        outputs.push_back(panel_path);

        evspec::EVMSample gram_input;
        gram_input.X = panel.values;
        const auto spectrum = evspec::gram_spectrum(gram_input);
        const std::string spec_path = stem + "_spectrum.csv";
        evspec::write_values_csv(spectrum.eigenvalues, "index,eigenvalue", spec_path);
        outputs.push_back(spec_path);
    };

    if (a.blocks <= 1) {
        const auto processed = process(raw);
        emit(processed, a.prefix);
        const std::string vol_path = a.prefix + "_rowvol.csv";
        evspec::write_values_csv(evspec::row_volatility(processed), "index,std", vol_path);
        outputs.push_back(vol_path);
    } else {
        const auto parts = evspec::split_blocks(raw, a.blocks);
        std::vector<double> rowvol;
        for (std::size_t b = 0; b < parts.size(); ++b) {
            char stem[32];
            std::snprintf(stem, sizeof(stem), "_block%03zu", b);
            const auto processed = process(parts[b]);
            emit(processed, a.prefix + stem);
            const auto vol = evspec::row_volatility(processed);
            rowvol.insert(rowvol.end(), vol.begin(), vol.end());
        }
        const std::string vol_path = a.prefix + "_rowvol.csv";
        evspec::write_values_csv(rowvol, "index,std", vol_path);
        outputs.push_back(vol_path);
    }

    json params = {{"input", a.input}, {"format", a.format}, {"clear", a.clear},
                   {"blocks", a.blocks}, {"out-prefix", a.prefix}};
    params["dropped_columns"] = dropped;
    write_manifest(a.prefix + ".manifest.json", "ingest", params, 0, outputs, clock);
    return 0;
}

// ---------------------------------------------------------------------------

struct TailArgs {
    std::string input;
    std::string method = "hill";
    int k = 0;
    std::string out;
    std::string quantiles_out;
};

int run_tail(const TailArgs& a) {
    ManifestClock clock;
    const auto values = evspec::read_column_csv(a.input);

    evspec::TailMethod method;
    if (a.method == "hill") method = evspec::TailMethod::Hill;
    else if (a.method == "loglog") method = evspec::TailMethod::LogLogRegression;
    else throw CLI::ValidationError("--method", "expected hill|loglog");

    const auto fit = evspec::tail_exponent(values, method, a.k);
    json doc;
    doc["exponent"] = fit.exponent;
    doc["method"] = a.method;
    doc["k_used"] = fit.k_used;
    doc["stderr"] = fit.stderr_;
    {
        auto out = evspec::open_output(a.out);
        out << doc.dump(2) << '\n';
    }
    std::vector<std::string> outputs{a.out};

    if (!a.quantiles_out.empty()) {
        // percentiles of ln(value) over the positive entries, for box-style plots
        std::vector<double> logs;
        for (double v : values)
            if (v > 0.0) logs.push_back(std::log(v));
        std::sort(logs.begin(), logs.end());
        auto out = evspec::open_output(a.quantiles_out);
        out << "percentile,log_value\n";
        for (int p = 1; p <= 99 && !logs.empty(); ++p) {
            const std::size_t k =
                std::min(logs.size() - 1, static_cast<std::size_t>(p / 100.0 * logs.size()));
            out << p << ',' << evspec::format_double(logs[k]) << '\n';
        }
        outputs.push_back(a.quantiles_out);
    }

    write_manifest(a.out + ".manifest.json", "tail",
                   {{"input", a.input}, {"method", a.method}, {"k", a.k}, {"out", a.out}},
                   0, outputs, clock);
    return 0;
}

// ---------------------------------------------------------------------------

struct SpilloverArgs {
    std::string input;
    std::string a_ticker, b_ticker;
    std::string out;
};

int run_spillover(const SpilloverArgs& a) {
    ManifestClock clock;
    const auto panel = evspec::read_panel_csv(a.input);
    const auto pairs = evspec::spillover_pairs(panel, a.a_ticker, a.b_ticker);
    evspec::write_scatter_csv(pairs, a.out);
    write_manifest(a.out + ".manifest.json", "spillover",
                   {{"input", a.input}, {"a", a.a_ticker}, {"b", a.b_ticker}, {"out", a.out}},
                   0, {a.out}, clock);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::setvbuf(stderr, nullptr, _IONBF, 0);
    CLI::App app{"spectral statistics of elliptic volatility ensembles"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DensityArgs density;
    auto* cmd_density = app.add_subcommand("density", "evaluate a limiting spectral density curve");
    cmd_density->add_option("--y", density.y, "aspect ratio T/S")->required();
    cmd_density->add_option("--xmin", density.xmin, "grid start")->required();
    cmd_density->add_option("--xmax", density.xmax, "grid end")->required();
    cmd_density->add_option("--points", density.points, "grid size")->check(CLI::Range(2, 10000000));
    cmd_density->add_option("--method", density.method, "closed|quartic|stieltjes|mp");
    cmd_density->add_option("--nu", density.nu, "Student degrees of freedom (stieltjes only)");
    cmd_density->add_option("--out", density.out, "output CSV")->required();

    SimulateArgs simulate;
    auto* cmd_simulate = app.add_subcommand("simulate", "sample ensemble spectra and histogram them");
    cmd_simulate->add_option("--rows", simulate.rows, "T (time)")->required()->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--cols", simulate.cols, "S (stocks)")->required()->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--vol", simulate.vol, "student3|student:<nu>|constant:<sigma>|normal");
    cmd_simulate->add_option("--noise", simulate.noise, "gaussian|rademacher|uniform");
    cmd_simulate->add_option("--reps", simulate.reps, "replicas")->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--seed", simulate.seed, "64-bit seed");
    cmd_simulate->add_option("--bins", simulate.bins, "histogram bins")->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--range", simulate.range, "histogram range lo hi")->expected(2);
    cmd_simulate->add_flag("--shuffle", simulate.shuffle, "shuffle all entries of each replica");
    cmd_simulate->add_option("--out-prefix", simulate.prefix, "output prefix")->required();

    MaxeigArgs maxeig;
    auto* cmd_maxeig = app.add_subcommand("maxeig", "largest-eigenvalue batch and Frechet band test");
    cmd_maxeig->add_option("--rows", maxeig.rows, "T (time)")->required()->check(CLI::PositiveNumber);
    cmd_maxeig->add_option("--cols", maxeig.cols, "S (stocks)")->required()->check(CLI::PositiveNumber);
    cmd_maxeig->add_option("--reps", maxeig.reps, "replicas (>= 50)")->required();
    cmd_maxeig->add_option("--seed", maxeig.seed, "64-bit seed");
    cmd_maxeig->add_flag("--offdiag", maxeig.offdiag, "also compute the off-diagonal error norm");
    cmd_maxeig->add_option("--out", maxeig.out, "band report JSON")->required();

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "returns pipeline: renormalise, clear, split");
    cmd_ingest->add_option("--input", ingest.input, "input CSV")->required();
    cmd_ingest->add_option("--format", ingest.format, "wide|ohlc");
    cmd_ingest->add_flag("--clear", ingest.clear, "remove the market mode");
    cmd_ingest->add_option("--blocks", ingest.blocks, "split into equal time blocks");
    cmd_ingest->add_option("--out-prefix", ingest.prefix, "output prefix")->required();

    TailArgs tail;
    auto* cmd_tail = app.add_subcommand("tail", "tail-exponent fit of a value column");
    cmd_tail->add_option("--input", tail.input, "single-column CSV")->required();
    cmd_tail->add_option("--method", tail.method, "hill|loglog");
    cmd_tail->add_option("--k", tail.k, "order statistics / points override");
    cmd_tail->add_option("--out", tail.out, "TailFit JSON")->required();
    cmd_tail->add_option("--quantiles-out", tail.quantiles_out, "optional ln-value percentile CSV");

    SpilloverArgs spill;
    auto* cmd_spill = app.add_subcommand("spillover", "paired returns of two tickers");
    cmd_spill->add_option("--input", spill.input, "wide panel CSV")->required();
    cmd_spill->add_option("--a", spill.a_ticker, "first ticker")->required();
    cmd_spill->add_option("--b", spill.b_ticker, "second ticker")->required();
    cmd_spill->add_option("--out", spill.out, "scatter CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_density->parsed()) return run_density(density);
        if (cmd_simulate->parsed()) return run_simulate(simulate);
        if (cmd_maxeig->parsed()) return run_maxeig(maxeig);
        if (cmd_ingest->parsed()) return run_ingest(ingest);
        if (cmd_tail->parsed()) return run_tail(tail);
        if (cmd_spill->parsed()) return run_spillover(spill);
    } catch (const evspec::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
