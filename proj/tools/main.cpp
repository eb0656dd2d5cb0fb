// ivexp: command-line front end for pricing, smiles, SVI smoothing and calibration.

#include "ivexp/blackscholes.hpp"
#include "ivexp/calibration.hpp"
#include "ivexp/expansion.hpp"
#include "ivexp/fourier.hpp"
#include "ivexp/io.hpp"
#include "ivexp/svi.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace ivexp;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Config {
    std::string model_path;
    std::string order = "3,8";
    double t = 1.0;
    double x = 0.0;
    double zeta = 0.0;
    double zeta_min = -1.0;
    double zeta_max = 1.0;
    int zeta_count = 41;
    bool grid = false;
    double contour_im = -1.5;
    double tol = 1e-10;
    double sigma0 = 0.0;
    double window = 0.0;
    std::string input;
    std::string quotes;
    std::string out;
    std::string format = "csv";
    bool negative_a = false;
};

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FitFailure:
            return 3;
        case ErrorKind::NonConvergence:
            return 4;
        default:
            return 2;
    }
}

ExpansionOrder parse_order(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) fail(ErrorKind::DomainViolation, "--order expects n,m");
    try {
        return ExpansionOrder(std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1)));
    } catch (const std::logic_error&) {
        fail(ErrorKind::DomainViolation, "--order expects n,m");
    }
}

std::vector<double> zeta_grid(const Config& c) {
    if (c.zeta_count < 1) fail(ErrorKind::DomainViolation, "--zeta-count must be >= 1");
    std::vector<double> g(static_cast<std::size_t>(c.zeta_count));
    for (int i = 0; i < c.zeta_count; ++i) {
        g[i] = c.zeta_count == 1 ? c.zeta_min
                                 : c.zeta_min + (c.zeta_max - c.zeta_min) * i / (c.zeta_count - 1);
    }
    return g;
}

void emit(const Config& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out);
    if (!f) fail(ErrorKind::IoFailure, "cannot write " + c.out);
    f << text;
}

std::string row(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) s += ',';
        s += format_double(v[i]);
    }
    return s + "\n";
}

ContourSpec contour(const Config& c) { return {c.contour_im, 0.0, c.tol}; }

int cmd_price(const Config& c) {
    const auto model = load_model(c.model_path);
    const auto zetas = c.grid ? zeta_grid(c) : std::vector<double>{c.zeta};
    const auto prices = fourier_call_prices(*model, c.t, c.x, zetas, contour(c));
    if (c.format == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < zetas.size(); ++i) {
            arr.push_back({{"zeta", zetas[i]},
                           {"price", prices[i].price},
                           {"contour_im", prices[i].lambda_i},
                           {"truncation", prices[i].truncation},
                           {"error_estimate", prices[i].error_estimate}});
        }
        emit(c, (c.grid ? arr : arr[0]).dump(2) + "\n");
    } else {
        std::string s = "zeta,price,contour_im,truncation,error_estimate\n";
        for (std::size_t i = 0; i < zetas.size(); ++i) {
            s += row({zetas[i], prices[i].price, prices[i].lambda_i, prices[i].truncation, prices[i].error_estimate});
        }
        emit(c, s);
    }
    return 0;
}

int cmd_smile(const Config& c) {
    if (!(c.sigma0 > 0.0)) fail(ErrorKind::DomainViolation, "--sigma0 must be positive");
    const auto model = load_model(c.model_path);
    const auto order = parse_order(c.order);
    const auto zetas = zeta_grid(c);
    const SmileEngine engine(model_coefficients(*model, c.t, c.sigma0, order.m), order);
    const int n = order.n;
    const auto count = static_cast<std::ptrdiff_t>(zetas.size());
    std::vector<std::vector<double>> rows(zetas.size());
    int warnings = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : warnings)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        std::vector<double> r{zetas[i]};
        std::vector<double> partial(static_cast<std::size_t>(n), kNaN);
        try {
            const auto s = engine.evaluate(c.x, zetas[i]);
            double acc = c.sigma0;
            for (int k = 0; k < n; ++k) partial[k] = acc += s.sigma_terms[k];
        } catch (const NumericsError&) {
            ++warnings;
        }
        double truth = kNaN;
        try {
            truth = oracle_implied_vol(*model, c.t, c.x, zetas[i], contour(c));
        } catch (const NumericsError&) {
            ++warnings;
        }
        r.insert(r.end(), partial.begin(), partial.end());
        r.push_back(truth);
        for (int k = 0; k < n; ++k) r.push_back(partial[k] / truth - 1.0);
        rows[i] = std::move(r);
    }

    std::string s = "zeta";
    for (int k = 1; k <= n; ++k) s += ",sigma_nm_" + std::to_string(k);
    s += ",true_iv";
    for (int k = 1; k <= n; ++k) s += ",rel_err_" + std::to_string(k);
    s += "\n";
    for (const auto& r : rows) s += row(r);
    emit(c, s);
    if (warnings > 0) std::cerr << "warning: " << warnings << " point evaluation(s) failed (NaN rows)\n";
    return 0;
}

std::vector<SmilePoint> read_smile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoFailure, "cannot open smile file " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::IoFailure, "empty smile file " + path);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "zeta") fail(ErrorKind::IoFailure, "smile CSV must start with zeta");
    // Use the highest-order approximation column if present, else the second column.
    std::size_t col = 1;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i].rfind("sigma_nm_", 0) == 0) col = i;
    }
    std::vector<SmilePoint> pts;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail(ErrorKind::IoFailure, "bad number in smile file: " + cell);
            }
        }
        if (v.size() != header.size()) fail(ErrorKind::IoFailure, "wrong column count in smile file");
        if (std::isfinite(v[0]) && std::isfinite(v[col])) pts.push_back({v[0], v[col]});
    }
    return pts;
}

int cmd_svi(const Config& c) {
    std::vector<SmilePoint> pts;
    double window = c.window;
    if (!c.input.empty()) {
        pts = read_smile_csv(c.input);
    } else {
        if (!(c.sigma0 > 0.0)) fail(ErrorKind::DomainViolation, "--sigma0 must be positive");
        const auto model = load_model(c.model_path);
        const auto order = parse_order(c.order);
        if (!(window > 0.0)) window = default_svi_window(c.sigma0, c.t);
        Config g = c;
        g.zeta_min = c.x - window;
        g.zeta_max = c.x + window;
        const auto zetas = zeta_grid(g);
        for (const auto& s : smile_curve(*model, order, c.t, c.x, zetas, c.sigma0)) {
            if (!s.flagged) pts.push_back({s.context.zeta(), s.total});
        }
    }
    if (window > 0.0) {
        std::erase_if(pts, [&](const SmilePoint& p) { return std::abs(p.zeta - c.x) > window + 1e-12; });
    }
    SVIFitOptions opts;
    opts.allow_negative_a = c.negative_a;
    const auto fit = svi_fit(pts, c.t, c.x, {}, opts);

    double half = window;
    if (!(half > 0.0)) {
        for (const auto& p : pts) half = std::max(half, std::abs(p.zeta - c.x));
    }
    std::vector<double> grid;
    constexpr int kDensityPoints = 201;
    for (int i = 0; i < kDensityPoints; ++i) grid.push_back(c.x - half + 2.0 * half * i / (kDensityPoints - 1));
    const auto density = bl_density(fit.params, c.t, c.x, grid);
    const auto bf = butterfly_check(fit.params, c.t, c.x, half);

    if (c.format == "json") {
        json d = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            d.push_back({{"zeta", grid[i]}, {"svi_iv", svi_vol(fit.params, c.t, c.x, grid[i])},
                         {"density", density.density[i]}});
        }
        json doc{{"svi", svi_to_json(fit.params, c.t)},
                 {"rmse", fit.rmse},
                 {"iterations", fit.iterations},
                 {"butterfly", {{"arbitrage_free", bf.arbitrage_free}, {"min_density", bf.min_density},
                                {"argmin", bf.argmin}}},
                 {"density", d}};
        emit(c, doc.dump(2) + "\n");
    } else {
        std::string s = "zeta,svi_iv,density\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            s += row({grid[i], svi_vol(fit.params, c.t, c.x, grid[i]), density.density[i]});
        }
        emit(c, s);
        std::cerr << "svi " << svi_to_json(fit.params, c.t).dump() << " rmse " << format_double(fit.rmse)
                  << (bf.arbitrage_free ? " arbitrage-free" : " butterfly-arbitrage") << "\n";
    }
    return 0;
}

int cmd_calibrate(const Config& c) {
    const auto surface = read_quotes_csv(c.quotes, c.x);
    const auto order = parse_order(c.order);
    const auto outcomes = calibrate_surface(surface, order);

    json slices = json::array();
    std::vector<CalibratedSlice> ok;
    bool any_fit_failure = false;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto j = slice_outcome_to_json(outcomes[i]);
        if (outcomes[i].slice) {
            const auto& s = *outcomes[i].slice;
            ok.push_back(s);
            const SmileEngine engine(s.coefficients(), order);
            const auto& strikes = surface.slices[i].strikes;
            const auto [lo, hi] = std::minmax_element(strikes.begin(), strikes.end());
            std::vector<double> grid;
            for (int k = 0; k <= 200; ++k) grid.push_back(*lo + (*hi - *lo) * k / 200.0);
            try {
                const auto d = bl_density([&](double z) { return engine.evaluate(c.x, z).total; }, s.t, c.x, grid);
                const auto it = std::min_element(d.density.begin(), d.density.end());
                j["density"] = {{"min_density", *it},
                                {"argmin", grid[static_cast<std::size_t>(it - d.density.begin())]},
                                {"nonnegative", *it >= -1e-10}};
            } catch (const NumericsError& e) {
                j["density"] = {{"error", e.detail()}};
            }
        } else if (outcomes[i].error == ErrorKind::FitFailure) {
            any_fit_failure = true;
        }
        slices.push_back(std::move(j));
    }
    json doc{{"slices", slices}, {"levy_consistency", nullptr}};
    if (ok.size() >= 2) doc["levy_consistency"] = consistency_to_json(levy_consistency_report(ok));
    emit(c, doc.dump(2) + "\n");
    for (const auto& o : outcomes) {
        if (o.error) std::cerr << "slice t=" << format_double(o.t) << ": " << to_string(*o.error) << ": " << o.detail << "\n";
    }
    if (ok.empty() && !outcomes.empty()) return any_fit_failure ? 3 : 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implied-volatility smile expansions from characteristic functions"};
    app.require_subcommand(1, 1);
    Config c;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--t", c.t, "Maturity in years");
        sub->add_option("--log-spot", c.x, "Log spot x");
        sub->add_option("--out", c.out, "Output path (default stdout)");
        sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--zeta-min", c.zeta_min, "Smallest log strike");
        sub->add_option("--zeta-max", c.zeta_max, "Largest log strike");
        sub->add_option("--zeta-count", c.zeta_count, "Number of log strikes");
        sub->add_option("--contour-im", c.contour_im, "Im(lambda) of the pricing contour");
        sub->add_option("--tol", c.tol, "Pricing tolerance");
    };

    auto* price = app.add_subcommand("price", "Fourier call price");
    price->add_option("--model", c.model_path, "Model JSON")->required();
    price->add_option("--zeta", c.zeta, "Log strike");
    add_common(price);
    add_grid(price);
    price->add_flag("--grid", c.grid, "Price the whole --zeta-min/max/count grid");

    auto* smile = app.add_subcommand("smile", "Approximate and true smile with relative errors");
    smile->add_option("--model", c.model_path, "Model JSON")->required();
    smile->add_option("--order", c.order, "n,m");
    smile->add_option("--sigma0", c.sigma0, "Anchor volatility")->required();
    add_common(smile);
    add_grid(smile);

    auto* svi = app.add_subcommand("svi", "SVI fit with density and butterfly check");
    svi->add_option("--input", c.input, "Smile CSV (zeta, vol columns)");
    svi->add_option("--model", c.model_path, "Model JSON, used when no --input");
    svi->add_option("--order", c.order, "n,m");
    svi->add_option("--sigma0", c.sigma0, "Anchor volatility");
    svi->add_option("--window", c.window, "Half-width of the fit window in log strike");
    svi->add_option("--zeta-count", c.zeta_count, "Points in the generated smile");
    svi->add_flag("--allow-negative-a", c.negative_a, "Relax the a >= 0 bound");
    add_common(svi);

    auto* cal = app.add_subcommand("calibrate", "Per-maturity least-squares calibration");
    cal->add_option("--quotes", c.quotes, "Quotes CSV t,log_strike,iv[,weight]")->required();
    cal->add_option("--order", c.order, "n,m");
    add_common(cal);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*price) return cmd_price(c);
        if (*smile) return cmd_smile(c);
        if (*svi) {
            if (c.format == "csv" && !svi->count("--format")) c.format = "json";
            return cmd_svi(c);
        }
        if (*cal) return cmd_calibrate(c);
    } catch (const NumericsError& e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.detail() << "\n";
        return exit_code(e.kind());
    }
    return 2;
}
