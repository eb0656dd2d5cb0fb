#include "ivexp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ivexp {

namespace {

using nlohmann::json;

double number(const json& params, const char* key) {
    if (!params.contains(key) || !params.at(key).is_number()) {
        fail(ErrorKind::IoFailure, std::string("missing numeric parameter '") + key + "'");
    }
    return params.at(key).get<double>();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_cell(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::IoFailure, "bad number '" + s + "' on line " + std::to_string(line));
    }
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ModelPtr model_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("model") || !doc.at("model").is_string()) {
        fail(ErrorKind::IoFailure, "model document needs a string field 'model'");
    }
    if (!doc.contains("params") || !doc.at("params").is_object()) {
        fail(ErrorKind::IoFailure, "model document needs an object field 'params'");
    }
    const auto name = doc.at("model").get<std::string>();
    const auto& p = doc.at("params");
    try {
        if (name == "black_scholes") return std::make_shared<BlackScholesModel>(number(p, "sigma"));
        if (name == "merton") {
            return std::make_shared<MertonModel>(
                MertonParams{number(p, "a"), number(p, "alpha"), number(p, "m"), number(p, "s")});
        }
        if (name == "variance_gamma") {
            return std::make_shared<VarianceGammaModel>(
                VarianceGammaParams{number(p, "a"), number(p, "alpha"), number(p, "G"), number(p, "M")});
        }
        if (name == "heston") {
            return std::make_shared<HestonModel>(HestonParams{number(p, "kappa"), number(p, "theta"),
                                                              number(p, "delta"), number(p, "rho"), number(p, "y")});
        }
    } catch (const NumericsError& e) {
        if (e.kind() == ErrorKind::IoFailure) throw;
        fail(ErrorKind::IoFailure, "invalid " + name + " parameters: " + e.detail());
    }
    fail(ErrorKind::IoFailure, "unknown model '" + name + "'");
}

ModelPtr load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoFailure, "cannot open model file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail(ErrorKind::IoFailure, "malformed model JSON in " + path + ": " + e.what());
    }
    return model_from_json(doc);
}

json model_to_json(const CharacteristicModel& model) {
    json params = json::object();
    if (const auto* m = dynamic_cast<const BlackScholesModel*>(&model)) {
        params["sigma"] = m->sigma();
    } else if (const auto* m = dynamic_cast<const MertonModel*>(&model)) {
        const auto& p = m->params();
        params = {{"a", p.a}, {"alpha", p.alpha}, {"m", p.jump_mean}, {"s", p.jump_stdev}};
    } else if (const auto* m = dynamic_cast<const VarianceGammaModel*>(&model)) {
        const auto& p = m->params();
        params = {{"a", p.a}, {"alpha", p.alpha}, {"G", p.G}, {"M", p.M}};
    } else if (const auto* m = dynamic_cast<const HestonModel*>(&model)) {
        const auto& p = m->params();
        params = {{"kappa", p.kappa}, {"theta", p.theta}, {"delta", p.delta}, {"rho", p.rho}, {"y", p.y}};
    } else {
        fail(ErrorKind::IoFailure, "model '" + model.name() + "' has no JSON form");
    }
    return {{"model", model.name()}, {"params", params}};
}

json svi_to_json(const SVIParams& p, double t) {
    return {{"a", p.a}, {"b", p.b}, {"rho", p.rho}, {"m", p.m}, {"xi", p.xi}, {"t", t}};
}

SVIParams svi_from_json(const json& doc, double* t) {
    if (!doc.is_object()) fail(ErrorKind::IoFailure, "SVI record must be an object");
    SVIParams p{number(doc, "a"), number(doc, "b"), number(doc, "rho"), number(doc, "m"), number(doc, "xi")};
    if (t != nullptr) *t = number(doc, "t");
    try {
        validate(p);
    } catch (const NumericsError& e) {
        fail(ErrorKind::IoFailure, "invalid SVI record: " + e.detail());
    }
    return p;
}

QuoteSurface read_quotes_csv(const std::string& path, double x) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoFailure, "cannot open quotes file " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::IoFailure, "empty quotes file " + path);
    const auto header = split(line);
    const bool weighted = header.size() == 4 && header[3] == "weight";
    if (header.size() < 3 || header[0] != "t" || header[1] != "log_strike" || header[2] != "iv" ||
        (header.size() == 4 && !weighted) || header.size() > 4) {
        fail(ErrorKind::IoFailure, "quotes header must be t,log_strike,iv[,weight]");
    }

    std::map<double, QuoteSlice> by_t;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            fail(ErrorKind::IoFailure, "wrong column count on line " + std::to_string(lineno));
        }
        const double t = parse_cell(cells[0], lineno);
        auto& s = by_t[t];
        s.t = t;
        s.strikes.push_back(parse_cell(cells[1], lineno));
        s.vols.push_back(parse_cell(cells[2], lineno));
        if (weighted) s.weights.push_back(parse_cell(cells[3], lineno));
    }
    QuoteSurface surface;
    surface.x = x;
    for (auto& [t, s] : by_t) surface.slices.push_back(std::move(s));
    try {
        validate(surface);
    } catch (const NumericsError& e) {
        fail(ErrorKind::IoFailure, "invalid quotes in " + path + ": " + e.detail());
    }
    return surface;
}

json calibrated_slice_to_json(const CalibratedSlice& s) {
    json a = json::array();
    for (double v : s.a) a.push_back(v);
    return {{"t", s.t},
            {"sigma0", s.sigma0},
            {"a", a},
            {"diagnostics",
             {{"rmse", s.rmse}, {"iterations", s.iterations}, {"residuals", s.residuals}, {"warnings", s.warnings}}}};
}

json slice_outcome_to_json(const SliceOutcome& o) {
    if (o.slice) return calibrated_slice_to_json(*o.slice);
    return {{"t", o.t},
            {"error", {{"kind", std::string(to_string(o.error.value_or(ErrorKind::FitFailure)))}, {"detail", o.detail}}}};
}

json consistency_to_json(const LevyConsistencyReport& r) {
    auto disp = [](const Dispersion& d) {
        return json{{"label", d.label}, {"values", d.values}, {"mean", d.mean}, {"cv", d.cv}, {"flagged", d.flagged}};
    };
    json higher = json::array();
    for (const auto& d : r.higher) higher.push_back(disp(d));
    return {{"maturities", r.maturities}, {"level", disp(r.level)}, {"higher", higher},
            {"levy_consistent", r.levy_consistent}};
}

}  // namespace ivexp
