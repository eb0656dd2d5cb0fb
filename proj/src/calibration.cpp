#include "ivexp/calibration.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ivexp {

namespace {

double param_scale(int q) { return std::pow(10.0, q - 2); }

// Internal variables: v[0] = sigma0, v[1] = sigma0^2 + 2 a_2 / t, v[q-1] = a_q 10^{q-2} for q >= 3.
std::vector<double> unpack(const double* v, double t, int m) {
    std::vector<double> a(static_cast<std::size_t>(m - 1));
    a[0] = 0.5 * t * (v[1] - v[0] * v[0]);
    for (int q = 3; q <= m; ++q) a[q - 2] = v[q - 1] / param_scale(q);
    return a;
}

class SliceResidual {
public:
    SliceResidual(const QuoteSlice& quotes, ExpansionOrder order, double x)
        : quotes_(quotes), order_(order), x_(x) {}

    bool operator()(double const* const* params, double* residuals) const {
        const double* v = params[0];
        if (!(v[0] > 0.0)) return false;
        auto a = unpack(v, quotes_.t, order_.m);
        try {
            const SmileEngine engine(ExpansionCoefficients(quotes_.t, v[0], std::move(a)), order_);
            for (std::size_t j = 0; j < quotes_.strikes.size(); ++j) {
                const double w = quotes_.weights.empty() ? 1.0 : std::sqrt(quotes_.weights[j]);
                residuals[j] = w * (engine.evaluate(x_, quotes_.strikes[j]).total - quotes_.vols[j]);
            }
        } catch (const NumericsError&) {
            return false;
        }
        return true;
    }

private:
    const QuoteSlice& quotes_;
    ExpansionOrder order_;
    double x_;
};

QuoteSlice sorted_slice(const QuoteSlice& in) {
    if (in.strikes.size() != in.vols.size() || (!in.weights.empty() && in.weights.size() != in.vols.size())) {
        fail(ErrorKind::DomainViolation, "quote columns differ in length");
    }
    std::vector<std::size_t> idx(in.strikes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return in.strikes[i] < in.strikes[j]; });
    QuoteSlice out{in.t, {}, {}, {}};
    for (auto i : idx) {
        out.strikes.push_back(in.strikes[i]);
        out.vols.push_back(in.vols[i]);
        if (!in.weights.empty()) out.weights.push_back(in.weights[i]);
    }
    return out;
}

void validate_slice(const QuoteSlice& s) {
    if (!(s.t > 0.0)) fail(ErrorKind::DomainViolation, "maturity must be positive");
    for (std::size_t j = 0; j < s.strikes.size(); ++j) {
        require_finite(s.strikes[j], "log strike");
        if (!(s.vols[j] > 0.0) || !std::isfinite(s.vols[j])) fail(ErrorKind::DomainViolation, "quoted vol must be positive");
        if (j > 0 && !(s.strikes[j] > s.strikes[j - 1])) fail(ErrorKind::DomainViolation, "duplicate log strike");
        if (!s.weights.empty() && !(s.weights[j] >= 0.0)) fail(ErrorKind::DomainViolation, "negative weight");
    }
}

Dispersion dispersion(std::string label, std::vector<double> values, double threshold) {
    Dispersion d{std::move(label), std::move(values), 0.0, 0.0, false};
    const double n = static_cast<double>(d.values.size());
    d.mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : d.values) var += (v - d.mean) * (v - d.mean);
    const double sd = std::sqrt(var / n);
    d.cv = d.mean != 0.0 ? sd / std::abs(d.mean) : (sd == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    d.flagged = !(d.cv <= threshold);
    return d;
}

SliceOutcome guarded(const QuoteSlice& slice, const ExpansionOrder& order, double x,
                     const CalibrationOptions& options) {
    SliceOutcome out;
    out.t = slice.t;
    try {
        out.slice = calibrate_slice(slice, order, x, options);
    } catch (const NumericsError& e) {
        out.error = e.kind();
        out.detail = e.detail();
    }
    return out;
}

}  // namespace

void validate(const QuoteSurface& surface) {
    require_finite(surface.x, "log spot");
    for (std::size_t i = 0; i < surface.slices.size(); ++i) {
        if (i > 0 && !(surface.slices[i].t > surface.slices[i - 1].t)) {
            fail(ErrorKind::DomainViolation, "maturities must be strictly increasing");
        }
        validate_slice(sorted_slice(surface.slices[i]));
    }
}

CalibratedSlice calibrate_slice(const QuoteSlice& quotes, const ExpansionOrder& order, double x,
                                const CalibrationOptions& options) {
    if (quotes.strikes.empty()) fail(ErrorKind::DomainViolation, "empty quote slice");
    const QuoteSlice slice = sorted_slice(quotes);
    validate_slice(slice);

    CalibratedSlice result;
    result.t = slice.t;
    const int nparams = order.m;  // sigma0, a_2..a_m
    const auto nquotes = static_cast<int>(slice.strikes.size());
    if (nquotes < nparams + 1) {
        result.warnings.push_back("fewer strikes than free parameters + 1");
    }

    std::vector<double> v(static_cast<std::size_t>(nparams), 0.0);
    v[0] = *std::max_element(slice.vols.begin(), slice.vols.end());
    v[1] = v[0] * v[0];

    ceres::NumericDiffOptions nd;
    nd.relative_step_size = 1e-7;
    auto* cost = new ceres::DynamicNumericDiffCostFunction<SliceResidual, ceres::FORWARD>(
        new SliceResidual(slice, order, x), ceres::TAKE_OWNERSHIP, nd);
    cost->AddParameterBlock(nparams);
    cost->SetNumResiduals(nquotes);

    ceres::Problem problem;
    problem.AddResidualBlock(cost, nullptr, v.data());
    problem.SetParameterLowerBound(v.data(), 0, 1e-6);

    ceres::Solver::Options so;
    so.linear_solver_type = ceres::DENSE_QR;
    so.logging_type = ceres::SILENT;
    so.max_num_iterations = options.max_iterations;
    so.function_tolerance = 1e-10;
    so.gradient_tolerance = 1e-10;
    so.parameter_tolerance = 1e-10;
    ceres::Solver::Summary summary;
    ceres::Solve(so, &problem, &summary);
    if (summary.termination_type != ceres::CONVERGENCE) {
        fail(ErrorKind::FitFailure, "calibration did not converge at t = " + std::to_string(slice.t) + ": " +
                                        summary.message);
    }

    result.sigma0 = v[0];
    result.a = unpack(v.data(), slice.t, order.m);
    result.iterations = static_cast<int>(summary.iterations.size());

    const SmileEngine engine(result.coefficients(), order);
    double sse = 0.0;
    for (int j = 0; j < nquotes; ++j) {
        const double r = engine.evaluate(x, slice.strikes[j]).total - slice.vols[j];
        result.residuals.push_back(r);
        sse += r * r;
    }
    result.rmse = std::sqrt(sse / nquotes);
    return result;
}

std::vector<SliceOutcome> calibrate_surface(const QuoteSurface& surface, const ExpansionOrder& order,
                                            const CalibrationOptions& options) {
    std::vector<SliceOutcome> out(surface.slices.size());
    const auto n = static_cast<std::ptrdiff_t>(surface.slices.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = guarded(surface.slices[i], order, surface.x, options);
    return out;
}

std::vector<SliceOutcome> calibrate_surface_serial(const QuoteSurface& surface, const ExpansionOrder& order,
                                                   const CalibrationOptions& options) {
    std::vector<SliceOutcome> out;
    out.reserve(surface.slices.size());
    for (const auto& s : surface.slices) out.push_back(guarded(s, order, surface.x, options));
    return out;
}

LevyConsistencyReport levy_consistency_report(const std::vector<CalibratedSlice>& slices, double threshold) {
    if (slices.size() < 2) fail(ErrorKind::DomainViolation, "consistency report needs at least two slices");
    const std::size_t na = slices.front().a.size();
    for (const auto& s : slices) {
        if (s.a.size() != na) fail(ErrorKind::DomainViolation, "slices calibrated at different orders");
        if (!(s.t > 0.0)) fail(ErrorKind::DomainViolation, "maturity must be positive");
    }

    LevyConsistencyReport report;
    std::vector<double> level;
    for (const auto& s : slices) {
        report.maturities.push_back(s.t);
        level.push_back(0.5 * s.sigma0 * s.sigma0 + (na > 0 ? s.a[0] : 0.0) / s.t);
    }
    report.level = dispersion("level", std::move(level), threshold);
    report.levy_consistent = !report.level.flagged;
    for (std::size_t i = 1; i < na; ++i) {
        std::vector<double> vals;
        for (const auto& s : slices) vals.push_back(s.a[i] / s.t);
        report.higher.push_back(dispersion("a" + std::to_string(i + 2), std::move(vals), threshold));
        report.levy_consistent = report.levy_consistent && !report.higher.back().flagged;
    }
    return report;
}

}  // namespace ivexp
