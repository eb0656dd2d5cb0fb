#include "ivexp/svi.hpp"

#include <ceres/ceres.h>

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace ivexp {

namespace {

struct VarianceJet {
    double w;
    double dw;
    double d2w;
};

// Log-price density from total variance and its first two log-strike derivatives.
double density_from_variance(double k, const VarianceJet& v) {
    if (!(v.w > 0.0)) fail(ErrorKind::DomainViolation, "non-positive total variance in density");
    const double sw = std::sqrt(v.w);
    const double dm = -k / sw - 0.5 * sw;
    const double g = std::pow(1.0 - k * v.dw / (2.0 * v.w), 2) - 0.25 * v.dw * v.dw * (1.0 / v.w + 0.25) +
                     0.5 * v.d2w;
    return g / std::sqrt(2.0 * std::numbers::pi * v.w) * std::exp(-0.5 * dm * dm);
}

VarianceJet svi_jet(const SVIParams& p, double k) {
    const double km = k - p.m;
    const double r = std::sqrt(km * km + p.xi * p.xi);
    return {p.a + p.b * (p.rho * km + r), p.b * (p.rho + km / r), p.b * p.xi * p.xi / (r * r * r)};
}

constexpr int kSviParams = 5;

class SviResidual {
public:
    SviResidual(std::vector<double> k, std::vector<double> sigma, std::vector<double> sqrt_w, double t)
        : k_(std::move(k)), sigma_(std::move(sigma)), sqrt_w_(std::move(sqrt_w)), t_(t) {}

    bool operator()(double const* const* params, double* residuals) const {
        const SVIParams p{params[0][0], params[0][1], params[0][2], params[0][3], params[0][4]};
        for (std::size_t i = 0; i < k_.size(); ++i) {
            const double w = svi_total_variance(p, k_[i]) / t_;
            // Signed root keeps the residual continuous through w = 0.
            const double model = w >= 0.0 ? std::sqrt(w) : -std::sqrt(-w);
            residuals[i] = sqrt_w_[i] * (model - sigma_[i]);
        }
        return true;
    }

private:
    std::vector<double> k_;
    std::vector<double> sigma_;
    std::vector<double> sqrt_w_;
    double t_;
};

bool variance_nonnegative(const SVIParams& p, double kmin, double kmax) {
    const double vertex = std::clamp(p.m - p.rho * p.xi / std::sqrt(std::max(1e-300, 1.0 - p.rho * p.rho)),
                                     kmin, kmax);
    for (double k : {kmin, kmax, vertex}) {
        if (svi_total_variance(p, k) < 0.0) return false;
    }
    return true;
}

}  // namespace

void validate(const SVIParams& p) {
    if (!(p.b >= 0.0)) fail(ErrorKind::DomainViolation, "SVI b must be >= 0");
    if (!(std::abs(p.rho) <= 1.0)) fail(ErrorKind::DomainViolation, "SVI |rho| must be <= 1");
    if (!(p.xi > 0.0)) fail(ErrorKind::DomainViolation, "SVI xi must be > 0");
    require_finite(p.a, "SVI a");
    require_finite(p.m, "SVI m");
}

double svi_total_variance(const SVIParams& p, double k) {
    const double km = k - p.m;
    return p.a + p.b * (p.rho * km + std::sqrt(km * km + p.xi * p.xi));
}

double svi_vol(const SVIParams& p, double t, double x, double zeta) {
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "maturity must be positive");
    const double w = svi_total_variance(p, zeta - x);
    if (w < 0.0) fail(ErrorKind::DomainViolation, "negative SVI total variance");
    return std::sqrt(w / t);
}

double default_svi_window(double sigma0, double t) { return 3.0 * sigma0 * std::sqrt(t); }

SVIFit svi_fit(std::span<const SmilePoint> points, double t, double x, std::span<const double> weights,
               const SVIFitOptions& options) {
    if (points.size() < kSviParams) fail(ErrorKind::FitFailure, "SVI fit needs at least 5 points");
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "maturity must be positive");
    if (!weights.empty() && weights.size() != points.size()) {
        fail(ErrorKind::DomainViolation, "weights and points differ in length");
    }
    if (options.multistarts < 1) fail(ErrorKind::DomainViolation, "need at least one start");

    std::vector<double> k, sigma, sqrt_w;
    double kmin = std::numeric_limits<double>::infinity();
    double kmax = -kmin;
    double wmax = 0.0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        require_finite(points[i].sigma, "smile vol");
        const double wi = weights.empty() ? 1.0 : weights[i];
        if (!(wi >= 0.0)) fail(ErrorKind::DomainViolation, "negative weight");
        k.push_back(points[i].zeta - x);
        sigma.push_back(points[i].sigma);
        sqrt_w.push_back(std::sqrt(wi));
        weight_sum += wi;
        kmin = std::min(kmin, k.back());
        kmax = std::max(kmax, k.back());
        wmax = std::max(wmax, t * points[i].sigma * points[i].sigma);
    }
    if (!(weight_sum > 0.0)) fail(ErrorKind::DomainViolation, "weights sum to zero");
    const double span = std::max(kmax - kmin, 1e-3);

    // Start box, scanned with a 5-d Sobol sequence.
    const std::array<double, kSviParams> lo{0.0, 0.01, -0.9, kmin, 0.02 * span};
    const std::array<double, kSviParams> hi{wmax, 4.0 * wmax / span + 0.05, 0.9, kmax, span};
    boost::random::sobol qrng(kSviParams);
    const double scale = 1.0 / (static_cast<double>(qrng.max()) - static_cast<double>(qrng.min()) + 1.0);

    const std::size_t n = k.size();
    SVIFit best{};
    double best_cost = std::numeric_limits<double>::infinity();
    int successes = 0;
    for (int s = 0; s < options.multistarts; ++s) {
        std::array<double, kSviParams> x0{};
        for (int d = 0; d < kSviParams; ++d) {
            const double u = static_cast<double>(qrng() - qrng.min()) * scale;
            x0[d] = lo[d] + u * (hi[d] - lo[d]);
        }

        auto* cost = new ceres::DynamicNumericDiffCostFunction<SviResidual, ceres::CENTRAL>(
            new SviResidual(k, sigma, sqrt_w, t));
        cost->AddParameterBlock(kSviParams);
        cost->SetNumResiduals(static_cast<int>(n));

        ceres::Problem problem;
        problem.AddResidualBlock(cost, nullptr, x0.data());
        if (!options.allow_negative_a) problem.SetParameterLowerBound(x0.data(), 0, 0.0);
        problem.SetParameterLowerBound(x0.data(), 1, 0.0);
        problem.SetParameterLowerBound(x0.data(), 2, -1.0);
        problem.SetParameterUpperBound(x0.data(), 2, 1.0);
        problem.SetParameterLowerBound(x0.data(), 4, 1e-8);

        ceres::Solver::Options so;
        so.linear_solver_type = ceres::DENSE_QR;
        so.logging_type = ceres::SILENT;
        so.minimizer_progress_to_stdout = false;
        so.max_num_iterations = options.max_iterations;
        so.function_tolerance = 1e-16;
        so.gradient_tolerance = 1e-16;
        so.parameter_tolerance = 1e-14;
        ceres::Solver::Summary summary;
        ceres::Solve(so, &problem, &summary);
        if (!summary.IsSolutionUsable() || !std::isfinite(summary.final_cost)) continue;

        const SVIParams p{x0[0], x0[1], x0[2], x0[3], x0[4]};
        if (!variance_nonnegative(p, kmin, kmax)) continue;
        ++successes;
        if (summary.final_cost < best_cost) {
            best_cost = summary.final_cost;
            best.params = p;
            best.iterations = static_cast<int>(summary.iterations.size());
        }
    }
    if (successes == 0) fail(ErrorKind::FitFailure, "SVI fit failed from every start");

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = sqrt_w[i] * sqrt_w[i];
        const double r = std::sqrt(std::max(0.0, svi_total_variance(best.params, k[i])) / t) - sigma[i];
        sse += wi * r * r;
    }
    best.t = t;
    best.x = x;
    best.rmse = std::sqrt(sse / weight_sum);
    best.successful_starts = successes;
    return best;
}

double DensityCurve::integral() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < zeta.size(); ++i) {
        sum += 0.5 * (density[i] + density[i - 1]) * (zeta[i] - zeta[i - 1]);
    }
    return sum;
}

DensityCurve bl_density(const std::function<double(double)>& smile, double t, double x,
                        std::span<const double> zeta_grid, double h) {
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "maturity must be positive");
    if (!(h > 0.0)) fail(ErrorKind::DomainViolation, "difference step must be positive");
    DensityCurve out;
    out.t = t;
    out.zeta.assign(zeta_grid.begin(), zeta_grid.end());
    out.density.reserve(zeta_grid.size());
    for (double z : zeta_grid) {
        const double sm = smile(z - h);
        const double s0 = smile(z);
        const double sp = smile(z + h);
        const double d1 = (sp - sm) / (2.0 * h);
        const double d2 = (sp - 2.0 * s0 + sm) / (h * h);
        const VarianceJet v{t * s0 * s0, 2.0 * t * s0 * d1, 2.0 * t * (d1 * d1 + s0 * d2)};
        const double q = density_from_variance(z - x, v);
        require_finite(q, "density");
        out.density.push_back(q);
    }
    return out;
}

DensityCurve bl_density(const SVIParams& params, double t, double x, std::span<const double> zeta_grid) {
    validate(params);
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "maturity must be positive");
    DensityCurve out;
    out.t = t;
    out.zeta.assign(zeta_grid.begin(), zeta_grid.end());
    out.density.reserve(zeta_grid.size());
    for (double z : zeta_grid) out.density.push_back(density_from_variance(z - x, svi_jet(params, z - x)));
    return out;
}

ButterflyReport butterfly_check(const SVIParams& params, double t, double x, double window) {
    constexpr int kPoints = 2001;
    std::vector<double> grid(kPoints);
    for (int i = 0; i < kPoints; ++i) grid[i] = x - window + 2.0 * window * i / (kPoints - 1);
    ButterflyReport report{true, std::numeric_limits<double>::infinity(), x};
    const auto curve = bl_density(params, t, x, grid);
    for (int i = 0; i < kPoints; ++i) {
        if (curve.density[i] < report.min_density) {
            report.min_density = curve.density[i];
            report.argmin = grid[i];
        }
    }
    report.arbitrage_free = report.min_density >= -1e-10;
    return report;
}

}  // namespace ivexp
