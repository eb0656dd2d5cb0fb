#pragma once

#include "ivexp/core.hpp"

#include <functional>
#include <span>
#include <vector>

namespace ivexp {

/// Raw SVI: total variance w(k) = a + b (rho (k - m) + sqrt((k - m)^2 + xi^2)), k = zeta - x.
struct SVIParams {
    double a = 0.0;
    double b = 0.0;
    double rho = 0.0;
    double m = 0.0;
    double xi = 0.1;
};

/// Throws DomainViolation unless b >= 0, |rho| <= 1 and xi > 0.
void validate(const SVIParams& p);

double svi_total_variance(const SVIParams& p, double k);
/// Throws DomainViolation if the total variance at zeta is negative.
double svi_vol(const SVIParams& p, double t, double x, double zeta);

struct SmilePoint {
    double zeta;
    double sigma;
};

struct SVIFitOptions {
    bool allow_negative_a = false;
    int multistarts = 8;
    int max_iterations = 500;
};

struct SVIFit {
    SVIParams params;
    double t = 0.0;
    double x = 0.0;
    double rmse = 0.0;  ///< weighted root-mean-square vol error
    int iterations = 0;
    int successful_starts = 0;
};

/// |zeta - x| half-width used when smoothing a smile with SVI: 3 sigma0 sqrt(t).
double default_svi_window(double sigma0, double t);

/// Weighted least squares in vol units with bounds b >= 0, |rho| <= 1, xi > 0
/// (and a >= 0 unless allow_negative_a). Empty weights mean uniform.
SVIFit svi_fit(std::span<const SmilePoint> points, double t, double x, std::span<const double> weights = {},
               const SVIFitOptions& options = {});

/// Risk-neutral density of log S_t on a zeta grid.
struct DensityCurve {
    double t = 0.0;
    std::vector<double> zeta;
    std::vector<double> density;

    /// Trapezoid integral over the grid.
    double integral() const;
};

/// Breeden-Litzenberger density from a strike-dependent vol: smile derivatives by
/// central differences with step h, then the closed-form second strike derivative.
DensityCurve bl_density(const std::function<double(double)>& smile, double t, double x,
                        std::span<const double> zeta_grid, double h = 1e-4);

/// Same, with analytic SVI derivatives.
DensityCurve bl_density(const SVIParams& params, double t, double x, std::span<const double> zeta_grid);

struct ButterflyReport {
    bool arbitrage_free = true;
    double min_density = 0.0;
    double argmin = 0.0;
};

/// Density on 2001 points over |zeta - x| <= window; arbitrage free iff min >= -1e-10.
ButterflyReport butterfly_check(const SVIParams& params, double t, double x, double window);

}  // namespace ivexp
