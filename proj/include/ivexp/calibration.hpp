#pragma once

#include "ivexp/core.hpp"
#include "ivexp/expansion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ivexp {

/// Quoted implied vols at one maturity. Weights may be empty (uniform).
struct QuoteSlice {
    double t = 0.0;
    std::vector<double> strikes;  ///< log strikes
    std::vector<double> vols;
    std::vector<double> weights;
};

struct QuoteSurface {
    double x = 0.0;  ///< log spot
    std::vector<QuoteSlice> slices;
};

/// Maturities strictly increasing; per slice strikes strictly increasing after
/// sorting and vols positive. Empty slices pass here and fail at calibration.
void validate(const QuoteSurface& surface);

struct CalibrationOptions {
    int max_iterations = 1000;
};

struct CalibratedSlice {
    double t = 0.0;
    double sigma0 = 0.0;
    std::vector<double> a;  ///< a_2 .. a_m
    double rmse = 0.0;
    int iterations = 0;
    std::vector<double> residuals;  ///< sigma^(n,m)(t, k_j) - quote, in ascending strike order
    std::vector<std::string> warnings;

    ExpansionCoefficients coefficients() const { return ExpansionCoefficients(t, sigma0, a); }
};

/// Least squares of sigma^(n,m)(t, k_j) against the quotes over (sigma0, a_2..a_m),
/// starting from sigma0 = largest quoted vol and a_q = 0.
CalibratedSlice calibrate_slice(const QuoteSlice& quotes, const ExpansionOrder& order, double x,
                                const CalibrationOptions& options = {});

struct SliceOutcome {
    double t = 0.0;
    std::optional<CalibratedSlice> slice;
    std::optional<ErrorKind> error;
    std::string detail;
};

/// Independent per-maturity calibrations in parallel; failures stay local to their slice.
std::vector<SliceOutcome> calibrate_surface(const QuoteSurface& surface, const ExpansionOrder& order,
                                            const CalibrationOptions& options = {});
/// Serial reference for calibrate_surface.
std::vector<SliceOutcome> calibrate_surface_serial(const QuoteSurface& surface, const ExpansionOrder& order,
                                                   const CalibrationOptions& options = {});

struct Dispersion {
    std::string label;  ///< "level" or "a<q>"
    std::vector<double> values;
    double mean = 0.0;
    double cv = 0.0;  ///< population stdev / |mean|
    bool flagged = false;
};

struct LevyConsistencyReport {
    std::vector<double> maturities;
    Dispersion level;  ///< sigma0^2 / 2 + a_2 / t
    std::vector<Dispersion> higher;  ///< a_q / t for q >= 3
    bool levy_consistent = true;
};

/// Throws DomainViolation with fewer than two slices.
LevyConsistencyReport levy_consistency_report(const std::vector<CalibratedSlice>& slices,
                                              double threshold = 0.1);

}  // namespace ivexp
