#include "ivexp/core.hpp"

#include <cmath>

namespace ivexp {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ContourViolation: return "ContourViolation";
    case ErrorKind::MartingaleViolation: return "MartingaleViolation";
    case ErrorKind::FitFailure: return "FitFailure";
    case ErrorKind::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

NumericsError::NumericsError(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

void fail(ErrorKind kind, const std::string& detail) { throw NumericsError(kind, detail); }

void require_finite(Complex z, std::string_view what) {
    if (!is_finite(z)) fail(ErrorKind::DomainViolation, std::string(what) + " must be finite");
}

void require_finite(double v, std::string_view what) {
    if (!std::isfinite(v)) fail(ErrorKind::DomainViolation, std::string(what) + " must be finite");
}

SmileContext::SmileContext(double t, double x, double zeta, double sigma0)
    : t_(t), x_(x), zeta_(zeta), sigma0_(sigma0) {
    require_finite(t, "t");
    require_finite(x, "x");
    require_finite(zeta, "zeta");
    require_finite(sigma0, "sigma0");
    if (t <= 0.0) fail(ErrorKind::DomainViolation, "maturity t must be > 0");
    if (sigma0 <= 0.0) fail(ErrorKind::DomainViolation, "anchor volatility sigma0 must be > 0");
    y0_ = (x - zeta - 0.5 * sigma0 * sigma0 * t) / (sigma0 * std::sqrt(2.0 * t));
}

SmileContext make_context(double t, double x, double zeta, double sigma0) {
    return SmileContext(t, x, zeta, sigma0);
}

ExpansionOrder::ExpansionOrder(int n_, int m_) : n(n_), m(m_) {
    if (n < 1) fail(ErrorKind::DomainViolation, "series order n must be >= 1");
    if (m < 2) fail(ErrorKind::DomainViolation, "truncation order m must be >= 2");
}

}  // namespace ivexp
