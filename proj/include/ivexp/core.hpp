#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ivexp {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

enum class ErrorKind {
    DomainViolation,
    NonConvergence,
    ContourViolation,
    MartingaleViolation,
    FitFailure,
    IoFailure,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries exactly one ErrorKind.
class NumericsError : public std::runtime_error {
public:
    NumericsError(ErrorKind kind, const std::string& detail);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Throws DomainViolation when z has a NaN or infinite component.
void require_finite(Complex z, std::string_view what);
void require_finite(double v, std::string_view what);

/// Maturity, log spot, log strike and anchor volatility at which the smile
/// expansion is evaluated. The derived y0 is fixed at construction:
///
///     y0 = (x - zeta - sigma0^2 t / 2) / (sigma0 sqrt(2 t))
class SmileContext {
public:
    SmileContext(double t, double x, double zeta, double sigma0);

    double t() const noexcept { return t_; }
    double x() const noexcept { return x_; }
    double zeta() const noexcept { return zeta_; }
    double sigma0() const noexcept { return sigma0_; }
    double y0() const noexcept { return y0_; }

    /// sigma0 * sqrt(2 t), the scale converting x-derivatives to y-derivatives.
    double scale() const noexcept { return sigma0_ * std::sqrt(2.0 * t_); }

private:
    double t_;
    double x_;
    double zeta_;
    double sigma0_;
    double y0_;
};

SmileContext make_context(double t, double x, double zeta, double sigma0);

/// Series order n >= 1 and coefficient truncation order m >= 2.
struct ExpansionOrder {
    int n = 3;
    int m = 8;

    ExpansionOrder() = default;
    ExpansionOrder(int n_, int m_);
};

}  // namespace ivexp
