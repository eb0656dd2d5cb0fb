#include "ivexp/fourier.hpp"

#include "ivexp/blackscholes.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ivexp {

namespace {

constexpr double kFirstPanel = 2.0;
constexpr double kPanelGrowth = 1.25;
constexpr int kMaxPanels = 240;
constexpr int kQuietPanelsToStop = 3;
constexpr double kQuietRatio = 1e-13;
constexpr int kProbesPerPanel = 8;

using GaussKronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Accumulator {
    Complex sum{};
    double error = 0.0;
    double peak = 0.0;
};

template <class F>
Complex integrate_panel(F& f, double a, double b, Accumulator& acc) {
    double err = 0.0;
    const Complex v = GaussKronrod::integrate(f, a, b, 15, 1e-13, &err);
    acc.error += err;
    return v;
}

template <class F>
double panel_max(F& f, double a, double b) {
    double m = 0.0;
    for (int j = 0; j <= kProbesPerPanel; ++j) {
        m = std::max(m, std::abs(f(a + (b - a) * j / kProbesPerPanel)));
    }
    return m;
}

// Integrates f over [0, +inf) in direction `sign`, extending the window until
// the integrand stays below kQuietRatio * peak for kQuietPanelsToStop panels.
template <class F>
double integrate_half_line(F& f, int sign, Accumulator& acc) {
    double left = 0.0;
    double width = kFirstPanel;
    int quiet = 0;
    for (int panel = 0; panel < kMaxPanels; ++panel) {
        const double right = left + width;
        const double a = sign > 0 ? left : -right;
        const double b = sign > 0 ? right : -left;
        acc.sum += integrate_panel(f, a, b, acc);
        const double local = panel_max(f, a, b);
        acc.peak = std::max(acc.peak, local);
        quiet = local < kQuietRatio * acc.peak ? quiet + 1 : 0;
        if (quiet >= kQuietPanelsToStop) return right;
        left = right;
        width *= kPanelGrowth;
    }
    fail(ErrorKind::NonConvergence, "Fourier integrand did not decay within the maximum truncation window");
}

template <class F>
double integrate_window(F& f, double half_width, Accumulator& acc) {
    const int panels = std::max(1, static_cast<int>(std::ceil(half_width / kFirstPanel)));
    const double w = half_width / panels;
    for (int j = 0; j < panels; ++j) {
        acc.sum += integrate_panel(f, j * w, (j + 1) * w, acc);
        acc.sum += integrate_panel(f, -(j + 1) * w, -j * w, acc);
    }
    return half_width;
}

void check_contour(const CharacteristicModel& model, double t, const ContourSpec& contour) {
    if (!(contour.lambda_i < -1.0)) fail(ErrorKind::ContourViolation, "payoff transform requires Im(lambda) < -1");
    if (!(contour.tolerance > 0.0)) fail(ErrorKind::DomainViolation, "quadrature tolerance must be > 0");
    if (!model.strip().contains(contour.lambda_i)) {
        fail(ErrorKind::ContourViolation, "contour Im(lambda) = " + std::to_string(contour.lambda_i)
                                              + " lies outside the model's analytic strip");
    }
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "t must be > 0");
    const Complex at_minus_i = model.phi(t, Complex(0.0, -1.0));
    if (std::abs(at_minus_i) >= 1e-10) {
        fail(ErrorKind::MartingaleViolation, "|phi(t, -i)| = " + std::to_string(std::abs(at_minus_i)) + " >= 1e-10");
    }
}

}  // namespace

Complex payoff_transform(Complex lambda, double zeta) {
    require_finite(lambda, "lambda");
    if (!(lambda.imag() < -1.0)) fail(ErrorKind::ContourViolation, "payoff transform requires Im(lambda) < -1");
    return -std::exp(zeta - kI * zeta * lambda) / (kI * lambda + lambda * lambda);
}

FourierPrice fourier_call_price(const CharacteristicModel& model, double t, double x, double zeta,
                                const ContourSpec& contour) {
    require_finite(x, "x");
    require_finite(zeta, "zeta");
    check_contour(model, t, contour);
    const double li = contour.lambda_i;
    auto integrand = [&](double lr) {
        const Complex lambda(lr, li);
        return payoff_transform(lambda, zeta) * std::exp(kI * lambda * x + model.phi(t, lambda));
    };

    Accumulator acc;
    double window = 0.0;
    if (contour.truncation > 0.0) {
        window = integrate_window(integrand, contour.truncation, acc);
    } else {
        acc.peak = std::abs(integrand(0.0));
        window = std::max(integrate_half_line(integrand, +1, acc), integrate_half_line(integrand, -1, acc));
    }
    const Complex value = acc.sum / (2.0 * std::numbers::pi);

    FourierPrice out;
    out.price = value.real();
    out.imag_residual = value.imag();
    out.error_estimate = acc.error / (2.0 * std::numbers::pi);
    out.truncation = window;
    out.lambda_i = li;
    if (!std::isfinite(out.price)) fail(ErrorKind::ContourViolation, "Fourier integrand is not finite on the contour");
    if (std::abs(out.imag_residual) >= 1e-8 * std::exp(x)) {
        fail(ErrorKind::NonConvergence, "imaginary residual of the Fourier price is too large");
    }
    if (out.error_estimate > contour.tolerance) {
        fail(ErrorKind::NonConvergence, "Fourier quadrature error estimate exceeds the tolerance");
    }
    return out;
}

std::vector<FourierPrice> fourier_call_prices(const CharacteristicModel& model, double t, double x,
                                              std::span<const double> zetas, const ContourSpec& contour) {
    const auto n = static_cast<std::ptrdiff_t>(zetas.size());
    std::vector<FourierPrice> out(zetas.size());
    std::vector<std::string> errors(zetas.size());
    std::vector<int> error_kind(zetas.size(), -1);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = fourier_call_price(model, t, x, zetas[k], contour);
        } catch (const NumericsError& e) {
            error_kind[k] = static_cast<int>(e.kind());
            errors[k] = e.detail();
        }
    }
    for (std::size_t k = 0; k < zetas.size(); ++k) {
        if (error_kind[k] >= 0) fail(static_cast<ErrorKind>(error_kind[k]), errors[k]);
    }
    return out;
}

std::vector<FourierPrice> fourier_call_prices_serial(const CharacteristicModel& model, double t, double x,
                                                     std::span<const double> zetas, const ContourSpec& contour) {
    std::vector<FourierPrice> out;
    out.reserve(zetas.size());
    for (double z : zetas) out.push_back(fourier_call_price(model, t, x, z, contour));
    return out;
}

double oracle_implied_vol(const CharacteristicModel& model, double t, double x, double zeta,
                          const ContourSpec& contour) {
    return implied_vol(fourier_call_price(model, t, x, zeta, contour).price, t, x, zeta);
}

}  // namespace ivexp
