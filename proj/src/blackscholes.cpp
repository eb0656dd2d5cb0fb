#include "ivexp/blackscholes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ivexp {

namespace {

void check_inputs(double t, double x, double zeta, double sigma) {
    require_finite(x, "x");
    require_finite(zeta, "zeta");
    if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::DomainViolation, "t must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorKind::DomainViolation, "sigma must be > 0");
}

struct DTerms {
    double plus;
    double minus;
};

DTerms d_terms(double t, double x, double zeta, double sigma) {
    const double sd = sigma * std::sqrt(t);
    const double dp = (x - zeta + 0.5 * sigma * sigma * t) / sd;
    return {dp, dp - sd};
}

// Value of the out-of-the-money option: call when zeta >= x, put otherwise.
double otm_value(double t, double x, double zeta, double sigma) {
    const auto d = d_terms(t, x, zeta, sigma);
    if (zeta >= x) return std::exp(x) * norm_cdf(d.plus) - std::exp(zeta) * norm_cdf(d.minus);
    return std::exp(zeta) * norm_cdf(-d.minus) - std::exp(x) * norm_cdf(-d.plus);
}

}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double bs_price(double t, double x, double zeta, double sigma) {
    check_inputs(t, x, zeta, sigma);
    const auto d = d_terms(t, x, zeta, sigma);
    return std::exp(x) * norm_cdf(d.plus) - std::exp(zeta) * norm_cdf(d.minus);
}

double bs_vega(double t, double x, double zeta, double sigma) {
    check_inputs(t, x, zeta, sigma);
    const auto d = d_terms(t, x, zeta, sigma);
    return std::sqrt(t / (2.0 * std::numbers::pi)) * std::exp(x - 0.5 * d.plus * d.plus);
}

double bs_gamma_minus_delta(double t, double x, double zeta, double sigma) {
    check_inputs(t, x, zeta, sigma);
    const auto d = d_terms(t, x, zeta, sigma);
    return std::exp(x - 0.5 * d.plus * d.plus) / (sigma * std::sqrt(2.0 * std::numbers::pi * t));
}

double bs_vomma_ratio(double t, double x, double zeta, double sigma) {
    check_inputs(t, x, zeta, sigma);
    const auto d = d_terms(t, x, zeta, sigma);
    return d.plus * d.minus / sigma;
}

double bs_ultima_ratio(double t, double x, double zeta, double sigma) {
    check_inputs(t, x, zeta, sigma);
    const auto [p, m] = d_terms(t, x, zeta, sigma);
    return (p * p * m * m - p * p - m * m - p * m) / (sigma * sigma);
}

double implied_vol(double price, double t, double x, double zeta) {
    check_inputs(t, x, zeta, 1.0);
    require_finite(price, "price");
    const double intrinsic = std::max(std::exp(x) - std::exp(zeta), 0.0);
    if (!(price > intrinsic) || !(price < std::exp(x))) {
        fail(ErrorKind::DomainViolation, "call price must lie strictly between intrinsic value and e^x");
    }
    // Work on the OTM leg: the call time value equals the OTM option value by parity.
    const double target = price - intrinsic;
    double lo = 1e-8;
    double hi = 10.0;
    if (otm_value(t, x, zeta, hi) < target) fail(ErrorKind::DomainViolation, "price exceeds the vol bracket [1e-8, 10]");
    if (otm_value(t, x, zeta, lo) > target) return lo;

    double sigma = std::clamp(std::sqrt(2.0 * std::abs(x - zeta) / t + 0.04), lo, hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = otm_value(t, x, zeta, sigma) - target;
        if (f == 0.0) return sigma;
        if (f > 0.0) hi = sigma;
        else lo = sigma;
        const double vega = bs_vega(t, x, zeta, sigma);
        double next = sigma - f / vega;
        if (!(vega > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - sigma) <= 4.0 * std::numeric_limits<double>::epsilon() * sigma || hi - lo <= 1e-15 * hi) {
            return next;
        }
        sigma = next;
    }
    fail(ErrorKind::NonConvergence, "implied volatility did not converge in 100 iterations");
}

LagrangeSeries lagrange_iv_series(double u, double t, double x, double zeta, double sigma0, int order) {
    check_inputs(t, x, zeta, sigma0);
    require_finite(u, "u");
    if (order < 1 || order > 3) fail(ErrorKind::DomainViolation, "Lagrange series order must be 1, 2 or 3");
    // b_n from the derivatives of the forward map; with r_k = d^k_sigma u / d_sigma u:
    //   b1 = 1/u', b2 = -r2/u'^2, b3 = (3 r2^2 - r3)/u'^3
    const double v = bs_vega(t, x, zeta, sigma0);
    const double r2 = bs_vomma_ratio(t, x, zeta, sigma0);
    const double r3 = bs_ultima_ratio(t, x, zeta, sigma0);
    const double du = u - bs_price(t, x, zeta, sigma0);
    const double b[3] = {1.0 / v, -r2 / (v * v), (3.0 * r2 * r2 - r3) / (v * v * v)};
    LagrangeSeries out;
    out.sigma = sigma0;
    double power = 1.0;
    double fact = 1.0;
    for (int n = 1; n <= order; ++n) {
        power *= du;
        fact *= n;
        const double term = b[n - 1] * power / fact;
        out.terms.push_back(term);
        out.sigma += term;
    }
    if (order >= 2) {
        const double last = std::abs(out.terms[static_cast<std::size_t>(order - 1)]);
        const double prev = std::abs(out.terms[static_cast<std::size_t>(order - 2)]);
        if (last > prev && prev > 1e-12 * sigma0) {
            fail(ErrorKind::NonConvergence, "Lagrange series terms grow; |u - u_BS| is outside the contraction region");
        }
    }
    return out;
}

}  // namespace ivexp
