#pragma once

#include "ivexp/core.hpp"

#include <vector>

namespace ivexp {

// Zero rates, no dividends: a call on e^X with strike e^zeta.

double norm_cdf(double z);
double norm_pdf(double z);

/// e^x N(d+) - e^zeta N(d-), d+- = (x - zeta +- sigma^2 t / 2) / (sigma sqrt t).
double bs_price(double t, double x, double zeta, double sigma);

/// dC/dsigma = sqrt(t / 2 pi) exp(x - d+^2 / 2).
double bs_vega(double t, double x, double zeta, double sigma);

/// (d^2_x - d_x) C = exp(x - d+^2 / 2) / (sigma sqrt(2 pi t)).
double bs_gamma_minus_delta(double t, double x, double zeta, double sigma);

/// Closed-form d^n_sigma C / d_sigma C for n = 2, 3 in terms of d+ and d-.
double bs_vomma_ratio(double t, double x, double zeta, double sigma);
double bs_ultima_ratio(double t, double x, double zeta, double sigma);

/// Black-Scholes implied volatility. Bisection-safeguarded Newton on the
/// out-of-the-money time value inside [1e-8, 10].
double implied_vol(double price, double t, double x, double zeta);

struct LagrangeSeries {
    double sigma = 0.0;
    std::vector<double> terms;  ///< b_n (u - u_BS)^n / n!, n = 1..order
};

/// Lagrange inversion of the Black-Scholes price around sigma0, truncated at
/// order <= 3. Diagnostic only: there is no computable radius of convergence.
/// Throws NonConvergence when the last term is larger than the one before it.
LagrangeSeries lagrange_iv_series(double u, double t, double x, double zeta, double sigma0, int order);

}  // namespace ivexp
