#pragma once

#include "ivexp/models.hpp"

#include <span>
#include <vector>

namespace ivexp {

/// Integration contour Im(lambda) = lambda_i for the inverse transform.
/// truncation <= 0 selects the adaptive window.
struct ContourSpec {
    double lambda_i = -1.5;
    double truncation = 0.0;
    double tolerance = 1e-10;
};

/// Generalised Fourier transform of the call payoff (e^z - e^zeta)^+,
/// valid for Im(lambda) < -1.
Complex payoff_transform(Complex lambda, double zeta);

struct FourierPrice {
    double price = 0.0;
    double error_estimate = 0.0;  ///< summed quadrature error estimate
    double imag_residual = 0.0;   ///< discarded imaginary part
    double truncation = 0.0;      ///< half-width of the lambda_r window actually used
    double lambda_i = 0.0;
};

/// (1/2 pi) int h^(lambda) e^{i lambda x + phi(t, lambda)} d lambda_r along Im(lambda) = lambda_i.
FourierPrice fourier_call_price(const CharacteristicModel& model, double t, double x, double zeta,
                                const ContourSpec& contour = {});

/// Prices across a strike grid; strikes are priced concurrently with OpenMP.
std::vector<FourierPrice> fourier_call_prices(const CharacteristicModel& model, double t, double x,
                                              std::span<const double> zetas, const ContourSpec& contour = {});

/// Serial reference for fourier_call_prices.
std::vector<FourierPrice> fourier_call_prices_serial(const CharacteristicModel& model, double t, double x,
                                                     std::span<const double> zetas,
                                                     const ContourSpec& contour = {});

/// Implied volatility of the Fourier price ("true" smile).
double oracle_implied_vol(const CharacteristicModel& model, double t, double x, double zeta,
                          const ContourSpec& contour = {});

}  // namespace ivexp
