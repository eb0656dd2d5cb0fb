#pragma once

#include "ivexp/core.hpp"
#include "ivexp/models.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ivexp {

/// Physicists' Hermite polynomial H_n(y) by the three-term recursion.
double hermite(int n, double y);

/// H_0(y)..H_N(y) at a fixed y.
class HermiteCache {
public:
    HermiteCache(double y, int max_degree);

    double y() const { return y_; }
    int max_degree() const { return static_cast<int>(values_.size()) - 1; }
    double operator[](int n) const { return values_[static_cast<std::size_t>(n)]; }

private:
    double y_;
    std::vector<double> values_;
};

/// Triangular table c_{n, n-2q} of the expansion
///   d^n_sigma u_BS = sum_q c_{n,n-2q} sigma^{n-2q} L^{n-q} u_BS,  L = t (d^2_x - d_x),
/// with c_{n,n} = 1 and c_{n,n-2q} = (n-2q+1) c_{n-1,n-2q+1} + c_{n-1,n-2q-1}.
class CCoefficients {
public:
    static constexpr int kMaxOrder = 30;

    explicit CCoefficients(int max_order);

    int max_order() const { return static_cast<int>(rows_.size()) - 1; }
    /// c_{n,j}; zero when j is out of range or has the wrong parity.
    std::uint64_t operator()(int n, int j) const;

private:
    // rows_[n][q] = c_{n, n-2q}
    std::vector<std::vector<std::uint64_t>> rows_;
};

CCoefficients c_table(int max_order);

/// d^n_sigma u_BS / d_sigma u_BS at (t, x, zeta, sigma0) via Hermite polynomials in y0.
double bs_derivative_ratio(int n, const SmileContext& ctx);

/// d^m_x (d^n_x - d_x) u_BS / ((d^2_x - d_x) u_BS) = sum_{i=2}^{n} (-1/s)^{m+i-2} H_{m+i-2}(y0),
/// s = sigma0 sqrt(2t).
double derivative_ratio_lemma(int m, int n, const SmileContext& ctx);

/// Weights w_M such that
///   u_n^(m) / d_sigma u_BS = (1 / (n! t sigma0)) sum_M w_M (-1/s)^M H_M(y0).
/// The weights depend only on a_2..a_m, not on the strike.
class UTermPolynomial {
public:
    UTermPolynomial(int n, const ExpansionCoefficients& coeffs, int m);

    int order() const { return n_; }
    const std::vector<double>& weights() const { return weights_; }
    double evaluate(const SmileContext& ctx, const HermiteCache& hermite) const;

private:
    int n_;
    std::vector<double> weights_;
};

/// u_n^(m) / d_sigma u_BS.
double u_ratio(int n, int m, const ExpansionCoefficients& coeffs, const SmileContext& ctx);

/// Sigma_k^(m) = sum_{n=2}^{k} (1/n!) (sum over compositions j_1+..+j_n = k of prod sigma_{j_i})
///               d^n_sigma u_BS / d_sigma u_BS.
/// lower_sigmas[j-1] holds sigma_j^(m) for j < k.
double sigma_correction(int k, std::span<const double> lower_sigmas, const SmileContext& ctx);

struct SmileApproximation {
    SmileContext context;
    ExpansionOrder order;
    std::vector<double> sigma_terms;  ///< sigma_1^(m) .. sigma_n^(m)
    double total = 0.0;               ///< sigma^(n,m)
    bool flagged = false;             ///< total <= 0: outside the expansion's accuracy region
};

/// Precomputed U-term polynomials for fixed coefficients; evaluating a strike is
/// then a Hermite recursion plus a few short sums.
class SmileEngine {
public:
    SmileEngine(ExpansionCoefficients coeffs, ExpansionOrder order);

    const ExpansionCoefficients& coefficients() const { return coeffs_; }
    const ExpansionOrder& order() const { return order_; }

    SmileApproximation evaluate(double x, double zeta) const;

private:
    ExpansionCoefficients coeffs_;
    ExpansionOrder order_;
    std::vector<UTermPolynomial> u_terms_;
};

/// sigma^(n,m) = sigma0 + sum_k (U_k^(m) - Sigma_k^(m)). The context's t and sigma0
/// must match the coefficients'.
SmileApproximation smile_point(const ExpansionCoefficients& coeffs, const ExpansionOrder& order,
                               const SmileContext& ctx);

/// Uses model_coefficients, then evaluates.
SmileApproximation smile_point(const CharacteristicModel& model, const ExpansionOrder& order,
                               const SmileContext& ctx);

/// a_2..a_m for the model: closed form for Merton and variance gamma, the
/// Cauchy extractor otherwise.
ExpansionCoefficients model_coefficients(const CharacteristicModel& model, double t, double sigma0, int m);

/// One coefficient extraction per (t, sigma0), then the grid is evaluated in parallel.
std::vector<SmileApproximation> smile_curve(const CharacteristicModel& model, const ExpansionOrder& order,
                                            double t, double x, std::span<const double> zeta_grid,
                                            double sigma0);
std::vector<SmileApproximation> smile_curve(const ExpansionCoefficients& coeffs, const ExpansionOrder& order,
                                            double x, std::span<const double> zeta_grid);

/// Serial reference for smile_curve.
std::vector<SmileApproximation> smile_curve_serial(const ExpansionCoefficients& coeffs,
                                                   const ExpansionOrder& order, double x,
                                                   std::span<const double> zeta_grid);

}  // namespace ivexp
