#pragma once

#include "ivexp/core.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace ivexp {

/// Admissible range of Im(lambda) for a characteristic exponent. Infinite
/// bounds mean the exponent is entire in that direction.
struct StripHint {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double im) const { return im > lower && im < upper; }
    /// Distance from the real axis to the nearest bound.
    double distance_to_boundary() const;
};

// ---------------------------------------------------------------------------
// Parameter records

/// Merton jump diffusion: diffusion vol `a` and Gaussian jumps with intensity
/// `alpha`, mean `jump_mean` and standard deviation `jump_stdev`.
struct MertonParams {
    double a = 0.0;
    double alpha = 0.0;
    double jump_mean = 0.0;
    double jump_stdev = 0.0;
};

/// Variance Gamma with Levy density alpha (e^{G z}/(-z) 1_{z<0} + e^{-M z}/z 1_{z>0}).
/// The diffusion part `a` is normally zero for this infinite-activity model.
struct VarianceGammaParams {
    double a = 0.0;
    double alpha = 0.0;
    double G = 0.0;
    double M = 0.0;
};

struct HestonParams {
    double kappa = 0.0;
    double theta = 0.0;
    double delta = 0.0;  ///< vol of vol
    double rho = 0.0;
    double y = 0.0;      ///< initial variance
};

/// A Levy triplet whose drift is fixed by the martingale condition.
using LevyTriplet = std::variant<MertonParams, VarianceGammaParams>;

void validate(const MertonParams& p);
void validate(const VarianceGammaParams& p);
void validate(const HestonParams& p);
void validate(const LevyTriplet& triplet);

/// Drift mu of the triplet (mu, a^2, nu) with the 1_{|z|<1} truncation.
double levy_drift(const LevyTriplet& triplet);
/// Diffusion variance a^2 of the triplet.
double diffusion_variance(const LevyTriplet& triplet);

// ---------------------------------------------------------------------------
// Characteristic exponents phi(t, lambda), with E[e^{i lambda X_t}] = e^{i lambda x + phi}.

/// Black-Scholes exponent per unit time: -sigma0^2 (lambda^2 + i lambda) / 2.
Complex phi_bs(Complex lambda, double sigma0);
Complex phi_merton(double t, Complex lambda, const MertonParams& p);
Complex phi_vg(double t, Complex lambda, const VarianceGammaParams& p);
/// Heston exponent C(t, lambda) + y D(t, lambda), "little trap" form with Re d >= 0.
Complex phi_heston(double t, Complex lambda, const HestonParams& p);

class CharacteristicModel {
public:
    virtual ~CharacteristicModel() = default;

    virtual Complex phi(double t, Complex lambda) const = 0;
    virtual std::string name() const = 0;
    virtual StripHint strip() const { return {}; }
};

using ModelPtr = std::shared_ptr<const CharacteristicModel>;

class BlackScholesModel final : public CharacteristicModel {
public:
    explicit BlackScholesModel(double sigma);
    Complex phi(double t, Complex lambda) const override;
    std::string name() const override { return "black_scholes"; }
    double sigma() const { return sigma_; }

private:
    double sigma_;
};

class MertonModel final : public CharacteristicModel {
public:
    explicit MertonModel(const MertonParams& p);
    Complex phi(double t, Complex lambda) const override;
    std::string name() const override { return "merton"; }
    const MertonParams& params() const { return p_; }

private:
    MertonParams p_;
};

class VarianceGammaModel final : public CharacteristicModel {
public:
    explicit VarianceGammaModel(const VarianceGammaParams& p);
    Complex phi(double t, Complex lambda) const override;
    std::string name() const override { return "variance_gamma"; }
    StripHint strip() const override { return {-p_.M, p_.G}; }
    const VarianceGammaParams& params() const { return p_; }

private:
    VarianceGammaParams p_;
};

class HestonModel final : public CharacteristicModel {
public:
    explicit HestonModel(const HestonParams& p);
    Complex phi(double t, Complex lambda) const override;
    std::string name() const override { return "heston"; }
    const HestonParams& params() const { return p_; }

private:
    HestonParams p_;
};

// ---------------------------------------------------------------------------
// Expansion coefficients a_k(t; sigma0) of phi_1 = phi - t phi_0.

class ExpansionCoefficients {
public:
    ExpansionCoefficients(double t, double sigma0, std::vector<double> a_from_2);

    double t() const { return t_; }
    double sigma0() const { return sigma0_; }
    /// Truncation order m (largest k with a stored a_k).
    int max_order() const { return static_cast<int>(a_.size()) + 1; }
    /// a_k for 2 <= k <= m, zero otherwise.
    double operator[](int k) const;
    const std::vector<double>& values() const { return a_; }

private:
    double t_;
    double sigma0_;
    std::vector<double> a_;
};

/// I_1 = int_{|z|>=1} z nu(dz) and I_n = int z^n nu(dz) for 2 <= n <= n_max.
/// Element n-1 holds I_n.
std::vector<double> levy_moments(const LevyTriplet& triplet, int n_max);

/// a_2 = t (a^2 - sigma0^2 + I_2) / 2, a_n = t I_n / n! for 3 <= n <= m.
ExpansionCoefficients levy_coefficients(const LevyTriplet& triplet, double t, double sigma0, int m);

/// Closed-form a_2(t; sigma0) for Heston.
double heston_a2(double t, double sigma0, const HestonParams& p);

struct CauchyOptions {
    double radius = 0.5;
    int nodes = 128;
    double rel_tol = 1e-7;
};

/// Complex Taylor coefficients c_0..c_kmax of f around 0 from a trapezoid
/// discretisation of the Cauchy integral on |z| = radius.
std::vector<Complex> taylor_coefficients(const std::function<Complex(Complex)>& f, double radius,
                                         int nodes, int kmax);

/// a_k = (-i)^k / k! d^k phi_1 / d lambda^k at 0, for k = 2..m, by contour
/// integration. Validated against a second contour at half the radius.
ExpansionCoefficients generic_coefficients(const CharacteristicModel& model, double t, double sigma0,
                                           int m, const CauchyOptions& opts = {});

/// a_1 from the same extractor (a_1 + sum_k a_k = 0 by the martingale condition).
double generic_a1(const CharacteristicModel& model, double t, double sigma0,
                  const CauchyOptions& opts = {});

}  // namespace ivexp
