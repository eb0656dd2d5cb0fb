#include "ivexp/models.hpp"

#include "ivexp/blackscholes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ivexp {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::DomainViolation, std::string(what) + " must be > 0");
}

// int z nu(dz) over the whole line.
double first_moment(const MertonParams& p) { return p.alpha * p.jump_mean; }
double first_moment(const VarianceGammaParams& p) { return p.alpha * (1.0 / p.M - 1.0 / p.G); }

// int_{|z|>=1} z nu(dz)
double tail_first_moment(const MertonParams& p) {
    const double m = p.jump_mean;
    const double s = p.jump_stdev;
    const double u1 = (1.0 - m) / s;
    const double u2 = (-1.0 - m) / s;
    const double upper = m * norm_cdf(-u1) + s * norm_pdf(u1);
    const double lower = m * norm_cdf(u2) - s * norm_pdf(u2);
    return p.alpha * (upper + lower);
}

double tail_first_moment(const VarianceGammaParams& p) {
    return p.alpha * (std::exp(-p.M) / p.M - std::exp(-p.G) / p.G);
}

// int nu(dz) (e^{i lambda z} - 1)
Complex jump_transform(Complex lambda, const MertonParams& p) {
    const double s2 = p.jump_stdev * p.jump_stdev;
    return p.alpha * (std::exp(kI * p.jump_mean * lambda - 0.5 * s2 * lambda * lambda) - 1.0);
}

Complex jump_transform(Complex lambda, const VarianceGammaParams& p) {
    const double im = lambda.imag();
    if (!(im > -p.M && im < p.G)) {
        fail(ErrorKind::ContourViolation, "Variance Gamma exponent requires Im(lambda) in (-M, G)");
    }
    return p.alpha * (-std::log(1.0 - kI * lambda / p.M) - std::log(1.0 + kI * lambda / p.G));
}

template <class P>
double drift_of(const P& p) {
    // mu = -a^2/2 - int nu(dz) (e^z - 1 - z 1_{|z|<1})
    const double exp_moment = jump_transform(Complex(0.0, -1.0), p).real();
    const double truncated_first = first_moment(p) - tail_first_moment(p);
    return -0.5 * p.a * p.a - (exp_moment - truncated_first);
}

template <class P>
Complex levy_phi(double t, Complex lambda, const P& p) {
    require_finite(lambda, "lambda");
    const double mu = drift_of(p);
    const double truncated_first = first_moment(p) - tail_first_moment(p);
    const Complex exponent = kI * mu * lambda - 0.5 * p.a * p.a * lambda * lambda + jump_transform(lambda, p)
        - kI * lambda * truncated_first;
    return t * exponent;
}

}  // namespace

double StripHint::distance_to_boundary() const { return std::min(-lower, upper); }

void validate(const MertonParams& p) {
    if (!(p.a >= 0.0) || !std::isfinite(p.a)) fail(ErrorKind::DomainViolation, "Merton diffusion a must be >= 0");
    require_positive(p.alpha, "Merton intensity alpha");
    require_positive(p.jump_stdev, "Merton jump stdev s");
    require_finite(p.jump_mean, "Merton jump mean m");
}

void validate(const VarianceGammaParams& p) {
    if (!(p.a >= 0.0) || !std::isfinite(p.a)) fail(ErrorKind::DomainViolation, "VG diffusion a must be >= 0");
    require_positive(p.alpha, "VG alpha");
    require_positive(p.G, "VG G");
    require_positive(p.M, "VG M");
    if (!(p.M > 1.0)) fail(ErrorKind::DomainViolation, "VG requires M > 1 for E[e^X] < infinity");
}

void validate(const HestonParams& p) {
    require_positive(p.kappa, "Heston kappa");
    require_positive(p.theta, "Heston theta");
    require_positive(p.delta, "Heston delta");
    require_positive(p.y, "Heston initial variance y");
    if (!(p.rho >= -1.0 && p.rho <= 1.0)) fail(ErrorKind::DomainViolation, "Heston rho must lie in [-1, 1]");
}

void validate(const LevyTriplet& triplet) {
    std::visit([](const auto& p) { validate(p); }, triplet);
}

double levy_drift(const LevyTriplet& triplet) {
    validate(triplet);
    return std::visit([](const auto& p) { return drift_of(p); }, triplet);
}

double diffusion_variance(const LevyTriplet& triplet) {
    return std::visit([](const auto& p) { return p.a * p.a; }, triplet);
}

Complex phi_bs(Complex lambda, double sigma0) {
    if (!(sigma0 > 0.0)) fail(ErrorKind::DomainViolation, "sigma0 must be > 0");
    return -0.5 * sigma0 * sigma0 * (lambda * lambda + kI * lambda);
}

Complex phi_merton(double t, Complex lambda, const MertonParams& p) {
    validate(p);
    return levy_phi(t, lambda, p);
}

Complex phi_vg(double t, Complex lambda, const VarianceGammaParams& p) {
    validate(p);
    return levy_phi(t, lambda, p);
}

Complex phi_heston(double t, Complex lambda, const HestonParams& p) {
    validate(p);
    require_finite(lambda, "lambda");
    const double d2 = p.delta * p.delta;
    const Complex beta = p.kappa - kI * p.rho * p.delta * lambda;
    // principal square root keeps Re(d) >= 0
    const Complex d = std::sqrt(d2 * (lambda * lambda + kI * lambda) + beta * beta);
    const Complex gamma = (beta - d) / (beta + d);
    const Complex e = std::exp(-d * t);
    const Complex D = (beta - d) / d2 * (1.0 - e) / (1.0 - gamma * e);
    const Complex C = p.kappa * p.theta / d2 * ((beta - d) * t - 2.0 * std::log((1.0 - gamma * e) / (1.0 - gamma)));
    const Complex out = C + p.y * D;
    if (!is_finite(out)) {
        fail(ErrorKind::ContourViolation, "Heston exponent is not finite at this lambda (branch or moment explosion)");
    }
    return out;
}

BlackScholesModel::BlackScholesModel(double sigma) : sigma_(sigma) { require_positive(sigma, "Black-Scholes sigma"); }

Complex BlackScholesModel::phi(double t, Complex lambda) const { return t * phi_bs(lambda, sigma_); }

MertonModel::MertonModel(const MertonParams& p) : p_(p) { validate(p_); }

Complex MertonModel::phi(double t, Complex lambda) const { return levy_phi(t, lambda, p_); }

VarianceGammaModel::VarianceGammaModel(const VarianceGammaParams& p) : p_(p) { validate(p_); }

Complex VarianceGammaModel::phi(double t, Complex lambda) const { return levy_phi(t, lambda, p_); }

HestonModel::HestonModel(const HestonParams& p) : p_(p) { validate(p_); }

Complex HestonModel::phi(double t, Complex lambda) const { return phi_heston(t, lambda, p_); }

ExpansionCoefficients::ExpansionCoefficients(double t, double sigma0, std::vector<double> a_from_2)
    : t_(t), sigma0_(sigma0), a_(std::move(a_from_2)) {
    if (a_.empty()) fail(ErrorKind::DomainViolation, "expansion coefficients need m >= 2");
    for (double v : a_) require_finite(v, "expansion coefficient");
}

double ExpansionCoefficients::operator[](int k) const {
    if (k < 2 || k > max_order()) return 0.0;
    return a_[static_cast<std::size_t>(k - 2)];
}

std::vector<double> levy_moments(const LevyTriplet& triplet, int n_max) {
    if (n_max < 2) fail(ErrorKind::DomainViolation, "levy_moments needs n_max >= 2");
    validate(triplet);
    std::vector<double> I(static_cast<std::size_t>(n_max), 0.0);
    if (const auto* p = std::get_if<MertonParams>(&triplet)) {
        // raw Gaussian moments: E Z^n = m E Z^{n-1} + (n-1) s^2 E Z^{n-2}
        const double m = p->jump_mean;
        const double s2 = p->jump_stdev * p->jump_stdev;
        double prev2 = 1.0;
        double prev1 = m;
        I[0] = tail_first_moment(*p);
        for (int n = 2; n <= n_max; ++n) {
            const double cur = m * prev1 + (n - 1) * s2 * prev2;
            I[static_cast<std::size_t>(n - 1)] = p->alpha * cur;
            prev2 = prev1;
            prev1 = cur;
        }
    } else {
        const auto& vg = std::get<VarianceGammaParams>(triplet);
        I[0] = tail_first_moment(vg);
        double fact = 1.0;  // (n-1)!
        for (int n = 2; n <= n_max; ++n) {
            fact *= (n - 1);
            const double v =
                vg.alpha * fact * (std::pow(vg.M, -n) + ((n % 2 == 0) ? 1.0 : -1.0) * std::pow(vg.G, -n));
            if (!std::isfinite(v)) fail(ErrorKind::DomainViolation, "Levy moment I_n is infinite");
            I[static_cast<std::size_t>(n - 1)] = v;
        }
    }
    return I;
}

ExpansionCoefficients levy_coefficients(const LevyTriplet& triplet, double t, double sigma0, int m) {
    if (m < 2) fail(ErrorKind::DomainViolation, "truncation order m must be >= 2");
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "t must be > 0");
    if (!(sigma0 > 0.0)) fail(ErrorKind::DomainViolation, "sigma0 must be > 0");
    const auto I = levy_moments(triplet, m);
    std::vector<double> a(static_cast<std::size_t>(m - 1));
    a[0] = 0.5 * t * (diffusion_variance(triplet) - sigma0 * sigma0 + I[1]);
    double fact = 2.0;
    for (int n = 3; n <= m; ++n) {
        fact *= n;
        a[static_cast<std::size_t>(n - 2)] = t * I[static_cast<std::size_t>(n - 1)] / fact;
    }
    return {t, sigma0, std::move(a)};
}

double heston_a2(double t, double sigma0, const HestonParams& p) {
    validate(p);
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "t must be > 0");
    const double k = p.kappa;
    const double th = p.theta;
    const double de = p.delta;
    const double rho = p.rho;
    const double y = p.y;
    const double k3 = 16.0 * k * k * k;
    const double transient = (4.0 * std::exp(-k * t)
                                  * (2.0 * (th - y) * k * k + 2.0 * (y + y * k * t - th * (2.0 + k * t)) * k * rho * de
                                     + (th + (th - y) * k * t) * de * de)
                              - std::exp(-2.0 * k * t) * (2.0 * y - th) * de * de)
        / k3;
    const double stationary = (8.0 * k * k * (y + (k * t - 1.0) * th) - 8.0 * (y + th * (k * t - 2.0)) * k * rho * de
                               - ((5.0 - 2.0 * k * t) * th - 2.0 * y) * de * de)
        / k3;
    return transient + stationary - 0.5 * sigma0 * sigma0 * t;
}

std::vector<Complex> taylor_coefficients(const std::function<Complex(Complex)>& f, double radius, int nodes,
                                         int kmax) {
    if (!(radius > 0.0) || nodes < 2 * (kmax + 1)) {
        fail(ErrorKind::DomainViolation, "Cauchy extractor needs radius > 0 and nodes >= 2 (kmax + 1)");
    }
    std::vector<Complex> values(static_cast<std::size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
        const Complex z = std::polar(radius, 2.0 * std::numbers::pi * j / nodes);
        Complex v;
        try {
            v = f(z);
        } catch (const NumericsError& e) {
            fail(ErrorKind::ContourViolation, "exponent evaluation failed on the Cauchy contour: " + e.detail());
        }
        if (!is_finite(v)) fail(ErrorKind::ContourViolation, "exponent is not finite on the Cauchy contour");
        values[static_cast<std::size_t>(j)] = v;
    }
    std::vector<Complex> c(static_cast<std::size_t>(kmax + 1));
    for (int k = 0; k <= kmax; ++k) {
        Complex acc{};
        for (int j = 0; j < nodes; ++j) {
            acc += values[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * ((j * k) % nodes) / nodes);
        }
        c[static_cast<std::size_t>(k)] = acc / (static_cast<double>(nodes) * std::pow(radius, k));
    }
    return c;
}

namespace {

struct ContourEstimate {
    std::vector<double> a;  // a_0..a_kmax
    double peak = 0.0;      // max |phi_1| on the contour
};

ContourEstimate extract(const CharacteristicModel& model, double t, double sigma0, int kmax, double radius,
                        int nodes) {
    double peak = 0.0;
    auto phi1 = [&](Complex z) {
        const Complex v = model.phi(t, z) - t * phi_bs(z, sigma0);
        peak = std::max(peak, std::abs(v));
        return v;
    };
    const auto c = taylor_coefficients(phi1, radius, nodes, kmax);
    ContourEstimate out;
    out.a.resize(c.size());
    Complex rot{1.0, 0.0};  // (-i)^k
    for (std::size_t k = 0; k < c.size(); ++k) {
        out.a[k] = (rot * c[k]).real();
        rot *= -kI;
    }
    out.peak = peak;
    return out;
}

double effective_radius(const CharacteristicModel& model, const CauchyOptions& opts) {
    const double dist = model.strip().distance_to_boundary();
    return std::min(opts.radius, 0.5 * dist);
}

}  // namespace

ExpansionCoefficients generic_coefficients(const CharacteristicModel& model, double t, double sigma0, int m,
                                           const CauchyOptions& opts) {
    if (m < 2) fail(ErrorKind::DomainViolation, "truncation order m must be >= 2");
    if (!(t > 0.0)) fail(ErrorKind::DomainViolation, "t must be > 0");
    if (!(sigma0 > 0.0)) fail(ErrorKind::DomainViolation, "sigma0 must be > 0");
    const double r = effective_radius(model, opts);
    const auto outer = extract(model, t, sigma0, m, r, opts.nodes);
    const auto inner = extract(model, t, sigma0, m, 0.5 * r, opts.nodes);
    constexpr double kRoundoff = 100.0 * std::numeric_limits<double>::epsilon();
    for (int k = 2; k <= m; ++k) {
        const double a = outer.a[static_cast<std::size_t>(k)];
        const double b = inner.a[static_cast<std::size_t>(k)];
        const double floor = kRoundoff * inner.peak / std::pow(0.5 * r, k);
        if (std::abs(a - b) > opts.rel_tol * std::abs(a) + floor) {
            fail(ErrorKind::NonConvergence, "Cauchy estimates of a_" + std::to_string(k) + " disagree between radii "
                                                + std::to_string(r) + " and " + std::to_string(0.5 * r));
        }
    }
    return {t, sigma0, std::vector<double>(outer.a.begin() + 2, outer.a.end())};
}

double generic_a1(const CharacteristicModel& model, double t, double sigma0, const CauchyOptions& opts) {
    const double r = effective_radius(model, opts);
    return extract(model, t, sigma0, 1, r, opts.nodes).a[1];
}

}  // namespace ivexp
