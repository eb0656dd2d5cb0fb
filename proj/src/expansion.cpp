#include "ivexp/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace ivexp {

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Coefficients of p * q as polynomials in one variable.
std::vector<double> poly_mul(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    }
    return r;
}

const CCoefficients& shared_c_table() {
    static const CCoefficients table(CCoefficients::kMaxOrder);
    return table;
}

void check_context(const ExpansionCoefficients& coeffs, const SmileContext& ctx) {
    if (std::abs(coeffs.t() - ctx.t()) > 1e-14 * std::max(1.0, ctx.t()) ||
        std::abs(coeffs.sigma0() - ctx.sigma0()) > 1e-14 * std::max(1.0, ctx.sigma0())) {
        fail(ErrorKind::DomainViolation, "coefficients were computed for a different (t, sigma0)");
    }
}

double ratio_from_cache(int n, const SmileContext& ctx, const HermiteCache& h) {
    if (n == 1) return 1.0;
    const auto& c = shared_c_table();
    const double t = ctx.t();
    const double s0 = ctx.sigma0();
    const double r2t = std::sqrt(2.0 * t);
    double sum = 0.0;
    for (int q = 0; 2 * q <= n; ++q) {
        const double cq = static_cast<double>(c(n, n - 2 * q));
        if (cq == 0.0) continue;
        for (int p = 0; p <= n - q - 1; ++p) {
            sum += binomial(n - q - 1, p) * cq * std::pow(s0, -(q + p)) * std::pow(t, n - q - 1) *
                   std::pow(r2t, 1 - p - n + q) * h[p + n - q - 1];
        }
    }
    return sum;
}

// Coefficients of (sum_j s_j z^j)^n restricted to degree <= k, s_j = lower[j-1].
std::vector<double> composition_sums(std::span<const double> lower, int n, int k) {
    std::vector<double> base(static_cast<std::size_t>(k) + 1, 0.0);
    for (int j = 1; j < k && j <= static_cast<int>(lower.size()); ++j) base[j] = lower[j - 1];
    std::vector<double> acc(static_cast<std::size_t>(k) + 1, 0.0);
    acc[0] = 1.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> next(static_cast<std::size_t>(k) + 1, 0.0);
        for (int a = 0; a <= k; ++a) {
            if (acc[a] == 0.0) continue;
            for (int b = 1; a + b <= k; ++b) next[a + b] += acc[a] * base[b];
        }
        acc = std::move(next);
    }
    return acc;
}

double sigma_correction_cached(int k, std::span<const double> lower, const SmileContext& ctx,
                               const HermiteCache& h) {
    double sum = 0.0;
    for (int n = 2; n <= k; ++n) {
        const auto comp = composition_sums(lower, n, k);
        if (comp[k] == 0.0) continue;
        sum += comp[k] / factorial(n) * ratio_from_cache(n, ctx, h);
    }
    return sum;
}

}  // namespace

double hermite(int n, double y) {
    if (n < 0) fail(ErrorKind::DomainViolation, "Hermite degree must be non-negative");
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = 2.0 * y;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * y * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

HermiteCache::HermiteCache(double y, int max_degree) : y_(y) {
    if (max_degree < 0) fail(ErrorKind::DomainViolation, "Hermite degree must be non-negative");
    values_.resize(static_cast<std::size_t>(max_degree) + 1);
    values_[0] = 1.0;
    if (max_degree >= 1) values_[1] = 2.0 * y;
    for (int k = 1; k < max_degree; ++k) values_[k + 1] = 2.0 * y * values_[k] - 2.0 * k * values_[k - 1];
}

CCoefficients::CCoefficients(int max_order) {
    if (max_order < 1 || max_order > kMaxOrder) {
        fail(ErrorKind::DomainViolation, "c-table order must be in [1, " + std::to_string(kMaxOrder) + "]");
    }
    rows_.resize(static_cast<std::size_t>(max_order) + 1);
    rows_[0] = {1};
    rows_[1] = {1};
    for (int n = 2; n <= max_order; ++n) {
        auto& row = rows_[n];
        row.assign(static_cast<std::size_t>(n / 2) + 1, 0);
        for (int q = 0; 2 * q <= n; ++q) {
            const int j = n - 2 * q;
            row[q] = static_cast<std::uint64_t>(j + 1) * (*this)(n - 1, j + 1) + (*this)(n - 1, j - 1);
        }
    }
}

std::uint64_t CCoefficients::operator()(int n, int j) const {
    if (n < 0 || n > max_order() || j < 0 || j > n || (n - j) % 2 != 0) return 0;
    const auto& row = rows_[n];
    const auto q = static_cast<std::size_t>((n - j) / 2);
    return q < row.size() ? row[q] : 0;
}

CCoefficients c_table(int max_order) { return CCoefficients(max_order); }

double bs_derivative_ratio(int n, const SmileContext& ctx) {
    if (n < 1 || n > CCoefficients::kMaxOrder) fail(ErrorKind::DomainViolation, "derivative order out of range");
    HermiteCache h(ctx.y0(), std::max(0, 2 * n - 2));
    return ratio_from_cache(n, ctx, h);
}

double derivative_ratio_lemma(int m, int n, const SmileContext& ctx) {
    if (m < 0 || n < 2) fail(ErrorKind::DomainViolation, "lemma ratio needs m >= 0 and n >= 2");
    HermiteCache h(ctx.y0(), m + n - 2);
    const double c = -1.0 / ctx.scale();
    double sum = 0.0;
    for (int i = 2; i <= n; ++i) sum += std::pow(c, m + i - 2) * h[m + i - 2];
    return sum;
}

UTermPolynomial::UTermPolynomial(int n, const ExpansionCoefficients& coeffs, int m) : n_(n) {
    if (n < 1) fail(ErrorKind::DomainViolation, "U-term order must be >= 1");
    if (m < 2 || m > coeffs.max_order()) fail(ErrorKind::DomainViolation, "truncation order exceeds coefficients");
    if (n * m > 64) fail(ErrorKind::DomainViolation, "n * m too large for the U-term enumeration");

    // K_j(D) = D^2 + ... + D^j; the k-sums over a tuple (j_1..j_n) are the
    // coefficients of prod K_{j_i}.  Tuples are enumerated as multisets.
    std::vector<double> sumk(static_cast<std::size_t>(n * m) + 1, 0.0);
    std::vector<int> js(static_cast<std::size_t>(n), 2);
    const double nfact = factorial(n);
    while (true) {
        double a_prod = 1.0;
        for (int j : js) a_prod *= coeffs[j];
        if (a_prod != 0.0) {
            double mult = nfact;
            for (std::size_t i = 0; i < js.size();) {
                std::size_t r = i;
                while (r < js.size() && js[r] == js[i]) ++r;
                mult /= factorial(static_cast<int>(r - i));
                i = r;
            }
            std::vector<double> poly{1.0};
            for (int j : js) {
                std::vector<double> kj(static_cast<std::size_t>(j) + 1, 0.0);
                for (int k = 2; k <= j; ++k) kj[k] = 1.0;
                poly = poly_mul(poly, kj);
            }
            for (std::size_t e = 0; e < poly.size(); ++e) sumk[e] += mult * a_prod * poly[e];
        }
        int pos = n - 1;
        while (pos >= 0 && js[pos] == m) --pos;
        if (pos < 0) break;
        ++js[pos];
        for (int i = pos + 1; i < n; ++i) js[i] = js[pos];
    }

    // M = sum k_i - n - 1 + l, weighted by C(n-1, l) (-1)^{n-1-l}.
    weights_.assign(static_cast<std::size_t>(n * m), 0.0);
    for (std::size_t e = 0; e < sumk.size(); ++e) {
        if (sumk[e] == 0.0) continue;
        for (int l = 0; l <= n - 1; ++l) {
            const int M = static_cast<int>(e) - n - 1 + l;
            if (M < 0) continue;
            const double sign = ((n - 1 - l) % 2 == 0) ? 1.0 : -1.0;
            weights_[M] += sumk[e] * binomial(n - 1, l) * sign;
        }
    }
    while (!weights_.empty() && weights_.back() == 0.0) weights_.pop_back();
}

double UTermPolynomial::evaluate(const SmileContext& ctx, const HermiteCache& hermite) const {
    if (weights_.empty()) return 0.0;
    if (hermite.max_degree() + 1 < static_cast<int>(weights_.size())) {
        fail(ErrorKind::DomainViolation, "Hermite cache too short for U-term");
    }
    const double c = -1.0 / ctx.scale();
    double sum = 0.0;
    double cp = 1.0;
    for (std::size_t M = 0; M < weights_.size(); ++M) {
        sum += weights_[M] * cp * hermite[static_cast<int>(M)];
        cp *= c;
    }
    return sum / (factorial(n_) * ctx.t() * ctx.sigma0());
}

double u_ratio(int n, int m, const ExpansionCoefficients& coeffs, const SmileContext& ctx) {
    check_context(coeffs, ctx);
    UTermPolynomial poly(n, coeffs, m);
    HermiteCache h(ctx.y0(), std::max<int>(1, static_cast<int>(poly.weights().size())));
    return poly.evaluate(ctx, h);
}

double sigma_correction(int k, std::span<const double> lower_sigmas, const SmileContext& ctx) {
    if (k < 1) fail(ErrorKind::DomainViolation, "correction order must be >= 1");
    if (static_cast<int>(lower_sigmas.size()) < k - 1) {
        fail(ErrorKind::DomainViolation, "sigma_correction needs sigma_1..sigma_{k-1}");
    }
    HermiteCache h(ctx.y0(), std::max(0, 2 * k - 2));
    return sigma_correction_cached(k, lower_sigmas, ctx, h);
}

SmileEngine::SmileEngine(ExpansionCoefficients coeffs, ExpansionOrder order)
    : coeffs_(std::move(coeffs)), order_(order) {
    if (order_.m > coeffs_.max_order()) fail(ErrorKind::DomainViolation, "truncation order exceeds coefficients");
    if (order_.n > CCoefficients::kMaxOrder / 2) fail(ErrorKind::DomainViolation, "series order too large");
    u_terms_.reserve(static_cast<std::size_t>(order_.n));
    for (int k = 1; k <= order_.n; ++k) u_terms_.emplace_back(k, coeffs_, order_.m);
}

SmileApproximation SmileEngine::evaluate(double x, double zeta) const {
    SmileContext ctx(coeffs_.t(), x, zeta, coeffs_.sigma0());
    const int degree = std::max(2 * order_.n - 2, order_.n * order_.m);
    HermiteCache h(ctx.y0(), degree);

    SmileApproximation out{ctx, order_, {}, 0.0, false};
    out.sigma_terms.reserve(static_cast<std::size_t>(order_.n));
    double total = ctx.sigma0();
    for (int k = 1; k <= order_.n; ++k) {
        const double uk = u_terms_[k - 1].evaluate(ctx, h);
        const double sk = k >= 2 ? sigma_correction_cached(k, out.sigma_terms, ctx, h) : 0.0;
        const double sigma_k = uk - sk;
        require_finite(sigma_k, "sigma term");
        out.sigma_terms.push_back(sigma_k);
        total += sigma_k;
    }
    out.total = total;
    out.flagged = !(total > 0.0);
    return out;
}

SmileApproximation smile_point(const ExpansionCoefficients& coeffs, const ExpansionOrder& order,
                               const SmileContext& ctx) {
    check_context(coeffs, ctx);
    return SmileEngine(coeffs, order).evaluate(ctx.x(), ctx.zeta());
}

ExpansionCoefficients model_coefficients(const CharacteristicModel& model, double t, double sigma0, int m) {
    if (const auto* merton = dynamic_cast<const MertonModel*>(&model)) {
        return levy_coefficients(LevyTriplet{merton->params()}, t, sigma0, m);
    }
    if (const auto* vg = dynamic_cast<const VarianceGammaModel*>(&model)) {
        return levy_coefficients(LevyTriplet{vg->params()}, t, sigma0, m);
    }
    return generic_coefficients(model, t, sigma0, m);
}

SmileApproximation smile_point(const CharacteristicModel& model, const ExpansionOrder& order,
                               const SmileContext& ctx) {
    return smile_point(model_coefficients(model, ctx.t(), ctx.sigma0(), order.m), order, ctx);
}

std::vector<SmileApproximation> smile_curve(const CharacteristicModel& model, const ExpansionOrder& order,
                                            double t, double x, std::span<const double> zeta_grid,
                                            double sigma0) {
    return smile_curve(model_coefficients(model, t, sigma0, order.m), order, x, zeta_grid);
}

std::vector<SmileApproximation> smile_curve(const ExpansionCoefficients& coeffs, const ExpansionOrder& order,
                                            double x, std::span<const double> zeta_grid) {
    const SmileEngine engine(coeffs, order);
    const auto n = static_cast<std::ptrdiff_t>(zeta_grid.size());
    std::vector<SmileApproximation> out(zeta_grid.size(),
                                        SmileApproximation{SmileContext(coeffs.t(), x, 0.0, coeffs.sigma0()),
                                                           order, {}, 0.0, false});
    std::ptrdiff_t first_index = n;
    std::string first_error;
    ErrorKind first_kind = ErrorKind::DomainViolation;
    std::mutex guard;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i] = engine.evaluate(x, zeta_grid[i]);
        } catch (const NumericsError& e) {
            std::lock_guard lock(guard);
            if (i < first_index) {
                first_index = i;
                first_error = e.detail();
                first_kind = e.kind();
            }
        }
    }
    if (first_index < n) fail(first_kind, first_error);
    return out;
}

std::vector<SmileApproximation> smile_curve_serial(const ExpansionCoefficients& coeffs,
                                                   const ExpansionOrder& order, double x,
                                                   std::span<const double> zeta_grid) {
    const SmileEngine engine(coeffs, order);
    std::vector<SmileApproximation> out;
    out.reserve(zeta_grid.size());
    for (double zeta : zeta_grid) out.push_back(engine.evaluate(x, zeta));
    return out;
}

}  // namespace ivexp
