#include "ivexp/blackscholes.hpp"
#include "ivexp/expansion.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ivexp;

namespace {

struct Sample {
    double t, x, zeta, s0;
};

std::vector<Sample> random_samples(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> T(0.1, 3), X(-0.2, 0.2), D(-1.0, 1.0), S(0.1, 0.9);
    std::vector<Sample> out;
    for (int i = 0; i < n; ++i) {
        const double x = X(rng);
        const double t = T(rng);
        out.push_back({t, x, x + D(rng) * std::sqrt(t) * 0.8, S(rng)});
    }
    return out;
}

long double sigma_derivative(const Sample& s, int n, long double h) {
    auto f = [&](long double v) { return oracle::bs_otm(s.t, s.x, s.zeta, v); };
    return oracle::richardson_derivative(f, s.s0, n, h);
}

}  // namespace

TEST(Hermite, BaseCasesAndExamples) {
    EXPECT_EQ(hermite(0, 3.7), 1.0);
    EXPECT_EQ(hermite(2, 0.0), -2.0);
    EXPECT_EQ(hermite(3, 1.0), -4.0);
    EXPECT_THROW(hermite(-1, 0.0), NumericsError);
}

TEST(Hermite, MatchesExplicitSum) {
    for (int n = 0; n <= 20; ++n) {
        for (double y : {-2.3, -0.4, 0.0, 0.9, 3.1}) {
            const double ref = static_cast<double>(oracle::hermite_explicit(n, y));
            EXPECT_NEAR(hermite(n, y), ref, 1e-12 * std::max(1.0, std::abs(ref))) << n << " " << y;
        }
    }
}

TEST(Hermite, MatchesRodriguesDifferentiation) {
    // (-1)^n e^{y^2} d^n/dy^n e^{-y^2}
    for (int n = 1; n <= 4; ++n) {
        for (long double y : {-0.7L, 0.0L, 1.0L}) {
            auto g = [](long double v) { return std::exp(-v * v); };
            const long double d = oracle::richardson_derivative(g, y, n, 1e-3L);
            const double ref = static_cast<double>(((n % 2) ? -1 : 1) * std::exp(y * y) * d);
            EXPECT_NEAR(hermite(n, static_cast<double>(y)), ref, 1e-6 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST(Hermite, CacheAgreesWithScalar) {
    const HermiteCache h(0.37, 25);
    EXPECT_EQ(h.max_degree(), 25);
    for (int n = 0; n <= 25; ++n) EXPECT_EQ(h[n], hermite(n, 0.37));
}

TEST(CTable, BaseValues) {
    const auto c = c_table(5);
    EXPECT_EQ(c(1, 1), 1u);
    EXPECT_EQ(c(2, 2), 1u);
    EXPECT_EQ(c(2, 0), 1u);
    EXPECT_EQ(c(3, 1), 3u);
    EXPECT_EQ(c(3, 2), 0u);
    EXPECT_EQ(c(3, 5), 0u);
}

TEST(CTable, ClosedForm) {
    const auto c = c_table(CCoefficients::kMaxOrder);
    for (int n = 1; n <= CCoefficients::kMaxOrder; ++n) {
        for (int q = 0; 2 * q <= n; ++q) {
            // n! / (2^q q! (n-2q)!) as an exact product
            unsigned __int128 num = 1;
            for (int i = n - 2 * q + 1; i <= n; ++i) num *= static_cast<unsigned>(i);
            unsigned __int128 den = 1;
            for (int i = 1; i <= q; ++i) den *= 2u * static_cast<unsigned>(i);
            EXPECT_EQ(static_cast<unsigned __int128>(c(n, n - 2 * q)), num / den) << n << "," << q;
        }
    }
    EXPECT_THROW(c_table(CCoefficients::kMaxOrder + 1), NumericsError);
}

TEST(DerivativeRatio, FirstOrderIsOne) {
    EXPECT_EQ(bs_derivative_ratio(1, SmileContext(0.4, 0.1, -0.3, 0.25)), 1.0);
}

TEST(DerivativeRatio, SecondOrderIdentity) {
    for (const auto& s : random_samples(100, 1)) {
        const SmileContext ctx(s.t, s.x, s.zeta, s.s0);
        const double d = s.zeta - s.x;
        const double target = d * d / (s.t * s.s0 * s.s0 * s.s0) - s.t * s.s0 / 4;
        EXPECT_NEAR(bs_derivative_ratio(2, ctx), target, 1e-12 * std::max(1.0, std::abs(target)));
    }
}

TEST(DerivativeRatio, ThirdOrderExample) {
    const Sample s{1.0, 0.0, 0.1, 0.2};
    const long double ref = sigma_derivative(s, 3, 1e-3L) / sigma_derivative(s, 1, 1e-3L);
    EXPECT_NEAR(bs_derivative_ratio(3, SmileContext(1.0, 0.0, 0.1, 0.2)), static_cast<double>(ref),
                1e-5 * std::abs(static_cast<double>(ref)));
}

TEST(DerivativeRatio, MatchesFiniteDifferences) {
    for (const auto& s : random_samples(100, 2)) {
        const SmileContext ctx(s.t, s.x, s.zeta, s.s0);
        const long double h = 0.02L * s.s0;
        const long double d1 = sigma_derivative(s, 1, h);
        for (int n = 2; n <= 4; ++n) {
            const double ref = static_cast<double>(sigma_derivative(s, n, h) / d1);
            EXPECT_NEAR(bs_derivative_ratio(n, ctx), ref, 1e-4 * std::max(1.0, std::abs(ref)))
                << "n=" << n << " t=" << s.t << " d=" << s.zeta - s.x << " s0=" << s.s0;
        }
    }
}

TEST(LemmaRatio, SimpleCases) {
    const SmileContext ctx(0.8, 0.05, -0.2, 0.3);
    EXPECT_EQ(derivative_ratio_lemma(0, 2, ctx), 1.0);
    EXPECT_NEAR(derivative_ratio_lemma(1, 2, ctx), -2.0 * ctx.y0() / ctx.scale(), 1e-15);
}

TEST(LemmaRatio, MatchesFiniteDifferencesInSpot) {
    // d^m_x (d^n_x - d_x) u / (d^2_x - d_x) u with x-derivatives of the closed-form price
    auto check = [](const Sample& s, int m, int n) {
        auto u = [&](long double x) { return oracle::bs_call(s.t, x, s.zeta, s.s0); };
        const long double h = 0.04L * s.s0 * std::sqrt(static_cast<long double>(s.t));
        auto dx = [&](int k) { return oracle::richardson_derivative(u, s.x, k, h); };
        const long double num = dx(m + n) - dx(m + 1);
        const long double den = dx(2) - dx(1);
        return static_cast<double>(num / den);
    };
    const Sample ex{1.0, 0.0, 0.0, 0.5};
    const double ref = check(ex, 2, 3);
    EXPECT_NEAR(derivative_ratio_lemma(2, 3, SmileContext(1.0, 0.0, 0.0, 0.5)), ref, 1e-4 * std::abs(ref));

    for (const auto& s : random_samples(100, 3)) {
        if (s.s0 * std::sqrt(s.t) < 0.25) continue;  // keep the x-differences well conditioned
        const SmileContext ctx(s.t, s.x, s.zeta, s.s0);
        for (auto [m, n] : {std::pair{1, 2}, std::pair{0, 3}, std::pair{1, 3}}) {
            const double r = check(s, m, n);
            EXPECT_NEAR(derivative_ratio_lemma(m, n, ctx), r, 1e-4 * std::max(1.0, std::abs(r))) << m << n;
        }
    }
}

TEST(URatio, ZeroCoefficients) {
    const ExpansionCoefficients a(1.0, 0.3, {0.0, 0.0, 0.0});
    for (int n = 1; n <= 3; ++n) EXPECT_EQ(u_ratio(n, 4, a, SmileContext(1.0, 0.0, 0.2, 0.3)), 0.0);
}

TEST(URatio, FirstAndSecondOrderDisplayedForms) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> A(-0.05, 0.05);
    for (const auto& s : random_samples(50, 4)) {
        const double a2 = A(rng), a3 = A(rng);
        const ExpansionCoefficients a(s.t, s.s0, {a2, a3});
        const SmileContext ctx(s.t, s.x, s.zeta, s.s0);
        const double c = -1.0 / (s.s0 * std::sqrt(2 * s.t));
        const double y = ctx.y0();
        const double pre = 1.0 / (s.t * s.s0);
        const double u1 = pre * (a3 * c * hermite(1, y) + (a2 + a3));
        const double u2 = 0.5 * pre *
                          (a3 * a3 * std::pow(c, 4) * hermite(4, y) + (2 * a2 * a3 + a3 * a3) * std::pow(c, 3) * hermite(3, y) +
                           (a2 * a2 - a3 * a3) * c * c * hermite(2, y) + (-a2 * a2 - a3 * a3 - 2 * a2 * a3) * c * hermite(1, y));
        EXPECT_NEAR(u_ratio(1, 3, a, ctx), u1, 1e-13 * std::max(1.0, std::abs(u1)));
        EXPECT_NEAR(u_ratio(2, 3, a, ctx), u2, 1e-13 * std::max(1.0, std::abs(u2)));
    }
}

TEST(URatio, MatchesFourierQuadrature) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> A(-0.03, 0.03);
    for (const auto& s : random_samples(12, 5)) {
        std::vector<double> a(6, 0.0);
        for (int k = 2; k <= 5; ++k) a[k] = A(rng) / k;
        const ExpansionCoefficients coeffs(s.t, s.s0, {a[2], a[3], a[4], a[5]});
        const SmileContext ctx(s.t, s.x, s.zeta, s.s0);
        for (int n = 1; n <= 3; ++n) {
            for (int m : {3, 5}) {
                std::vector<double> am(a.begin(), a.begin() + m + 1);
                const double ref = oracle::u_ratio_fourier(n, am, s.t, s.x, s.zeta, s.s0);
                const double got = u_ratio(n, m, coeffs, ctx);
                EXPECT_NEAR(got, ref, 1e-7 * std::max(1e-3, std::abs(ref))) << "n=" << n << " m=" << m;
            }
        }
    }
}

TEST(URatio, RejectsMismatchedContextAndOrder) {
    const ExpansionCoefficients a(1.0, 0.3, {0.01, 0.002});
    EXPECT_THROW(u_ratio(1, 3, a, SmileContext(2.0, 0.0, 0.0, 0.3)), NumericsError);
    EXPECT_THROW(u_ratio(1, 4, a, SmileContext(1.0, 0.0, 0.0, 0.3)), NumericsError);
    EXPECT_THROW(u_ratio(0, 3, a, SmileContext(1.0, 0.0, 0.0, 0.3)), NumericsError);
}

TEST(SigmaCorrection, LowOrders) {
    const SmileContext ctx(0.9, 0.0, 0.25, 0.4);
    const std::vector<double> s{0.013, -0.004, 0.0007};
    EXPECT_EQ(sigma_correction(1, {}, ctx), 0.0);
    const double r2 = bs_derivative_ratio(2, ctx), r3 = bs_derivative_ratio(3, ctx);
    EXPECT_NEAR(sigma_correction(2, s, ctx), 0.5 * s[0] * s[0] * r2, 1e-17);
    EXPECT_NEAR(sigma_correction(3, s, ctx), s[1] * s[0] * r2 + s[0] * s[0] * s[0] * r3 / 6, 1e-17);
    const double r4 = bs_derivative_ratio(4, ctx);
    const double s4 = 0.5 * (2 * s[0] * s[2] + s[1] * s[1]) * r2 + 0.5 * s[0] * s[0] * s[1] * r3 +
                      std::pow(s[0], 4) * r4 / 24;
    EXPECT_NEAR(sigma_correction(4, s, ctx), s4, 1e-17);
}

TEST(SmilePoint, BlackScholesAnchorIsExact) {
    const BlackScholesModel bs(0.3);
    for (int n = 1; n <= 4; ++n) {
        for (double z : {-1.0, 0.0, 0.6}) {
            const auto r = smile_point(bs, ExpansionOrder(n, 6), SmileContext(1.0, 0.0, z, 0.3));
            EXPECT_NEAR(r.total, 0.3, 1e-12);
            EXPECT_FALSE(r.flagged);
        }
    }
}

TEST(SmilePoint, SecondOrderOnlyGivesFlatTaylorSmile) {
    const double t = 0.8, s0 = 0.3, a2 = 0.004;
    const double u = 2 * a2 / (t * s0 * s0);
    // sqrt(1 + u) Taylor terms
    const double terms[] = {1.0, 0.5 * u, -0.125 * u * u, 0.0625 * u * u * u, -0.0390625 * u * u * u * u};
    const ExpansionCoefficients a(t, s0, {a2, 0.0, 0.0});
    for (int n = 1; n <= 4; ++n) {
        double ref = 0.0;
        for (int k = 0; k <= n; ++k) ref += s0 * terms[k];
        for (double z : {-0.9, -0.2, 0.0, 0.5, 1.1}) {
            EXPECT_NEAR(smile_point(a, ExpansionOrder(n, 4), SmileContext(t, 0.0, z, s0)).total, ref, 1e-13) << n << " " << z;
        }
    }
}

TEST(SmilePoint, FlagsNonPositiveApproximation) {
    const ExpansionCoefficients a(1.0, 0.1, {-0.2, 0.3});
    bool seen = false;
    for (double z = -3; z <= 3; z += 0.25) {
        const auto r = smile_point(a, ExpansionOrder(3, 3), SmileContext(1.0, 0.0, z, 0.1));
        EXPECT_EQ(r.flagged, !(r.total > 0.0));
        seen = seen || r.flagged;
    }
    EXPECT_TRUE(seen);
}

TEST(SmileCurve, SinglePointMatchesSmilePoint) {
    const MertonModel m(MertonParams{0.25, 1.5, -0.15, 0.3});
    const std::vector<double> z{0.3};
    const auto c = smile_curve(m, ExpansionOrder(3, 7), 1.0, 0.0, z, 0.55);
    const auto p = smile_point(m, ExpansionOrder(3, 7), SmileContext(1.0, 0.0, 0.3, 0.55));
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].total, p.total);
}

TEST(SmileCurve, BlackScholesIsConstant) {
    const BlackScholesModel bs(0.45);
    std::vector<double> z;
    for (int i = 0; i < 21; ++i) z.push_back(-1.0 + 0.1 * i);
    for (const auto& r : smile_curve(bs, ExpansionOrder(3, 8), 2.0, 0.0, z, 0.45)) EXPECT_NEAR(r.total, 0.45, 1e-12);
}

TEST(SmileCurve, ParallelEqualsSerial) {
    const auto a = levy_coefficients(MertonParams{0.25, 1.5, -0.15, 0.3}, 1.0, 0.55, 7);
    std::vector<double> z;
    for (int i = 0; i < 57; ++i) z.push_back(-1.4 + 0.05 * i);
    const auto par = smile_curve(a, ExpansionOrder(3, 7), 0.0, z);
    const auto ser = smile_curve_serial(a, ExpansionOrder(3, 7), 0.0, z);
    ASSERT_EQ(par.size(), ser.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        EXPECT_EQ(par[i].total, ser[i].total);
        EXPECT_EQ(par[i].sigma_terms, ser[i].sigma_terms);
    }
}

TEST(SmileEngine, TermsSumToTotal) {
    const auto a = levy_coefficients(VarianceGammaParams{0.0, 4.5, 6.0, 7.0}, 1.0, 0.55, 8);
    const SmileEngine e(a, ExpansionOrder(3, 8));
    const auto r = e.evaluate(0.0, -0.4);
    ASSERT_EQ(r.sigma_terms.size(), 3u);
    EXPECT_NEAR(r.total, 0.55 + r.sigma_terms[0] + r.sigma_terms[1] + r.sigma_terms[2], 1e-16);
    EXPECT_NEAR(r.sigma_terms[0], u_ratio(1, 8, a, r.context), 1e-16);
}
