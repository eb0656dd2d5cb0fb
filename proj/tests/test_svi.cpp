#include "ivexp/expansion.hpp"
#include "ivexp/svi.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ivexp;

namespace {

std::vector<SmilePoint> sample(const SVIParams& p, double t, double x, double lo, double hi, int n) {
    std::vector<SmilePoint> pts;
    for (int i = 0; i < n; ++i) {
        const double z = lo + (hi - lo) * i / (n - 1);
        pts.push_back({z, svi_vol(p, t, x, z)});
    }
    return pts;
}

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

}  // namespace

TEST(SviVol, FlatSmile) {
    const SVIParams p{0.04, 0.0, 0.0, 0.0, 0.1};
    for (double z : {-1.0, 0.0, 2.0}) EXPECT_NEAR(svi_vol(p, 1.0, 0.0, z), 0.2, 1e-15);
}

TEST(SviVol, EvenWhenUncorrelated) {
    const SVIParams p{0.02, 0.3, 0.0, 0.0, 0.2};
    for (double d : {0.1, 0.7}) EXPECT_DOUBLE_EQ(svi_vol(p, 0.5, 0.1, 0.1 + d), svi_vol(p, 0.5, 0.1, 0.1 - d));
}

TEST(SviVol, HandValue) {
    const SVIParams p{0.02, 0.1, -0.5, 0.0, 0.3};
    const double ref = std::sqrt(0.02 + 0.1 * (-0.5 * 0.2 + std::sqrt(0.04 + 0.09)));
    EXPECT_NEAR(svi_vol(p, 1.0, 0.0, 0.2), ref, 1e-15);
    EXPECT_NEAR(ref, 0.2146055, 1e-7);
}

TEST(SviVol, NegativeVarianceRejected) {
    const SVIParams p{-0.5, 0.1, 0.0, 0.0, 0.1};
    try {
        svi_vol(p, 1.0, 0.0, 0.0);
        FAIL();
    } catch (const NumericsError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DomainViolation);
    }
    EXPECT_THROW(validate(SVIParams{0.0, -0.1, 0.0, 0.0, 0.1}), NumericsError);
    EXPECT_THROW(validate(SVIParams{0.0, 0.1, 1.1, 0.0, 0.1}), NumericsError);
    EXPECT_THROW(validate(SVIParams{0.0, 0.1, 0.0, 0.0, 0.0}), NumericsError);
}

TEST(SviVol, TotalVarianceConvex) {
    const SVIParams p{0.01, 0.4, -0.7, 0.1, 0.05};
    const double h = 1e-3;
    for (double k = -2; k <= 2; k += 0.01) {
        const double d2 = svi_total_variance(p, k + h) - 2 * svi_total_variance(p, k) + svi_total_variance(p, k - h);
        EXPECT_GE(d2, -1e-12);
    }
}

TEST(SviFit, RecoversExactCurve) {
    const SVIParams truth{0.03, 0.15, -0.4, 0.05, 0.25};
    const auto pts = sample(truth, 1.0, 0.0, -1.0, 1.0, 25);
    const auto fit = svi_fit(pts, 1.0, 0.0);
    EXPECT_LT(fit.rmse, 1e-8);
    EXPECT_GT(fit.successful_starts, 0);
    EXPECT_NEAR(fit.params.b, truth.b, 1e-5);
    EXPECT_NEAR(fit.params.rho, truth.rho, 1e-5);
}

TEST(SviFit, ReportedResidualMatchesReevaluation) {
    const MertonModel m(MertonParams{0.25, 1.5, -0.15, 0.3});
    const auto z = grid(-1.4, 1.4, 57);
    std::vector<SmilePoint> pts;
    for (const auto& s : smile_curve(m, ExpansionOrder(3, 7), 1.0, 0.0, z, 0.55)) pts.push_back({s.context.zeta(), s.total});
    const auto fit = svi_fit(pts, 1.0, 0.0);
    EXPECT_LE(fit.rmse, 0.005);
    double sse = 0.0;
    for (const auto& p : pts) sse += std::pow(svi_vol(fit.params, 1.0, 0.0, p.zeta) - p.sigma, 2);
    EXPECT_NEAR(fit.rmse, std::sqrt(sse / pts.size()), 1e-14);
}

TEST(SviFit, UnderdeterminedFails) {
    const SVIParams truth{0.03, 0.15, -0.4, 0.05, 0.25};
    const auto pts = sample(truth, 1.0, 0.0, -1.0, 1.0, 4);
    try {
        svi_fit(pts, 1.0, 0.0);
        FAIL();
    } catch (const NumericsError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FitFailure);
    }
}

TEST(SviFit, NegativeLevelOnlyWhenAllowed) {
    const SVIParams truth{-0.02, 0.2, -0.3, 0.0, 0.4};
    const auto pts = sample(truth, 1.0, 0.0, -1.0, 1.0, 21);
    SVIFitOptions opts;
    opts.allow_negative_a = true;
    EXPECT_LT(svi_fit(pts, 1.0, 0.0, {}, opts).rmse, 1e-7);
    EXPECT_GE(svi_fit(pts, 1.0, 0.0).params.a, 0.0);
}

TEST(Density, FlatSmileIsLognormal) {
    const double s = 0.25, t = 1.5, x = 0.1;
    const double sd = s * std::sqrt(t);
    const auto z = grid(x - sd * sd / 2 - 8 * sd, x - sd * sd / 2 + 8 * sd, 4001);
    const auto d = bl_density([&](double) { return s; }, t, x, z);
    EXPECT_NEAR(d.integral(), 1.0, 1e-6);
    const double mu = x - sd * sd / 2;
    for (std::size_t i = 0; i < z.size(); i += 400) {
        const double ref = std::exp(-0.5 * std::pow((z[i] - mu) / sd, 2)) / (sd * std::sqrt(2 * M_PI));
        EXPECT_NEAR(d.density[i], ref, 1e-9);
    }
    const auto a = bl_density(SVIParams{s * s * t, 0.0, 0.0, 0.0, 0.1}, t, x, z);
    EXPECT_NEAR(a.integral(), 1.0, 1e-6);
}

TEST(Density, FiniteDifferenceMatchesAnalyticSvi) {
    const SVIParams p{0.02, 0.2, -0.5, 0.05, 0.2};
    const auto z = grid(-1.5, 1.5, 61);
    const auto fd = bl_density([&](double v) { return svi_vol(p, 1.0, 0.0, v); }, 1.0, 0.0, z);
    const auto an = bl_density(p, 1.0, 0.0, z);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(fd.density[i], an.density[i], 1e-5);
    EXPECT_LE(an.integral(), 1.0 + 1e-3);
}

TEST(Density, CrossedSmileGoesNegative) {
    const auto z = grid(-1.0, 1.0, 201);
    // a near-jump in vol across the money makes call prices locally non-convex
    const auto d = bl_density([](double v) { return 0.2 + 0.15 * std::tanh(v / 0.02); }, 1.0, 0.0, z);
    double mn = INFINITY;
    for (double v : d.density) mn = std::min(mn, v);
    EXPECT_LT(mn, -1e-6);
}

TEST(Butterfly, FlatIsFree) {
    const auto r = butterfly_check(SVIParams{0.04, 0.0, 0.0, 0.0, 0.1}, 1.0, 0.0, 2.0);
    EXPECT_TRUE(r.arbitrage_free);
    EXPECT_GT(r.min_density, 0.0);
}

TEST(Butterfly, SteepWingsWithTinyCurvatureViolate) {
    const auto r = butterfly_check(SVIParams{0.001, 3.0, 0.9, 0.0, 0.01}, 1.0, 0.0, 2.0);
    EXPECT_FALSE(r.arbitrage_free);
    EXPECT_LT(r.min_density, -1e-10);
}

TEST(Butterfly, HestonSmoothingIsFree) {
    const HestonModel h(HestonParams{1.0, 0.3, 0.7, -0.3, 0.5});
    const auto z = grid(-2.0, 2.0, 81);
    std::vector<SmilePoint> pts;
    for (const auto& s : smile_curve(h, ExpansionOrder(3, 6), 1.0, 0.0, z, 0.95)) {
        if (!s.flagged) pts.push_back({s.context.zeta(), s.total});
    }
    const auto fit = svi_fit(pts, 1.0, 0.0);
    EXPECT_TRUE(butterfly_check(fit.params, 1.0, 0.0, 2.0).arbitrage_free);
}
