#include "ivexp/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace ivexp;
using nlohmann::json;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const NumericsError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no exception";
    return ErrorKind::DomainViolation;
}

}  // namespace

TEST(FormatDouble, SeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(-2.0), "-2");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(std::stod(format_double(M_PI)), M_PI);
}

TEST(ModelJson, RoundTripAllModels) {
    const std::vector<json> docs{
        {{"model", "black_scholes"}, {"params", {{"sigma", 0.2}}}},
        {{"model", "merton"}, {"params", {{"a", 0.25}, {"alpha", 1.5}, {"m", -0.15}, {"s", 0.3}}}},
        {{"model", "variance_gamma"}, {"params", {{"a", 0.0}, {"alpha", 4.5}, {"G", 6.0}, {"M", 7.0}}}},
        {{"model", "heston"}, {"params", {{"kappa", 1.0}, {"theta", 0.3}, {"delta", 0.7}, {"rho", -0.3}, {"y", 0.5}}}}};
    for (const auto& d : docs) {
        const auto m = model_from_json(d);
        EXPECT_EQ(model_to_json(*m), d);
        EXPECT_EQ(m->phi(1.0, Complex(0.3, -0.5)), model_from_json(model_to_json(*m))->phi(1.0, Complex(0.3, -0.5)));
    }
}

TEST(ModelJson, Errors) {
    EXPECT_EQ(kind_of([] { model_from_json(json{{"model", "cgmy"}, {"params", json::object()}}); }), ErrorKind::IoFailure);
    EXPECT_EQ(kind_of([] { model_from_json(json{{"model", "merton"}, {"params", {{"a", 0.2}}}}); }), ErrorKind::IoFailure);
    EXPECT_EQ(kind_of([] { model_from_json(json{{"model", "heston"},
                                                 {"params", {{"kappa", 1.0}, {"theta", 0.3}, {"delta", 0.7}, {"rho", -3.0}, {"y", 0.5}}}}); }),
              ErrorKind::IoFailure);
    const auto bad = write_temp("ivexp_bad_model.json", "{\"model\": \"merton\", ");
    EXPECT_EQ(kind_of([&] { load_model(bad); }), ErrorKind::IoFailure);
    EXPECT_EQ(kind_of([] { load_model("/nonexistent/model.json"); }), ErrorKind::IoFailure);
}

TEST(SviJson, RoundTrip) {
    const SVIParams p{0.01, 0.2, -0.3, 0.05, 0.3};
    const auto j = svi_to_json(p, 0.75);
    EXPECT_EQ(j.at("xi"), 0.3);
    double t = 0.0;
    const auto q = svi_from_json(j, &t);
    EXPECT_EQ(t, 0.75);
    EXPECT_EQ(q.a, p.a);
    EXPECT_EQ(q.rho, p.rho);
    EXPECT_EQ(kind_of([] { svi_from_json(json{{"a", 0.0}, {"b", -1.0}, {"rho", 0.0}, {"m", 0.0}, {"xi", 0.1}, {"t", 1.0}}); }),
              ErrorKind::IoFailure);
}

TEST(QuotesCsv, GroupsAndSorts) {
    const auto path = write_temp("ivexp_quotes.csv", "t,log_strike,iv\n1.0,0.1,0.21\n0.5,0.0,0.3\n1.0,-0.1,0.23\n\n0.5,0.2,0.28\n");
    const auto s = read_quotes_csv(path, 0.05);
    EXPECT_EQ(s.x, 0.05);
    ASSERT_EQ(s.slices.size(), 2u);
    EXPECT_EQ(s.slices[0].t, 0.5);
    EXPECT_EQ(s.slices[1].strikes.size(), 2u);
    EXPECT_TRUE(s.slices[0].weights.empty());
}

TEST(QuotesCsv, WeightColumnAndErrors) {
    const auto w = write_temp("ivexp_quotes_w.csv", "t,log_strike,iv,weight\n1.0,0.1,0.21,2\n1.0,0.2,0.2,1\n");
    EXPECT_EQ(read_quotes_csv(w, 0.0).slices[0].weights, (std::vector<double>{2.0, 1.0}));
    const auto hdr = write_temp("ivexp_quotes_h.csv", "t,strike,iv\n1,0,0.2\n");
    EXPECT_EQ(kind_of([&] { read_quotes_csv(hdr, 0.0); }), ErrorKind::IoFailure);
    const auto num = write_temp("ivexp_quotes_n.csv", "t,log_strike,iv\n1,zero,0.2\n");
    EXPECT_EQ(kind_of([&] { read_quotes_csv(num, 0.0); }), ErrorKind::IoFailure);
    const auto neg = write_temp("ivexp_quotes_v.csv", "t,log_strike,iv\n1,0,-0.2\n");
    EXPECT_EQ(kind_of([&] { read_quotes_csv(neg, 0.0); }), ErrorKind::IoFailure);
    EXPECT_EQ(kind_of([] { read_quotes_csv("/nonexistent.csv", 0.0); }), ErrorKind::IoFailure);
}

TEST(SliceJson, Layout) {
    const CalibratedSlice s{0.7, 0.659, {-0.131, -0.005}, 1e-3, 12, {0.001, -0.001}, {}};
    const auto j = calibrated_slice_to_json(s);
    EXPECT_EQ(j.at("sigma0"), 0.659);
    EXPECT_EQ(j.at("a").size(), 2u);
    EXPECT_EQ(j.at("diagnostics").at("iterations"), 12);
    const SliceOutcome bad{0.5, std::nullopt, ErrorKind::FitFailure, "no"};
    EXPECT_EQ(slice_outcome_to_json(bad).at("error").at("kind"), "FitFailure");
}
