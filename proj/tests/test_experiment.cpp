#include <string>

#include <gtest/gtest.h>

#include "qmcvr/experiment.hpp"

using namespace qmcvr;
using nlohmann::json;

namespace {

json base()
{
    return json{{"s0", 50.0},       {"r", 0.05},
                {"sigma", 0.3},     {"maturity", 1.0},
                {"d", 8},           {"methods", {"MC", "AS", "IS_AS_PREINT"}},
                {"strikes", {40.0, 90.0}}, {"n", 256},
                {"m", 4},           {"m_grad", 64},
                {"seed", 3}};
}

std::size_t count(const std::string& s, char c) { return std::ranges::count(s, c); }

} // namespace

TEST(ParseExperiment, Defaults)
{
    const auto e = parse_experiment(base());
    EXPECT_EQ(e.methods.size(), 3u);
    EXPECT_EQ(e.target, Target::Price);
    EXPECT_EQ(e.randomization, Randomization::Scramble);
    const auto cfg = e.run_config(Method::PREINT, 40.0, 512);
    EXPECT_EQ(cfg.market.k, 40.0);
    EXPECT_EQ(cfg.n, 512u);
    EXPECT_EQ(cfg.market.grid.d, 8);
    EXPECT_EQ(cfg.m_grad, 64);
}

TEST(ParseExperiment, Rejections)
{
    const auto rejects = [](auto edit) {
        json j = base();
        edit(j);
        EXPECT_THROW(parse_experiment(j), ConfigError) << j.dump();
    };
    rejects([](json& j) { j["methods"] = json::array(); });
    rejects([](json& j) { j["methods"] = {"MC", "QMC"}; });
    rejects([](json& j) { j["strikes"] = json::array(); });
    rejects([](json& j) { j["sigma"] = -0.3; });
    rejects([](json& j) { j["sigma"] = "high"; });
    rejects([](json& j) { j.erase("s0"); });
    rejects([](json& j) { j["strke"] = 1; });
    rejects([](json& j) { j["n"] = 100; });
    rejects([](json& j) { j["n_list"] = {256, 300}; });
    rejects([](json& j) { j["m"] = 1; });
    rejects([](json& j) { j["target"] = "gamma"; });
    rejects([](json& j) { j["randomization"] = "owen"; });
    rejects([](json& j) { j["max_evaluations"] = 100.0; });
    rejects([](json& j) { j = json::array(); });
}

TEST(ParseExperiment, EmptyMethodsMessage)
{
    json j = base();
    j["methods"] = json::array();
    try {
        parse_experiment(j);
        FAIL();
    } catch (const ConfigError& err) {
        EXPECT_STREQ(err.what(), "no methods");
    }
}

TEST(LoadExperiment, MissingFileAndBadJson)
{
    EXPECT_THROW(load_experiment("/nonexistent/qmcvr.json"), IoError);
    const std::string path = ::testing::TempDir() + "qmcvr_bad.json";
    write_file(path, "{\"s0\": 1,");
    EXPECT_THROW(load_experiment(path), ConfigError);
    write_file(path, base().dump());
    EXPECT_EQ(load_experiment(path).strikes.size(), 2u);
}

TEST(Format, VrfLiterals)
{
    EXPECT_EQ(format_vrf(std::nullopt), "Failed");
    EXPECT_EQ(format_vrf(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_vrf(12345.0), "1.2e+04");
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(Tables, VrfTableMarksFailures)
{
    const auto e = parse_experiment(base());
    const auto rows = run_vrf_table(e, {1});
    const auto csv = vrf_csv(e, rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "K,MC,AS,IS_AS_PREINT");
    EXPECT_EQ(count(csv, '\n'), 3u);
    // AS has no gradient information far out of the money.
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[1].methods[1].failed);
    EXPECT_NE(csv.find("90,1.0e+00,Failed,"), std::string::npos) << csv;
    EXPECT_FALSE(rows[1].methods[2].failed);
}

TEST(Tables, PriceAndSweepCsv)
{
    json j = base();
    j["n_list"] = {256, 512};
    const auto e = parse_experiment(j);
    const auto prices = price_csv(run_price_table(e, {1}));
    EXPECT_EQ(prices.substr(0, prices.find('\n')), "method,K,n,mean,stderr,reason");
    EXPECT_EQ(count(prices, '\n'), 1u + 3u * 2u);
    EXPECT_NE(prices.find("AS,90,256,,,active_subspace: zero gradient information matrix"),
              std::string::npos)
        << prices;

    const auto sweep = sweep_csv(run_sweep(e, {1}));
    EXPECT_EQ(sweep.substr(0, sweep.find('\n')),
              "method,K,n,mean,stderr,log2n,log10stderr,reason");
    EXPECT_EQ(count(sweep, '\n'), 1u + 3u * 2u * 2u);
}

TEST(Tables, ByteIdenticalAcrossThreadCounts)
{
    const auto e = parse_experiment(base());
    EXPECT_EQ(vrf_csv(e, run_vrf_table(e, {1})), vrf_csv(e, run_vrf_table(e, {4})));
    EXPECT_EQ(price_csv(run_price_table(e, {1})), price_csv(run_price_table(e, {2})));
}
