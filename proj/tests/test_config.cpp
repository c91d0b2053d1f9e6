#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "capped_lsmc/config.hpp"
#include "capped_lsmc/experiment.hpp"
#include "cli.hpp"

using namespace capped_lsmc;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "capped_lsmc_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

RunConfig random_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::uint64_t> count(1, 100000);
    RunConfig c;
    c.market.s0 = 1.0 + 200.0 * u(rng);
    c.market.s_bar = c.market.s0 * (1.0 + u(rng));
    c.market.strike = 200.0 * u(rng);
    c.market.maturity = 0.01 + 5.0 * u(rng);
    c.market.rate = 0.3 * u(rng);
    c.market.sigma = u(rng);
    c.market.jump_intensity = 3.0 * u(rng);
    c.market.jump_rate = 0.01 + 5.0 * u(rng);
    c.payoff = u(rng) < 0.5 ? OptionKind::put : OptionKind::call;
    c.cap_kind = static_cast<CapKind>(count(rng) % 5);
    c.cap_level = 1e-6 + (1.0 - 1e-6) * u(rng);
    c.cap_rate = 0.01 + 10.0 * u(rng);
    c.cap_shape = static_cast<unsigned>(1 + count(rng) % 10);
    c.cap_time = 2.0 * u(rng);
    c.n_paths = count(rng);
    c.n_steps = count(rng);
    c.n_basis = 1 + count(rng) % 10;
    c.seed = rng();
    c.n_runs = count(rng);
    c.itm_only = u(rng) < 0.5;
    c.alive_only = u(rng) < 0.5;
    c.out = u(rng) < 0.5 ? "" : "out_" + std::to_string(count(rng)) + ".csv";
    return c;
}

}  // namespace

TEST(Config, RoundTripsThroughItsTextFormat) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 500; ++i) {
        const RunConfig c = random_config(rng);
        ASSERT_NO_THROW(validate(c));
        EXPECT_EQ(parse_config(emit_config(c)), c) << emit_config(c);
    }
}

TEST(Config, EmitsEveryKeyInOrder) {
    const auto text = lines(emit_config(RunConfig{}));
    ASSERT_EQ(text.size(), kConfigKeys.size());
    for (std::size_t i = 0; i < text.size(); ++i) EXPECT_EQ(text[i].substr(0, text[i].find('=')), kConfigKeys[i]);
    EXPECT_EQ(text[0], "s0=100");
    EXPECT_EQ(text[9], "cap_kind=drawdown");
}

TEST(Config, CommentsBlankLinesAndWhitespace) {
    const auto c = parse_config("# header\n\n  cap_level = 0.3 \nseed=9\n");
    EXPECT_EQ(c.cap_level, 0.3);
    EXPECT_EQ(c.seed, 9u);
}

TEST(Config, ErrorsNameTheField) {
    const std::vector<std::pair<std::string, std::string>> bad{
        {"sigma=abc", "sigma"}, {"n_paths=-4", "n_paths"}, {"itm_only=maybe", "itm_only"},
        {"cap_kind=sometimes", "cap_kind"}, {"colour=red", "colour"}, {"payoff=straddle", "payoff"}};
    for (const auto& [text, field] : bad) {
        try {
            parse_config(text);
            FAIL() << text;
        } catch (const ParameterError& e) {
            EXPECT_EQ(e.field(), field);
        }
    }
    RunConfig c;
    c.cap_level = 1.5;
    try {
        validate(c);
        FAIL();
    } catch (const ParameterError& e) {
        EXPECT_EQ(e.field(), "cap_level");
    }
}

TEST(Config, CapSpecUsesItsOwnStream) {
    RunConfig c;
    c.cap_kind = CapKind::erlang;
    c.cap_shape = 3;
    const auto spec = std::get<ErlangCap>(make_cap_spec(c, 5));
    EXPECT_EQ(spec.sub_seed, stream_seed(5, kCapStream, 0));
    EXPECT_NE(spec.sub_seed, stream_seed(5, kPathStream, 0));
}

TEST(Summary, QuantilesByLinearInterpolation) {
    const auto s = summarize(0, {}, {4.0, 1.0, 3.0, 2.0, 5.0});
    EXPECT_EQ(s.mean, 3.0);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.q1, 2.0);
    EXPECT_EQ(s.median, 3.0);
    EXPECT_EQ(s.q3, 4.0);
    EXPECT_EQ(s.max, 5.0);
    EXPECT_DOUBLE_EQ(s.sd, std::sqrt(2.5));
    EXPECT_DOUBLE_EQ(quantile_sorted({1.0, 2.0}, 0.25), 1.25);
}

TEST(Sweep, RowsAndSeeds) {
    RunConfig c;
    c.n_paths = 200;
    c.n_steps = 20;
    SweepSpec spec{SweepVariable::cap_level, {{0.2, 0.0}, {0.5, 0.0}}};
    const auto result = run_sweep(c, spec, 3, 2);
    ASSERT_EQ(result.rows.size(), 6u);
    ASSERT_EQ(result.summaries.size(), 2u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(result.rows[i].point, i / 3);
        EXPECT_EQ(result.rows[i].run, i % 3);
        EXPECT_EQ(result.rows[i].seed, run_seed(c.seed, i % 3));
    }
    EXPECT_EQ(run_sweep(c, spec, 3, 1).rows[4].price, result.rows[4].price);
}

TEST(Sweep, SpotSweepMovesRunningMaxWithSpot) {
    const RunConfig c = apply_point(RunConfig{}, SweepVariable::s0, {93.0, 0.0});
    EXPECT_EQ(c.market.s0, 93.0);
    EXPECT_EQ(c.market.s_bar, 93.0);
    RunConfig none;
    none.cap_kind = CapKind::none;
    EXPECT_THROW(apply_point(none, SweepVariable::cap_level, {0.3, 0.0}), ParameterError);
}

TEST(Sweep, PriceRisesWithVolatilityAndFallsWithRate) {
    RunConfig c;
    c.n_paths = 2000;
    c.n_steps = 100;
    c.cap_level = 0.3;
    SweepSpec spec{SweepVariable::rate_sigma, {}};
    const std::vector<double> rates{0.01, 0.1, 0.2}, sigmas{0.02, 0.2, 0.4};
    for (double r : rates)
        for (double s : sigmas) spec.points.push_back({r, s});
    const auto result = run_sweep(c, spec, 4, 1);
    auto at = [&](std::size_t ri, std::size_t si) { return result.summaries[ri * sigmas.size() + si]; };
    auto ok = [](const SweepSummary& lo, const SweepSummary& hi) {
        return hi.mean + 2.0 * std::hypot(lo.std_error, hi.std_error) >= lo.mean;
    };
    for (std::size_t ri = 0; ri < 3; ++ri)
        for (std::size_t si = 1; si < 3; ++si) EXPECT_TRUE(ok(at(ri, si - 1), at(ri, si))) << ri << ',' << si;
    for (std::size_t si = 0; si < 3; ++si)
        for (std::size_t ri = 1; ri < 3; ++ri) EXPECT_TRUE(ok(at(ri, si), at(ri - 1, si))) << ri << ',' << si;
}

TEST(Cli, PriceWithCapAtIssue) {
    const auto r = run_cli({"price", "--sigma", "0.4", "--lambda", "0", "--cap-level", "0.04", "--n-paths", "500",
                            "--n-steps", "50"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto out = lines(r.out);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], kPricingHeader);
    EXPECT_EQ(out[1], "10,0,500,50,5,1,drawdown,0.04");
}

TEST(Cli, InvalidLevelExitsWithTwoAndNamesField) {
    const auto r = run_cli({"price", "--cap-level", "1.5"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cap_level"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli({"price", "--no-such-flag", "1"}).code, 2);
    EXPECT_EQ(run_cli({"price", "--n-paths", "many"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
}

TEST(Cli, RuntimeFailureExitsWithThree) {
    const auto r = run_cli({"price", "--n-paths", "10", "--n-steps", "5", "--out", "/nonexistent/dir/x.csv"});
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, RepeatedPriceIsByteIdentical) {
    const std::vector<std::string> args{"price", "--cap-level", "0.3", "--n-paths", "400", "--n-steps", "40", "--seed", "8"};
    const auto a = run_cli(args), b = run_cli(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SweepEmitsRunsAndSummaries) {
    const auto r = run_cli({"sweep", "--var", "cap_level", "--points", "0.2:0.4:0.1", "--n-runs", "2", "--n-paths",
                            "100", "--n-steps", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto out = lines(r.out);
    ASSERT_EQ(out.size(), 1u + 3u * 3u);
    EXPECT_EQ(out[0], "kind,variable,value,value2,run,seed,price,std_error,mean,sd,min,q1,median,q3,max");
    EXPECT_EQ(out[1].substr(0, 21), "run,cap_level,0.2,,0,");
    EXPECT_EQ(out[3].substr(0, 8), "summary,");
    for (const auto& line : out) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 14) << line;
}

TEST(Cli, BenchWithOnePointGivesOneRow) {
    const auto r = run_cli({"bench", "--ladder", "100", "--reps", "1", "--n-steps", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto out = lines(r.out);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], "n_paths,mean_ms,sd_ms");
    EXPECT_EQ(out[1].substr(0, 4), "100,");
}

TEST(Cli, OracleKinds) {
    auto r = run_cli({"oracle", "--kind", "crr_put", "--sigma", "0.4", "--lambda", "0", "--lattice-steps", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto out = lines(r.out);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], "oracle,value,s0,s_bar,strike,maturity,rate,sigma,lattice_steps,cap_level,s_bar_lattice,filtration");
    EXPECT_EQ(out[1].substr(0, 8), "crr_put,");

    r = run_cli({"oracle", "--kind", "lattice_capped_put", "--cap-level", "0.04", "--lattice-steps", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out)[1].substr(0, 22), "lattice_capped_put,10,");

    r = run_cli({"oracle", "--kind", "lattice_capped_put", "--lattice-steps", "30"});
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, ParsePoints) {
    EXPECT_EQ(cli::parse_points("points", "1,2.5,3"), (std::vector<double>{1.0, 2.5, 3.0}));
    EXPECT_EQ(cli::parse_points("points", "90:130:1").size(), 41u);
    EXPECT_EQ(cli::parse_points("points", "90:130:1").back(), 130.0);
    EXPECT_THROW(cli::parse_points("points", "1:0:1"), ParameterError);
    EXPECT_THROW(cli::parse_points("points", "a,b"), ParameterError);
}
