#pragma once

#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capped_lsmc/capped_lsmc.hpp"

namespace capped_lsmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Comma list "a,b,c" or range "start:stop:step" (inclusive of stop up to rounding).
inline std::vector<double> parse_points(const std::string& field, const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) {
            auto v = csv::parse_double(csv::trim(item));
            if (!v) throw ParameterError(field, "bad range '" + text + "'");
            parts.push_back(*v);
        }
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
            throw ParameterError(field, "range must be start:stop:step with step > 0");
        const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (std::size_t i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto v = csv::parse_double(csv::trim(item));
        if (!v) throw ParameterError(field, "bad number '" + item + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw ParameterError(field, "needs at least one value");
    return out;
}

inline std::string flag_name(std::string_view key) {
    std::string f(key);
    for (auto& ch : f)
        if (ch == '_') ch = '-';
    return "--" + f;
}

/// Config-key flags shared by every subcommand, applied over an optional --config file.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "key=value configuration file");
        for (auto key : kConfigKeys) {
            const std::string k(key);
            app.add_option(flag_name(k), values[k], "override of config key " + k);
        }
    }

    RunConfig resolve(const CLI::App& app) const {
        RunConfig config;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ParameterError("config", "cannot open '" + config_file + "'");
            config = parse_config(in, config);
        }
        for (auto key : kConfigKeys) {
            const std::string k(key);
            if (app.count(flag_name(k)) > 0) set_key(config, k, values.at(k));
        }
        validate(config);
        return config;
    }
};

/// Output stream for the run: the `out` file when set, else `fallback`.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

inline std::ofstream open_file(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return f;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-capped American option pricing by least-squares Monte Carlo"};
    app.require_subcommand(1);
    unsigned workers = 1;
    app.add_option("--workers", workers, "worker threads (results do not depend on it)")->check(CLI::Range(1u, 256u));

    auto* price_cmd = app.add_subcommand("price", "price one configuration");
    ConfigFlags price_flags;
    price_flags.attach(*price_cmd);
    std::string coef_out, paths_out, caps_out;
    price_cmd->add_option("--coef-out", coef_out, "write per-date regression coefficients");
    price_cmd->add_option("--paths-out", paths_out, "write the simulated paths (at most 100)");
    price_cmd->add_option("--caps-out", caps_out, "write per-path cap indices");

    auto* sweep_cmd = app.add_subcommand("sweep", "repeat pricings over a parameter sweep");
    ConfigFlags sweep_flags;
    sweep_flags.attach(*sweep_cmd);
    std::string variable = "cap_level";
    std::string points, rates, sigmas;
    bool timing = false;
    sweep_cmd->add_option("--var", variable, "cap_level | s0 | rate_sigma")
        ->check(CLI::IsMember({"cap_level", "s0", "rate_sigma"}));
    sweep_cmd->add_option("--points", points, "values 'a,b,c' or 'start:stop:step'");
    sweep_cmd->add_option("--rates", rates, "rate values for rate_sigma");
    sweep_cmd->add_option("--sigmas", sigmas, "sigma values for rate_sigma");
    sweep_cmd->add_flag("--timing", timing, "append per-run wall time (makes output nondeterministic)");

    auto* bench_cmd = app.add_subcommand("bench", "time pricings across path counts");
    ConfigFlags bench_flags;
    bench_flags.attach(*bench_cmd);
    std::string ladder = "1000,2000";
    std::size_t reps = 3;
    bench_cmd->add_option("--ladder", ladder, "path counts, comma separated");
    bench_cmd->add_option("--reps", reps, "repetitions per path count");

    auto* oracle_cmd = app.add_subcommand("oracle", "reference prices");
    ConfigFlags oracle_flags;
    oracle_flags.attach(*oracle_cmd);
    std::string oracle_kind = "crr_put";
    std::size_t lattice_steps = 2000;
    oracle_cmd->add_option("--kind", oracle_kind, "bs_put | crr_put | lattice_capped_put")
        ->check(CLI::IsMember({"bs_put", "crr_put", "lattice_capped_put"}));
    oracle_cmd->add_option("--lattice-steps", lattice_steps, "lattice steps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalidConfig;
    }

    try {
        if (*price_cmd) {
            const RunConfig config = price_flags.resolve(*price_cmd);
            PricingConfig pc = to_pricing_config(config, config.seed, workers);
            pc.options.keep_coefficients = !coef_out.empty();
            const MarketParams market = make_market(pc.market);
            const TimeGrid grid(market.maturity(), pc.n_steps);
            if (!paths_out.empty() && pc.n_paths > kMaxDumpPaths)
                throw ParameterError("n_paths", "--paths-out is limited to 100 paths");
            const PathSet paths = simulate(market, grid, pc.n_paths, pc.seed, pc.workers);
            const CapIndices caps = compute_caps(pc.cap, paths);
            PricingResult result = backward_induct(paths, caps, pc.payoff, pc.basis, market, pc.options);
            result.cap = pc.cap;

            Output o(config.out, out);
            o.stream() << kPricingHeader << '\n';
            write_pricing_row(o.stream(), result);
            if (!coef_out.empty()) {
                auto f = open_file(coef_out);
                write_coefficients_csv(f, result.coefficients, pc.basis.count);
            }
            if (!paths_out.empty()) {
                auto f = open_file(paths_out);
                write_paths_csv(f, paths);
            }
            if (!caps_out.empty()) {
                auto f = open_file(caps_out);
                write_caps_csv(f, caps, grid);
            }
        } else if (*sweep_cmd) {
            const RunConfig config = sweep_flags.resolve(*sweep_cmd);
            SweepSpec spec;
            if (variable == "rate_sigma") {
                spec.variable = SweepVariable::rate_sigma;
                if (rates.empty() || sigmas.empty())
                    throw ParameterError("rates", "rate_sigma sweeps need --rates and --sigmas");
                for (double r : parse_points("rates", rates))
                    for (double s : parse_points("sigmas", sigmas)) spec.points.push_back({r, s});
            } else {
                spec.variable = variable == "s0" ? SweepVariable::s0 : SweepVariable::cap_level;
                if (points.empty()) throw ParameterError("points", "--points is required");
                for (double v : parse_points("points", points)) spec.points.push_back({v, 0.0});
            }
            Output o(config.out, out);
            auto& os = o.stream();
            write_sweep_header(os, timing);
            run_sweep(config, spec, config.n_runs, workers,
                      [&](const std::vector<SweepRow>& rows, const SweepSummary& summary) {
                          for (const auto& row : rows) write_sweep_row(os, spec.variable, row, timing);
                          write_summary_row(os, spec.variable, summary, timing);
                          os.flush();
                      });
        } else if (*bench_cmd) {
            const RunConfig config = bench_flags.resolve(*bench_cmd);
            std::vector<std::size_t> counts;
            for (double v : parse_points("ladder", ladder)) {
                if (!(v >= 1.0) || v != std::floor(v)) throw ParameterError("ladder", "path counts must be positive integers");
                counts.push_back(static_cast<std::size_t>(v));
            }
            const auto rows = run_bench(config, counts, reps);
            Output o(config.out, out);
            write_bench_csv(o.stream(), rows);
        } else if (*oracle_cmd) {
            const RunConfig config = oracle_flags.resolve(*oracle_cmd);
            const MarketInputs& m = config.market;
            double value = 0.0;
            std::string steps_field, level_field, s_bar_field, filtration = "continuous";
            if (oracle_kind == "bs_put") {
                value = oracles::bs_european_put(m.s0, m.strike, m.rate, m.sigma, m.maturity);
            } else if (oracle_kind == "crr_put") {
                value = oracles::crr_american_put(m.s0, m.strike, m.rate, m.sigma, m.maturity, lattice_steps);
                steps_field = std::to_string(lattice_steps);
                filtration = "lattice";
            } else {
                if (config.cap_kind != CapKind::drawdown)
                    throw ParameterError("cap_kind", "lattice_capped_put needs cap_kind=drawdown");
                value = oracles::lattice_capped_put(m.s0, m.s_bar, m.strike, m.rate, m.sigma, m.maturity,
                                                    lattice_steps, config.cap_level);
                steps_field = std::to_string(lattice_steps);
                level_field = csv::format_double(config.cap_level);
                s_bar_field = csv::format_double(
                    oracles::lattice_s_bar(m.s0, m.s_bar, m.rate, m.sigma, m.maturity, lattice_steps));
                filtration = "lattice";
            }
            Output o(config.out, out);
            o.stream() << "oracle,value,s0,s_bar,strike,maturity,rate,sigma,lattice_steps,cap_level,s_bar_lattice,"
                          "filtration\n"
                       << oracle_kind << ',' << csv::format_double(value) << ',' << csv::format_double(m.s0) << ','
                       << csv::format_double(m.s_bar) << ',' << csv::format_double(m.strike) << ','
                       << csv::format_double(m.maturity) << ',' << csv::format_double(m.rate) << ','
                       << csv::format_double(m.sigma) << ',' << steps_field << ',' << level_field << ','
                       << s_bar_field << ',' << filtration << '\n';
        }
    } catch (const ParameterError& e) {
        err << "error: invalid configuration: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace capped_lsmc::cli
