#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "capped_lsmc/cap_models.hpp"
#include "capped_lsmc/csv.hpp"
#include "capped_lsmc/lsmc.hpp"
#include "capped_lsmc/market_model.hpp"
#include "capped_lsmc/rng.hpp"

namespace capped_lsmc {

enum class CapKind { none, drawdown, exponential, erlang, deterministic };

inline const char* to_string(CapKind kind) {
    switch (kind) {
        case CapKind::none: return "none";
        case CapKind::drawdown: return "drawdown";
        case CapKind::exponential: return "exponential";
        case CapKind::erlang: return "erlang";
        case CapKind::deterministic: return "deterministic";
    }
    return "none";
}

/// A complete experiment configuration. Serialized as flat `key=value` lines.
struct RunConfig {
    MarketInputs market{100.0, 105.0, 110.0, 1.0, 0.1, 0.5, 0.0675, 0.5};
    OptionKind payoff = OptionKind::put;
    CapKind cap_kind = CapKind::drawdown;
    double cap_level = 1.0;
    double cap_rate = 1.0;
    unsigned cap_shape = 1;
    double cap_time = 1.0;
    std::size_t n_paths = 5000;
    std::size_t n_steps = 2000;
    std::size_t n_basis = 5;
    std::uint64_t seed = 1;
    std::size_t n_runs = 200;
    bool itm_only = false;
    bool alive_only = false;
    std::string out;  // empty: standard output

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr std::array<std::string_view, 22> kConfigKeys = {
    "s0",        "s_bar",     "strike",   "maturity", "rate",    "sigma",    "lambda",  "rho",
    "payoff",    "cap_kind",  "cap_level", "cap_rate", "cap_shape", "cap_time", "n_paths", "n_steps",
    "n_basis",   "seed",      "n_runs",   "itm_only", "alive_only", "out"};

namespace detail {

inline double parse_real(std::string_view key, std::string_view value) {
    auto v = csv::parse_double(value);
    if (!v) throw ParameterError(std::string(key), "expected a number, got '" + std::string(value) + "'");
    return *v;
}

inline std::uint64_t parse_count(std::string_view key, std::string_view value) {
    auto v = csv::parse_uint(value);
    if (!v) throw ParameterError(std::string(key), "expected a non-negative integer, got '" + std::string(value) + "'");
    return *v;
}

inline bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParameterError(std::string(key), "expected true or false, got '" + std::string(value) + "'");
}

}  // namespace detail

/// Sets one configuration key from its textual value.
inline void set_key(RunConfig& c, std::string_view key, std::string_view value) {
    using detail::parse_count;
    using detail::parse_real;
    if (key == "s0") c.market.s0 = parse_real(key, value);
    else if (key == "s_bar") c.market.s_bar = parse_real(key, value);
    else if (key == "strike") c.market.strike = parse_real(key, value);
    else if (key == "maturity") c.market.maturity = parse_real(key, value);
    else if (key == "rate") c.market.rate = parse_real(key, value);
    else if (key == "sigma") c.market.sigma = parse_real(key, value);
    else if (key == "lambda") c.market.jump_intensity = parse_real(key, value);
    else if (key == "rho") c.market.jump_rate = parse_real(key, value);
    else if (key == "payoff") {
        if (value == "put") c.payoff = OptionKind::put;
        else if (value == "call") c.payoff = OptionKind::call;
        else throw ParameterError("payoff", "expected put or call, got '" + std::string(value) + "'");
    } else if (key == "cap_kind") {
        if (value == "none") c.cap_kind = CapKind::none;
        else if (value == "drawdown") c.cap_kind = CapKind::drawdown;
        else if (value == "exponential") c.cap_kind = CapKind::exponential;
        else if (value == "erlang") c.cap_kind = CapKind::erlang;
        else if (value == "deterministic") c.cap_kind = CapKind::deterministic;
        else throw ParameterError("cap_kind", "unknown cap kind '" + std::string(value) + "'");
    } else if (key == "cap_level") c.cap_level = parse_real(key, value);
    else if (key == "cap_rate") c.cap_rate = parse_real(key, value);
    else if (key == "cap_shape") {
        const auto shape = parse_count(key, value);
        if (shape > 1'000'000) throw ParameterError("cap_shape", "too large");
        c.cap_shape = static_cast<unsigned>(shape);
    } else if (key == "cap_time") c.cap_time = parse_real(key, value);
    else if (key == "n_paths") c.n_paths = parse_count(key, value);
    else if (key == "n_steps") c.n_steps = parse_count(key, value);
    else if (key == "n_basis") c.n_basis = parse_count(key, value);
    else if (key == "seed") c.seed = parse_count(key, value);
    else if (key == "n_runs") c.n_runs = parse_count(key, value);
    else if (key == "itm_only") c.itm_only = detail::parse_bool(key, value);
    else if (key == "alive_only") c.alive_only = detail::parse_bool(key, value);
    else if (key == "out") c.out = std::string(value);
    else throw ParameterError(std::string(key), "unknown configuration key");
}

/// Reads `key=value` lines over `base`. Blank lines and lines starting with '#' are skipped.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = csv::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ParameterError("line " + std::to_string(line_no), "expected key=value");
        set_key(base, csv::trim(text.substr(0, eq)), csv::trim(text.substr(eq + 1)));
    }
    return base;
}

inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    return parse_config(in, std::move(base));
}

/// All keys, one per line, in `kConfigKeys` order.
inline std::string emit_config(const RunConfig& c) {
    using csv::format_double;
    std::ostringstream os;
    auto put = [&](std::string_view k, const std::string& v) { os << k << '=' << v << '\n'; };
    put("s0", format_double(c.market.s0));
    put("s_bar", format_double(c.market.s_bar));
    put("strike", format_double(c.market.strike));
    put("maturity", format_double(c.market.maturity));
    put("rate", format_double(c.market.rate));
    put("sigma", format_double(c.market.sigma));
    put("lambda", format_double(c.market.jump_intensity));
    put("rho", format_double(c.market.jump_rate));
    put("payoff", to_string(c.payoff));
    put("cap_kind", to_string(c.cap_kind));
    put("cap_level", format_double(c.cap_level));
    put("cap_rate", format_double(c.cap_rate));
    put("cap_shape", std::to_string(c.cap_shape));
    put("cap_time", format_double(c.cap_time));
    put("n_paths", std::to_string(c.n_paths));
    put("n_steps", std::to_string(c.n_steps));
    put("n_basis", std::to_string(c.n_basis));
    put("seed", std::to_string(c.seed));
    put("n_runs", std::to_string(c.n_runs));
    put("itm_only", c.itm_only ? "true" : "false");
    put("alive_only", c.alive_only ? "true" : "false");
    put("out", c.out);
    return os.str();
}

/// Cap spec for a run with path seed `seed`. Random caps draw from their own
/// stream derived from the seed, independent of the path streams.
inline CapSpec make_cap_spec(const RunConfig& c, std::uint64_t seed) {
    const std::uint64_t sub_seed = stream_seed(seed, kCapStream, 0);
    switch (c.cap_kind) {
        case CapKind::none: return NoCap{};
        case CapKind::drawdown: return DrawdownCap{c.cap_level};
        case CapKind::exponential: return ExponentialCap{c.cap_rate, sub_seed};
        case CapKind::erlang: return ErlangCap{c.cap_shape, c.cap_rate, sub_seed};
        case CapKind::deterministic: return DeterministicCap{c.cap_time};
    }
    return NoCap{};
}

inline void validate(const RunConfig& c) {
    validate(c.market);
    validate(make_cap_spec(c, c.seed));
    if (c.n_paths < 1) throw ParameterError("n_paths", "must be >= 1");
    if (c.n_steps < 1) throw ParameterError("n_steps", "must be >= 1");
    if (c.n_basis < 1) throw ParameterError("n_basis", "must be >= 1");
    if (c.n_runs < 1) throw ParameterError("n_runs", "must be >= 1");
}

inline PricingConfig to_pricing_config(const RunConfig& c, std::uint64_t seed, unsigned workers = 1) {
    validate(c);
    PricingConfig p;
    p.market = c.market;
    p.payoff = PayoffSpec{c.payoff, c.market.strike};
    p.cap = make_cap_spec(c, seed);
    p.n_paths = c.n_paths;
    p.n_steps = c.n_steps;
    p.basis = BasisSpec{c.n_basis};
    p.seed = seed;
    p.options.itm_only = c.itm_only;
    p.options.alive_only = c.alive_only;
    p.workers = workers;
    return p;
}

}  // namespace capped_lsmc
