#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "capped_lsmc/csv.hpp"
#include "capped_lsmc/market_model.hpp"
#include "capped_lsmc/path_engine.hpp"
#include "capped_lsmc/rng.hpp"

namespace capped_lsmc {

/// Cap fires at the first grid time where 1 - S / S_max >= level.
struct DrawdownCap {
    double level = 1.0;
    friend bool operator==(const DrawdownCap&, const DrawdownCap&) = default;
};

/// Cap time independent of the paths, theta ~ Exp(rate).
struct ExponentialCap {
    double rate = 1.0;
    std::uint64_t sub_seed = 0;
    friend bool operator==(const ExponentialCap&, const ExponentialCap&) = default;
};

/// theta ~ Erlang(shape, rate), drawn as a sum of `shape` Exp(rate) variables.
struct ErlangCap {
    unsigned shape = 1;
    double rate = 1.0;
    std::uint64_t sub_seed = 0;
    friend bool operator==(const ErlangCap&, const ErlangCap&) = default;
};

struct DeterministicCap {
    double time = 0.0;
    friend bool operator==(const DeterministicCap&, const DeterministicCap&) = default;
};

struct NoCap {
    friend bool operator==(const NoCap&, const NoCap&) = default;
};

using CapSpec = std::variant<NoCap, DrawdownCap, ExponentialCap, ErlangCap, DeterministicCap>;
using IndependentCap = std::variant<ExponentialCap, ErlangCap>;

inline const char* cap_kind_name(const CapSpec& spec) {
    return std::visit(
        [](const auto& c) -> const char* {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NoCap>) return "none";
            else if constexpr (std::is_same_v<T, DrawdownCap>) return "drawdown";
            else if constexpr (std::is_same_v<T, ExponentialCap>) return "exponential";
            else if constexpr (std::is_same_v<T, ErlangCap>) return "erlang";
            else return "deterministic";
        },
        spec);
}

/// The parameter reported in the `cap_level` result column: drawdown level,
/// cap rate for the random caps, cap time for the deterministic cap. NaN for none.
inline double cap_level_value(const CapSpec& spec) {
    return std::visit(
        [](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NoCap>) return std::numeric_limits<double>::quiet_NaN();
            else if constexpr (std::is_same_v<T, DrawdownCap>) return c.level;
            else if constexpr (std::is_same_v<T, DeterministicCap>) return c.time;
            else return c.rate;
        },
        spec);
}

/// Per-path first grid index kappa(n) at which the option is capped. The option
/// is alive at t_j iff j < kappa(n); `never` means the cap does not fire by T.
class CapIndices {
public:
    static constexpr std::size_t never = std::numeric_limits<std::size_t>::max();

    CapIndices(std::size_t steps, std::vector<std::size_t> kappa) : steps_(steps), kappa_(std::move(kappa)) {
        for (auto k : kappa_)
            if (k != never && k > steps_) throw std::invalid_argument("CapIndices: index exceeds grid");
    }

    static CapIndices uncapped(std::size_t steps, std::size_t n_paths) {
        return CapIndices(steps, std::vector<std::size_t>(n_paths, never));
    }

    std::size_t steps() const noexcept { return steps_; }
    std::size_t n_paths() const noexcept { return kappa_.size(); }
    std::size_t kappa(std::size_t n) const noexcept { return kappa_[n]; }
    bool is_never(std::size_t n) const noexcept { return kappa_[n] == never; }
    bool alive(std::size_t n, std::size_t j) const noexcept { return j < kappa_[n]; }

    /// min(L, kappa(n)): where the path's payoff is collected if never exercised earlier.
    std::size_t terminal_index(std::size_t n) const noexcept { return std::min(steps_, kappa_[n]); }

    const std::vector<std::size_t>& values() const noexcept { return kappa_; }

    friend bool operator==(const CapIndices&, const CapIndices&) = default;

private:
    std::size_t steps_;
    std::vector<std::size_t> kappa_;
};

/// First grid index k with t_k >= t, or `never` if t > T.
inline std::size_t first_index_at_or_after(const TimeGrid& grid, double t) {
    if (t <= 0.0) return 0;
    if (t > grid.maturity()) return CapIndices::never;
    const std::size_t steps = grid.steps();
    auto k = static_cast<std::size_t>(std::min<double>(std::ceil(t / grid.dt()), static_cast<double>(steps)));
    while (k > 0 && grid.time(k - 1) >= t) --k;
    while (k < steps && grid.time(k) < t) ++k;
    return k;
}

inline void validate_drawdown_level(double level) {
    if (!(level > 0.0 && level <= 1.0)) throw ParameterError("cap_level", "drawdown level must lie in (0, 1]");
}

/// kappa(n) = min{k : 1 - S_k / S_max_k >= C}, checked on grid points only.
inline CapIndices cap_indices_drawdown(const PathSet& paths, double level) {
    validate_drawdown_level(level);
    const std::size_t steps = paths.grid().steps();
    const std::size_t n_paths = paths.n_paths();
    std::vector<std::size_t> kappa(n_paths, CapIndices::never);
    for (std::size_t k = 0; k <= steps; ++k) {
        const auto prices = paths.prices_at(k);
        const auto maxima = paths.running_max_at(k);
        for (std::size_t n = 0; n < n_paths; ++n) {
            if (kappa[n] == CapIndices::never && 1.0 - prices[n] / maxima[n] >= level) kappa[n] = k;
        }
    }
    return CapIndices(steps, std::move(kappa));
}

inline void validate(const ExponentialCap& cap) {
    if (!(cap.rate > 0.0 && std::isfinite(cap.rate))) throw ParameterError("cap_rate", "must be positive");
}

inline void validate(const ErlangCap& cap) {
    if (cap.shape < 1) throw ParameterError("cap_shape", "must be >= 1");
    if (!(cap.rate > 0.0 && std::isfinite(cap.rate))) throw ParameterError("cap_rate", "must be positive");
}

/// Raw cap times theta(n), one independent stream per path under the cap's sub-seed.
inline std::vector<double> draw_cap_times(const IndependentCap& cap, std::size_t n_paths) {
    std::vector<double> theta(n_paths);
    std::visit(
        [&](const auto& c) {
            validate(c);
            using T = std::decay_t<decltype(c)>;
            const unsigned shape = [&] {
                if constexpr (std::is_same_v<T, ErlangCap>) return c.shape;
                else return 1u;
            }();
            for (std::size_t n = 0; n < n_paths; ++n) {
                Engine engine = make_engine(c.sub_seed, kCapStream, n);
                std::exponential_distribution<double> exp_draw(c.rate);
                double t = 0.0;
                for (unsigned i = 0; i < shape; ++i) t += exp_draw(engine);
                theta[n] = t;
            }
        },
        cap);
    return theta;
}

inline CapIndices cap_indices_independent(const IndependentCap& cap, const TimeGrid& grid, std::size_t n_paths) {
    const auto theta = draw_cap_times(cap, n_paths);
    std::vector<std::size_t> kappa(n_paths);
    for (std::size_t n = 0; n < n_paths; ++n) kappa[n] = first_index_at_or_after(grid, theta[n]);
    return CapIndices(grid.steps(), std::move(kappa));
}

inline CapIndices cap_indices_deterministic(double t_star, const TimeGrid& grid, std::size_t n_paths) {
    if (!(t_star >= 0.0)) throw ParameterError("cap_time", "must be >= 0");
    return CapIndices(grid.steps(), std::vector<std::size_t>(n_paths, first_index_at_or_after(grid, t_star)));
}

inline void validate(const CapSpec& spec) {
    std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, DrawdownCap>) validate_drawdown_level(c.level);
            else if constexpr (std::is_same_v<T, ExponentialCap> || std::is_same_v<T, ErlangCap>) validate(c);
            else if constexpr (std::is_same_v<T, DeterministicCap>) {
                if (!(c.time >= 0.0 && std::isfinite(c.time))) throw ParameterError("cap_time", "must be >= 0");
            }
        },
        spec);
}

inline CapIndices compute_caps(const CapSpec& spec, const PathSet& paths) {
    return std::visit(
        [&](const auto& c) -> CapIndices {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NoCap>)
                return CapIndices::uncapped(paths.grid().steps(), paths.n_paths());
            else if constexpr (std::is_same_v<T, DrawdownCap>) return cap_indices_drawdown(paths, c.level);
            else if constexpr (std::is_same_v<T, DeterministicCap>)
                return cap_indices_deterministic(c.time, paths.grid(), paths.n_paths());
            else return cap_indices_independent(IndependentCap{c}, paths.grid(), paths.n_paths());
        },
        spec);
}

/// Debug dump: `path,kappa,cap_time`; both fields empty when the cap never fires.
inline void write_caps_csv(std::ostream& os, const CapIndices& caps, const TimeGrid& grid) {
    os << "path,kappa,cap_time\n";
    for (std::size_t n = 0; n < caps.n_paths(); ++n) {
        os << n << ',';
        if (caps.is_never(n)) {
            os << ",\n";
        } else {
            os << caps.kappa(n) << ',' << csv::format_double(grid.time(caps.kappa(n))) << '\n';
        }
    }
}

}  // namespace capped_lsmc
