#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <random>
#include <vector>

#include "capped_lsmc/path_engine.hpp"
#include "capped_lsmc/rng.hpp"

namespace capped_lsmc::oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Black-Scholes European put; the zero-volatility limit is (K e^{-rT} - s0)^+.
inline double bs_european_put(double s0, double strike, double rate, double sigma, double maturity) {
    if (!(maturity > 0.0)) throw std::invalid_argument("bs_european_put: maturity must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("bs_european_put: sigma must be >= 0");
    if (strike <= 0.0) return 0.0;
    const double df = std::exp(-rate * maturity);
    if (sigma == 0.0) return std::max(strike * df - s0, 0.0);
    const double vol = sigma * std::sqrt(maturity);
    const double d1 = (std::log(s0 / strike) + (rate + 0.5 * sigma * sigma) * maturity) / vol;
    const double d2 = d1 - vol;
    return strike * df * normal_cdf(-d2) - s0 * normal_cdf(-d1);
}

/// Cox-Ross-Rubinstein tree: u = e^{sigma sqrt(dt)}, d = 1/u,
/// p = (e^{r dt} - d) / (u - d).
struct Lattice {
    double s0;
    double dt;
    double up;
    double prob_up;
    double discount;  // e^{-r dt}

    Lattice(double s0_, double rate, double sigma, double maturity, std::size_t steps) : s0(s0_) {
        if (steps < 1) throw std::invalid_argument("lattice: steps must be >= 1");
        if (!(maturity > 0.0)) throw std::invalid_argument("lattice: maturity must be positive");
        dt = maturity / static_cast<double>(steps);
        up = std::exp(sigma * std::sqrt(dt));
        const double down = 1.0 / up;
        prob_up = (std::exp(rate * dt) - down) / (up - down);
        if (!(prob_up > 0.0 && prob_up < 1.0))
            throw std::invalid_argument("lattice: risk-neutral probability outside (0, 1)");
        discount = std::exp(-rate * dt);
    }

    /// Price at net level l (ups minus downs).
    double price(long level) const { return s0 * std::pow(up, static_cast<double>(level)); }

    double rollback(double value_up, double value_down) const {
        return discount * (prob_up * value_up + (1.0 - prob_up) * value_down);
    }
};

inline double put_payoff(double strike, double s) { return std::max(strike - s, 0.0); }

inline double crr_american_put(double s0, double strike, double rate, double sigma, double maturity,
                               std::size_t steps) {
    const Lattice lat(s0, rate, sigma, maturity, steps);
    const auto n = static_cast<long>(steps);
    // values[i]: node with i up-moves at the current time
    std::vector<double> values(steps + 1);
    for (long i = 0; i <= n; ++i) values[static_cast<std::size_t>(i)] = put_payoff(strike, lat.price(2 * i - n));
    for (long k = n - 1; k >= 0; --k) {
        for (long i = 0; i <= k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double cont = lat.rollback(values[ui + 1], values[ui]);
            values[ui] = std::max(put_payoff(strike, lat.price(2 * i - k)), cont);
        }
    }
    return values[0];
}

inline constexpr std::size_t kMaxCappedLatticeSteps = 24;

/// Smallest lattice level m with s0 u^m >= s_bar (s_bar >= s0).
inline long lattice_max_level(const Lattice& lat, double s_bar) {
    if (s_bar <= lat.s0) return 0;
    auto m = static_cast<long>(std::ceil(std::log(s_bar / lat.s0) / std::log(lat.up)));
    while (m > 0 && lat.price(m - 1) >= s_bar) --m;
    while (lat.price(m) < s_bar) ++m;
    return m;
}

/// Running maximum at issue after snapping s_bar up to the lattice.
inline double lattice_s_bar(double s0, double s_bar, double rate, double sigma, double maturity,
                            std::size_t steps) {
    const Lattice lat(s0, rate, sigma, maturity, steps);
    return lat.price(lattice_max_level(lat, s_bar));
}

/// Exact Bermudan value of the drawdown-capped American put on the CRR tree.
///
/// State (k, level, max level). A state with 1 - S / S_max >= C is capped and
/// pays (K - S)^+ on the spot; otherwise the holder takes the larger of exercise
/// and the discounted one-step expectation. s_bar is snapped to the lowest lattice
/// level at or above it (see `lattice_s_bar`). The tree filtration is not the
/// Brownian one, so this is a convergence target rather than the continuous price.
inline double lattice_capped_put(double s0, double s_bar, double strike, double rate, double sigma,
                                 double maturity, std::size_t steps, double cap_level) {
    if (steps > kMaxCappedLatticeSteps)
        throw std::length_error("lattice_capped_put: at most 24 lattice steps are supported");
    if (!(cap_level > 0.0 && cap_level <= 1.0))
        throw std::invalid_argument("lattice_capped_put: cap level must lie in (0, 1]");
    if (s_bar < s0) throw std::invalid_argument("lattice_capped_put: s_bar must be >= s0");
    const Lattice lat(s0, rate, sigma, maturity, steps);
    const long base = lattice_max_level(lat, s_bar);
    const auto n = static_cast<long>(steps);
    const std::size_t width = steps + 1;

    auto capped = [&](long level, long max_level) {
        return 1.0 - lat.price(level) / lat.price(max_level) >= cap_level;
    };

    // values[i * width + mi]: i up-moves, running max level base + mi
    std::vector<double> next(width * width, 0.0);
    std::vector<double> cur(width * width, 0.0);
    for (long i = 0; i <= n; ++i)
        for (long mi = 0; mi <= n; ++mi)
            next[static_cast<std::size_t>(i) * width + static_cast<std::size_t>(mi)] =
                put_payoff(strike, lat.price(2 * i - n));

    for (long k = n - 1; k >= 0; --k) {
        for (long i = 0; i <= k; ++i) {
            const long level = 2 * i - k;
            const double exercise = put_payoff(strike, lat.price(level));
            for (long mi = 0; mi <= k; ++mi) {
                const long max_level = base + mi;
                double v = exercise;
                if (!capped(level, max_level)) {
                    const long up_mi = std::max(max_level, level + 1) - base;
                    const double vu = next[static_cast<std::size_t>(i + 1) * width + static_cast<std::size_t>(up_mi)];
                    const double vd = next[static_cast<std::size_t>(i) * width + static_cast<std::size_t>(mi)];
                    v = std::max(exercise, lat.rollback(vu, vd));
                }
                cur[static_cast<std::size_t>(i) * width + static_cast<std::size_t>(mi)] = v;
            }
        }
        std::swap(cur, next);
    }
    return next[0];
}

/// Paths drawn from the CRR tree itself (up with probability p), with the running
/// maximum seeded at the lattice-snapped s_bar. Running LSMC on these prices the
/// same discrete problem as `lattice_capped_put`.
inline PathSet sample_lattice_paths(double s0, double s_bar, double rate, double sigma, double maturity,
                                    std::size_t steps, std::size_t n_paths, std::uint64_t seed) {
    const Lattice lat(s0, rate, sigma, maturity, steps);
    const double max0 = std::max(s0, lat.price(lattice_max_level(lat, s_bar)));
    PathSet paths(TimeGrid(maturity, steps), n_paths, seed);
    for (std::size_t n = 0; n < n_paths; ++n) {
        Engine engine = make_engine(seed, kPathStream, n);
        std::bernoulli_distribution up(lat.prob_up);
        long level = 0;
        double running = max0;
        paths.price(n, 0) = s0;
        paths.running_max(n, 0) = running;
        for (std::size_t k = 1; k <= steps; ++k) {
            level += up(engine) ? 1 : -1;
            const double s = lat.price(level);
            running = std::max(running, s);
            paths.price(n, k) = s;
            paths.running_max(n, k) = running;
        }
    }
    return paths;
}

}  // namespace capped_lsmc::oracles
