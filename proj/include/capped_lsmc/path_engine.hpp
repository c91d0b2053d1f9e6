#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "capped_lsmc/csv.hpp"
#include "capped_lsmc/market_model.hpp"
#include "capped_lsmc/rng.hpp"

namespace capped_lsmc {

/// Uniform exercise grid t_k = k T / L, k = 0..L.
class TimeGrid {
public:
    TimeGrid(double maturity, std::size_t steps) : maturity_(maturity), steps_(steps) {
        if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ParameterError("maturity", "must be positive");
        if (steps < 1) throw ParameterError("n_steps", "must be >= 1");
    }

    double maturity() const noexcept { return maturity_; }
    std::size_t steps() const noexcept { return steps_; }
    double dt() const noexcept { return maturity_ / static_cast<double>(steps_); }

    double time(std::size_t k) const noexcept {
        if (k >= steps_) return maturity_;
        return maturity_ * static_cast<double>(k) / static_cast<double>(steps_);
    }

    /// exp(-r * k * dt), evaluated as one exponential.
    double discount(double rate, std::size_t k) const noexcept {
        return std::exp(-rate * dt() * static_cast<double>(k));
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double maturity_;
    std::size_t steps_;
};

/// N simulated price paths on a uniform grid together with their running maxima.
/// Storage is time-major: the N prices at t_k are contiguous, which is the order
/// the backward induction reads them in.
class PathSet {
public:
    PathSet(TimeGrid grid, std::size_t n_paths, std::uint64_t seed)
        : grid_(grid), n_paths_(n_paths), seed_(seed) {
        const std::size_t width = grid_.steps() + 1;
        if (n_paths_ != 0 && width > std::numeric_limits<std::size_t>::max() / sizeof(double) / n_paths_)
            throw std::length_error("PathSet: table size overflows");
        prices_.assign(n_paths_ * width, 0.0);
        running_max_.assign(n_paths_ * width, 0.0);
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t width() const noexcept { return grid_.steps() + 1; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t n_jumps() const noexcept { return n_jumps_; }

    double price(std::size_t n, std::size_t k) const noexcept { return prices_[k * n_paths_ + n]; }
    double running_max(std::size_t n, std::size_t k) const noexcept { return running_max_[k * n_paths_ + n]; }
    double& price(std::size_t n, std::size_t k) noexcept { return prices_[k * n_paths_ + n]; }
    double& running_max(std::size_t n, std::size_t k) noexcept { return running_max_[k * n_paths_ + n]; }

    /// All N prices at t_k.
    std::span<const double> prices_at(std::size_t k) const noexcept {
        return {prices_.data() + k * n_paths_, n_paths_};
    }
    std::span<const double> running_max_at(std::size_t k) const noexcept {
        return {running_max_.data() + k * n_paths_, n_paths_};
    }

    /// Copy of path n's prices t_0..t_L.
    std::vector<double> path(std::size_t n) const {
        std::vector<double> out(width());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = price(n, k);
        return out;
    }

    void set_n_jumps(std::uint64_t n) noexcept { n_jumps_ = n; }

    friend bool operator==(const PathSet&, const PathSet&) = default;

private:
    TimeGrid grid_;
    std::size_t n_paths_;
    std::uint64_t seed_;
    std::uint64_t n_jumps_ = 0;
    std::vector<double> prices_;
    std::vector<double> running_max_;
};

/// Prefix maximum of `prices` seeded with `s_bar`, written into `out`.
inline void running_max_into(std::span<const double> prices, double s_bar, std::span<double> out) {
    if (prices.empty()) throw std::invalid_argument("running_max_of: empty price sequence");
    double m = s_bar;
    for (std::size_t k = 0; k < prices.size(); ++k) {
        m = std::max(m, prices[k]);
        out[k] = m;
    }
}

inline std::vector<double> running_max_of(std::span<const double> prices, double s_bar) {
    std::vector<double> out(prices.size());
    running_max_into(prices, s_bar, out);
    return out;
}

namespace detail {

/// Runs body(begin, end) over [0, n) split into contiguous chunks, one per worker.
template <class Body>
void parallel_chunks(std::size_t n, unsigned workers, Body&& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

/// Simulates S = exp(X) with X_t = log s0 + mu t + sigma B_t - sum_{k <= N_t} U_k.
/// Each step's log-increment is drawn exactly: mu dt + sigma sqrt(dt) Z minus a
/// Poisson(lambda dt) number of jumps. Path n uses its own engine seeded from
/// (seed, n), so the result does not depend on `workers`.
template <JumpLaw Law>
PathSet simulate(const BasicMarketParams<Law>& params, const TimeGrid& grid, std::size_t n_paths,
                 std::uint64_t seed, unsigned workers = 1) {
    if (n_paths == 0) throw ParameterError("n_paths", "must be >= 1");
    PathSet paths(grid, n_paths, seed);

    const std::size_t steps = grid.steps();
    const double dt = grid.dt();
    const double drift_step = params.drift() * dt;
    const double vol_step = params.sigma() * std::sqrt(dt);
    const double jump_mean = params.jump_intensity() * dt;
    const double s0 = params.s0();
    const double s_bar = params.s_bar();

    std::vector<std::uint64_t> jumps_per_path(n_paths, 0);

    // Paths advance in blocks so each time slice is written contiguously.
    constexpr std::size_t kBlock = 64;
    const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;

    detail::parallel_chunks(n_blocks, workers, [&](std::size_t block_begin, std::size_t block_end) {
        std::vector<Engine> engines;
        std::vector<std::normal_distribution<double>> normals;
        std::vector<std::poisson_distribution<int>> poissons;
        std::vector<double> log_return(kBlock);
        std::vector<double> maxima(kBlock);
        for (std::size_t b = block_begin; b < block_end; ++b) {
            const std::size_t first = b * kBlock;
            const std::size_t count = std::min(kBlock, n_paths - first);
            engines.clear();
            normals.clear();
            poissons.clear();
            for (std::size_t i = 0; i < count; ++i) {
                engines.push_back(make_engine(seed, kPathStream, first + i));
                normals.emplace_back(0.0, 1.0);
                poissons.emplace_back(jump_mean > 0.0 ? jump_mean : 1.0);
                log_return[i] = 0.0;
                maxima[i] = std::max(s_bar, s0);
                paths.price(first + i, 0) = s0;
                paths.running_max(first + i, 0) = maxima[i];
            }
            for (std::size_t k = 1; k <= steps; ++k) {
                for (std::size_t i = 0; i < count; ++i) {
                    Engine& engine = engines[i];
                    double increment = drift_step;
                    if (vol_step > 0.0) increment += vol_step * normals[i](engine);
                    if (jump_mean > 0.0) {
                        const int jumps = poissons[i](engine);
                        for (int q = 0; q < jumps; ++q) increment -= params.jumps().sample(engine);
                        jumps_per_path[first + i] += static_cast<std::uint64_t>(jumps);
                    }
                    log_return[i] += increment;
                    const double s = s0 * std::exp(log_return[i]);
                    maxima[i] = std::max(maxima[i], s);
                    paths.price(first + i, k) = s;
                    paths.running_max(first + i, k) = maxima[i];
                }
            }
        }
    });

    std::uint64_t total = 0;
    for (auto j : jumps_per_path) total += j;
    paths.set_n_jumps(total);
    return paths;
}

inline constexpr std::size_t kMaxDumpPaths = 100;

/// Debug dump: `path,step,time,price,running_max`, one row per (path, step).
inline void write_paths_csv(std::ostream& os, const PathSet& paths) {
    if (paths.n_paths() > kMaxDumpPaths)
        throw std::invalid_argument("write_paths_csv: path dumps are limited to 100 paths");
    os << "path,step,time,price,running_max\n";
    for (std::size_t n = 0; n < paths.n_paths(); ++n) {
        for (std::size_t k = 0; k < paths.width(); ++k) {
            os << n << ',' << k << ',' << csv::format_double(paths.grid().time(k)) << ','
               << csv::format_double(paths.price(n, k)) << ',' << csv::format_double(paths.running_max(n, k))
               << '\n';
        }
    }
}

}  // namespace capped_lsmc
