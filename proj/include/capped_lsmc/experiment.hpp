#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "capped_lsmc/config.hpp"
#include "capped_lsmc/csv.hpp"
#include "capped_lsmc/lsmc.hpp"
#include "capped_lsmc/rng.hpp"

namespace capped_lsmc {

inline PricingResult run_price(const RunConfig& config, unsigned workers = 1) {
    return price(to_pricing_config(config, config.seed, workers));
}

enum class SweepVariable { cap_level, s0, rate_sigma };

inline const char* to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::cap_level: return "cap_level";
        case SweepVariable::s0: return "s0";
        case SweepVariable::rate_sigma: return "rate_sigma";
    }
    return "";
}

/// One sweep coordinate; `second` is only used by the (rate, sigma) sweep.
struct SweepPoint {
    double value = 0.0;
    double second = 0.0;
};

struct SweepSpec {
    SweepVariable variable = SweepVariable::cap_level;
    std::vector<SweepPoint> points;
};

/// Configuration at one sweep point. The s0 sweep sets s_bar = s0.
inline RunConfig apply_point(RunConfig config, SweepVariable variable, const SweepPoint& point) {
    switch (variable) {
        case SweepVariable::cap_level:
            if (config.cap_kind != CapKind::drawdown)
                throw ParameterError("cap_kind", "a cap_level sweep requires cap_kind=drawdown");
            config.cap_level = point.value;
            break;
        case SweepVariable::s0:
            config.market.s0 = point.value;
            config.market.s_bar = point.value;
            break;
        case SweepVariable::rate_sigma:
            config.market.rate = point.value;
            config.market.sigma = point.second;
            break;
    }
    return config;
}

struct SweepRow {
    std::size_t point = 0;
    SweepPoint at;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double price = 0.0;
    double std_error = 0.0;
    double wall_ms = 0.0;
};

/// Across-run statistics at one sweep point (boxplot inputs).
struct SweepSummary {
    std::size_t point = 0;
    SweepPoint at;
    std::size_t n_runs = 0;
    double mean = 0.0;
    double sd = 0.0;
    double std_error = 0.0;  // sd / sqrt(n_runs)
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepSummary> summaries;
};

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline SweepSummary summarize(std::size_t point, const SweepPoint& at, std::vector<double> prices) {
    SweepSummary s;
    s.point = point;
    s.at = at;
    s.n_runs = prices.size();
    if (prices.empty()) return s;
    double sum = 0.0;
    for (double p : prices) sum += p;
    s.mean = sum / static_cast<double>(prices.size());
    double ss = 0.0;
    for (double p : prices) ss += (p - s.mean) * (p - s.mean);
    s.sd = prices.size() > 1 ? std::sqrt(ss / static_cast<double>(prices.size() - 1)) : 0.0;
    s.std_error = s.sd / std::sqrt(static_cast<double>(prices.size()));
    std::sort(prices.begin(), prices.end());
    s.min = prices.front();
    s.q1 = quantile_sorted(prices, 0.25);
    s.median = quantile_sorted(prices, 0.5);
    s.q3 = quantile_sorted(prices, 0.75);
    s.max = prices.back();
    return s;
}

/// Called once per completed sweep point with that point's rows (in run order) and summary.
using SweepSink = std::function<void(const std::vector<SweepRow>&, const SweepSummary&)>;

/// For each point, `n_runs` pricings with seeds run_seed(config.seed, run). The
/// same run seeds are reused at every point. Runs of one point execute on up to
/// `workers` threads; rows are delivered in (point, run) order. The first failure
/// aborts the sweep after earlier points have been delivered.
inline SweepResult run_sweep(const RunConfig& config, const SweepSpec& spec, std::size_t n_runs,
                             unsigned workers = 1, const SweepSink& sink = {}) {
    if (spec.points.empty()) throw ParameterError("points", "a sweep needs at least one point");
    if (n_runs < 1) throw ParameterError("n_runs", "must be >= 1");
    SweepResult result;
    for (std::size_t p = 0; p < spec.points.size(); ++p) {
        const RunConfig point_config = apply_point(config, spec.variable, spec.points[p]);
        validate(point_config);

        std::vector<SweepRow> rows(n_runs);
        std::vector<std::exception_ptr> errors(n_runs);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t r = next++; r < n_runs; r = next++) {
                try {
                    const std::uint64_t seed = run_seed(config.seed, r);
                    const auto t0 = std::chrono::steady_clock::now();
                    const PricingResult res = price(to_pricing_config(point_config, seed, 1));
                    const auto t1 = std::chrono::steady_clock::now();
                    rows[r] = SweepRow{p, spec.points[p], r, seed, res.price, res.std_error,
                                       std::chrono::duration<double, std::milli>(t1 - t0).count()};
                } catch (...) {
                    errors[r] = std::current_exception();
                }
            }
        };
        const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_runs)));
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        std::vector<double> prices;
        prices.reserve(n_runs);
        for (const auto& row : rows) prices.push_back(row.price);
        SweepSummary summary = summarize(p, spec.points[p], std::move(prices));
        if (sink) sink(rows, summary);
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
        result.summaries.push_back(summary);
    }
    return result;
}

inline void write_sweep_header(std::ostream& os, bool timing) {
    os << "kind,variable,value,value2,run,seed,price,std_error,mean,sd,min,q1,median,q3,max";
    if (timing) os << ",wall_ms";
    os << '\n';
}

namespace detail {
inline std::string second_field(SweepVariable v, const SweepPoint& at) {
    return v == SweepVariable::rate_sigma ? csv::format_double(at.second) : std::string();
}
}  // namespace detail

inline void write_sweep_row(std::ostream& os, SweepVariable v, const SweepRow& row, bool timing) {
    using csv::format_double;
    os << "run," << to_string(v) << ',' << format_double(row.at.value) << ',' << detail::second_field(v, row.at)
       << ',' << row.run << ',' << row.seed << ',' << format_double(row.price) << ','
       << format_double(row.std_error) << ",,,,,,,";
    if (timing) os << ',' << format_double(row.wall_ms);
    os << '\n';
}

inline void write_summary_row(std::ostream& os, SweepVariable v, const SweepSummary& s, bool timing) {
    using csv::format_double;
    os << "summary," << to_string(v) << ',' << format_double(s.at.value) << ',' << detail::second_field(v, s.at)
       << ",,,," << format_double(s.std_error) << ',' << format_double(s.mean) << ',' << format_double(s.sd) << ','
       << format_double(s.min) << ',' << format_double(s.q1) << ',' << format_double(s.median) << ','
       << format_double(s.q3) << ',' << format_double(s.max);
    if (timing) os << ',';
    os << '\n';
}

struct BenchRow {
    std::size_t n_paths = 0;
    double mean_ms = 0.0;
    double sd_ms = 0.0;
};

/// Wall-clock time of one single-threaded pricing at each path count, averaged over `reps`.
inline std::vector<BenchRow> run_bench(const RunConfig& config, const std::vector<std::size_t>& ladder,
                                       std::size_t reps = 3) {
    if (ladder.empty()) throw ParameterError("ladder", "needs at least one path count");
    if (reps < 1) throw ParameterError("reps", "must be >= 1");
    std::vector<BenchRow> out;
    for (std::size_t n : ladder) {
        RunConfig c = config;
        c.n_paths = n;
        validate(c);
        std::vector<double> times;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto pc = to_pricing_config(c, run_seed(c.seed, r), 1);
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = price(pc);
            const auto t1 = std::chrono::steady_clock::now();
            (void)res;
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        const SweepSummary s = summarize(0, {}, times);
        out.push_back(BenchRow{n, s.mean, s.sd});
    }
    return out;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << "n_paths,mean_ms,sd_ms\n";
    for (const auto& r : rows)
        os << r.n_paths << ',' << csv::format_double(r.mean_ms) << ',' << csv::format_double(r.sd_ms) << '\n';
}

}  // namespace capped_lsmc
