#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "capped_lsmc/cap_models.hpp"
#include "capped_lsmc/csv.hpp"
#include "capped_lsmc/market_model.hpp"
#include "capped_lsmc/path_engine.hpp"
#include "capped_lsmc/regression.hpp"

namespace capped_lsmc {

struct LsmcOptions {
    /// Regress only on paths that are still alive (j < kappa).
    bool alive_only = false;
    /// Regress and decide only on in-the-money paths.
    bool itm_only = false;
    /// No exercise before maturity (and no comparison with the t=0 payoff).
    bool european = false;
    /// Keep the per-date regression coefficients in the result.
    bool keep_coefficients = false;
    /// Allow exercise with a zero payoff when the fitted continuation is <= 0.
    /// Off by default: the true continuation is never negative, so such a stop can
    /// only discard value when the regression undershoots out of the money.
    bool exercise_at_zero_payoff = false;
};

/// Per-path outcome of the backward induction.
struct StoppingState {
    std::vector<std::size_t> exercise_index;
    std::vector<double> cashflow;             // undiscounted payoff at exercise_index
    std::vector<double> discounted_cashflow;  // e^{-r t_e} * cashflow
};

struct PricingResult {
    double price = 0.0;
    double std_error = 0.0;
    double mean_cashflow = 0.0;  // Monte Carlo mean before taking the max with the t=0 payoff
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::size_t n_basis = 0;
    std::uint64_t seed = 0;
    CapSpec cap = NoCap{};
    double mean_exercise_time = 0.0;
    std::size_t deficient_fits = 0;
    StoppingState stopping;
    std::vector<RegressionStep> coefficients;  // filled when keep_coefficients is set, ordered by date
};

/// Modified Longstaff-Schwartz backward induction with a time cap.
///
/// Every path starts with its payoff collected at min(L, kappa(n)). Walking back
/// from j = L-1 to 1, the continuation value is regressed over the selected rows
/// (by default all N paths) on the basis at x = S_j / K, with targets equal to
/// each path's current cashflow discounted back to t_j. A path that is alive at
/// t_j (j < kappa) exercises when its immediate payoff is positive and at least
/// the fitted continuation. Capped paths never move past kappa since the continuation is
/// switched off from the cap onwards.
///
/// The price is max(G(s0), mean of discounted cashflows); the standard error is
/// the sample deviation of the discounted cashflows over sqrt(N).
template <JumpLaw Law>
PricingResult backward_induct(const PathSet& paths, const CapIndices& caps, const PayoffSpec& payoff_spec,
                              const BasisSpec& basis, const BasicMarketParams<Law>& params,
                              const LsmcOptions& options = {}) {
    if (caps.n_paths() != paths.n_paths() || caps.steps() != paths.grid().steps())
        throw std::invalid_argument("backward_induct: paths and cap indices disagree in shape");
    if (basis.count < 1) throw ParameterError("n_basis", "must be >= 1");

    const TimeGrid& grid = paths.grid();
    const std::size_t n_paths = paths.n_paths();
    const std::size_t steps = grid.steps();
    const std::size_t m = basis.count;
    const double strike = payoff_spec.strike;

    std::vector<double> discount(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) discount[k] = grid.discount(params.rate(), k);

    std::vector<std::size_t> exercise(n_paths);
    std::vector<double> value(n_paths);
    for (std::size_t n = 0; n < n_paths; ++n) {
        const std::size_t e = options.european ? steps : caps.terminal_index(n);
        exercise[n] = e;
        value[n] = payoff(payoff_spec, paths.price(n, e));
    }

    PricingResult result;
    if (options.keep_coefficients && !options.european) result.coefficients.reserve(steps > 1 ? steps - 1 : 0);

    std::vector<double> phi(n_paths * m);
    std::vector<double> immediate(n_paths);
    std::vector<std::size_t> rows;
    rows.reserve(n_paths);
    Eigen::MatrixXd design;
    Eigen::VectorXd targets;

    for (std::size_t j = steps - 1; !options.european && j >= 1; --j) {
        rows.clear();
        const auto slice = paths.prices_at(j);
        for (std::size_t n = 0; n < n_paths; ++n) {
            const double s = slice[n];
            immediate[n] = payoff(payoff_spec, s);
            basis_eval_into(m, s / strike, std::span<double>(phi.data() + n * m, m));
            if (options.alive_only && !caps.alive(n, j)) continue;
            if (options.itm_only && !(immediate[n] > 0.0)) continue;
            rows.push_back(n);
        }

        const auto n_rows = static_cast<Eigen::Index>(rows.size());
        design.resize(n_rows, static_cast<Eigen::Index>(m));
        targets.resize(n_rows);
        for (Eigen::Index i = 0; i < n_rows; ++i) {
            const std::size_t n = rows[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < m; ++k) design(i, static_cast<Eigen::Index>(k)) = phi[n * m + k];
            // a path capped before t_j keeps its payoff at kappa, carried forward to t_j
            const std::size_t e = exercise[n];
            targets(i) = e >= j ? value[n] * discount[e - j] : value[n] / discount[j - e];
        }
        RegressionStep step = fit_design(design, targets, j);
        if (step.rank == RankFlag::deficient) ++result.deficient_fits;

        for (std::size_t n = 0; n < n_paths; ++n) {
            if (!caps.alive(n, j)) continue;
            if (options.itm_only && !(immediate[n] > 0.0)) continue;
            const double continuation = step.continuation(std::span<const double>(phi.data() + n * m, m));
            if (!options.exercise_at_zero_payoff && !(immediate[n] > 0.0)) continue;
            if (immediate[n] >= continuation) {
                exercise[n] = j;
                value[n] = immediate[n];
            }
        }
        if (options.keep_coefficients) result.coefficients.push_back(std::move(step));
    }
    std::reverse(result.coefficients.begin(), result.coefficients.end());

    StoppingState& state = result.stopping;
    state.exercise_index = exercise;
    state.cashflow = value;
    state.discounted_cashflow.resize(n_paths);
    double sum = 0.0;
    double time_sum = 0.0;
    for (std::size_t n = 0; n < n_paths; ++n) {
        state.discounted_cashflow[n] = discount[exercise[n]] * value[n];
        sum += state.discounted_cashflow[n];
        time_sum += grid.time(exercise[n]);
    }
    const double mean = sum / static_cast<double>(n_paths);
    double ss = 0.0;
    for (double d : state.discounted_cashflow) ss += (d - mean) * (d - mean);
    const double sd = n_paths > 1 ? std::sqrt(ss / static_cast<double>(n_paths - 1)) : 0.0;

    result.mean_cashflow = mean;
    result.price = options.european ? mean : std::max(payoff(payoff_spec, params.s0()), mean);
    result.std_error = sd / std::sqrt(static_cast<double>(n_paths));
    result.n_paths = n_paths;
    result.n_steps = steps;
    result.n_basis = m;
    result.seed = paths.seed();
    result.mean_exercise_time = time_sum / static_cast<double>(n_paths);
    return result;
}

/// Everything needed for one pricing run.
struct PricingConfig {
    MarketInputs market;
    PayoffSpec payoff;
    CapSpec cap = NoCap{};
    std::size_t n_paths = 5000;
    std::size_t n_steps = 2000;
    BasisSpec basis;
    std::uint64_t seed = 1;
    LsmcOptions options;
    unsigned workers = 1;
};

/// simulate -> cap indices -> backward induction. Deterministic in (seed, config).
inline PricingResult price(const PricingConfig& config) {
    const MarketParams market = make_market(config.market);
    validate(config.cap);
    if (config.basis.count < 1) throw ParameterError("n_basis", "must be >= 1");
    const TimeGrid grid(market.maturity(), config.n_steps);
    const PathSet paths = simulate(market, grid, config.n_paths, config.seed, config.workers);
    const CapIndices caps = compute_caps(config.cap, paths);
    PricingResult result = backward_induct(paths, caps, config.payoff, config.basis, market, config.options);
    result.cap = config.cap;
    return result;
}

inline constexpr const char* kPricingHeader = "price,std_error,n_paths,n_steps,n_basis,seed,cap_kind,cap_level";

/// One CSV line (no header) in `kPricingHeader` column order.
inline void write_pricing_row(std::ostream& os, const PricingResult& r) {
    const double level = cap_level_value(r.cap);
    os << csv::format_double(r.price) << ',' << csv::format_double(r.std_error) << ',' << r.n_paths << ','
       << r.n_steps << ',' << r.n_basis << ',' << r.seed << ',' << cap_kind_name(r.cap) << ','
       << (std::isnan(level) ? std::string() : csv::format_double(level)) << '\n';
}

/// Per-date coefficient dump: `j,alpha_0..alpha_{M-1},rank_flag`.
inline void write_coefficients_csv(std::ostream& os, const std::vector<RegressionStep>& steps, std::size_t n_basis) {
    os << 'j';
    for (std::size_t k = 0; k < n_basis; ++k) os << ",alpha_" << k;
    os << ",rank_flag\n";
    for (const auto& s : steps) {
        os << s.date;
        for (double a : s.coefficients) os << ',' << csv::format_double(a);
        os << ',' << to_string(s.rank) << '\n';
    }
}

}  // namespace capped_lsmc
