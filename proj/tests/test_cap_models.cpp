#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "capped_lsmc/cap_models.hpp"
#include "test_support.hpp"

using namespace capped_lsmc;

namespace {

constexpr std::size_t kNever = CapIndices::never;

PathSet levy_paths(std::size_t n_paths, std::size_t steps, std::uint64_t seed) {
    const auto params = make_market({100.0, 105.0, 110.0, 1.0, 0.1, 0.5, 0.0675, 0.5});
    return simulate(params, TimeGrid(1.0, steps), n_paths, seed);
}

// NEVER compares as +infinity.
bool kappa_le(std::size_t a, std::size_t b) { return b == kNever || (a != kNever && a <= b); }

}  // namespace

TEST(DrawdownCap, ImmediateCapWhenStartingInDrawdown) {
    const auto paths = levy_paths(200, 50, 1);
    const auto caps = cap_indices_drawdown(paths, 0.04);
    for (std::size_t n = 0; n < caps.n_paths(); ++n) EXPECT_EQ(caps.kappa(n), 0u);
}

TEST(DrawdownCap, HandPath) {
    const auto paths = fixtures::make_paths({{100.0, 95.0, 92.0}}, 105.0);
    EXPECT_EQ(cap_indices_drawdown(paths, 0.1).kappa(0), 2u);
    EXPECT_EQ(cap_indices_drawdown(paths, 0.09).kappa(0), 1u);
    EXPECT_EQ(cap_indices_drawdown(paths, 0.13).kappa(0), kNever);
}

TEST(DrawdownCap, LevelOneNeverFires) {
    const auto paths = levy_paths(300, 200, 2);
    const auto caps = cap_indices_drawdown(paths, 1.0);
    for (std::size_t n = 0; n < caps.n_paths(); ++n) EXPECT_TRUE(caps.is_never(n));
}

TEST(DrawdownCap, RejectsLevelOutsideUnitInterval) {
    const auto paths = levy_paths(2, 5, 3);
    for (double bad : {0.0, -0.1, 1.5, std::nan("")}) {
        try {
            cap_indices_drawdown(paths, bad);
            FAIL() << "accepted " << bad;
        } catch (const ParameterError& e) {
            EXPECT_EQ(e.field(), "cap_level");
        }
    }
}

TEST(DrawdownCap, MonotoneInLevel) {
    const auto paths = levy_paths(500, 200, 4);
    std::vector<CapIndices> by_level;
    for (int i = 1; i <= 10; ++i) by_level.push_back(cap_indices_drawdown(paths, 0.1 * i));
    for (std::size_t l = 1; l < by_level.size(); ++l)
        for (std::size_t n = 0; n < paths.n_paths(); ++n)
            ASSERT_TRUE(kappa_le(by_level[l - 1].kappa(n), by_level[l].kappa(n))) << "n=" << n;
}

TEST(DrawdownCap, MatchesDirectScanOfEachPath) {
    const auto paths = levy_paths(300, 100, 5);
    const auto caps = cap_indices_drawdown(paths, 0.2);
    for (std::size_t n = 0; n < paths.n_paths(); ++n) {
        const auto row = paths.path(n);
        double m = 105.0;
        std::size_t expected = kNever;
        for (std::size_t k = 0; k < row.size(); ++k) {
            m = std::max(m, row[k]);
            if (1.0 - row[k] / m >= 0.2) {
                expected = k;
                break;
            }
        }
        EXPECT_EQ(caps.kappa(n), expected);
    }
}

TEST(CapIndices, AliveSetsAreNested) {
    const auto paths = levy_paths(400, 100, 6);
    const auto caps = cap_indices_drawdown(paths, 0.15);
    for (std::size_t n = 0; n < caps.n_paths(); ++n)
        for (std::size_t j = 1; j <= 100; ++j)
            if (caps.alive(n, j)) {
                ASSERT_TRUE(caps.alive(n, j - 1));
            }
    EXPECT_THROW(CapIndices(10, {11}), std::invalid_argument);
}

TEST(ExponentialCap, HugeRateCapsAtFirstExerciseDate) {
    // theta > 0 almost surely, so the first grid time at or after it is t_1
    const TimeGrid grid(1.0, 100);
    const auto caps = cap_indices_independent(ExponentialCap{1e9, 7}, grid, 1000);
    for (std::size_t n = 0; n < caps.n_paths(); ++n) EXPECT_EQ(caps.kappa(n), 1u);
}

TEST(ExponentialCap, NeverFractionMatchesTail) {
    // E theta = 2T  =>  P[theta > T] = e^{-1/2}
    const std::size_t n = 40000;
    const auto caps = cap_indices_independent(ExponentialCap{0.5, 11}, TimeGrid(1.0, 50), n);
    std::size_t never = 0;
    for (std::size_t i = 0; i < n; ++i) never += caps.is_never(i) ? 1 : 0;
    const double p = std::exp(-0.5);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    EXPECT_LE(std::abs(static_cast<double>(never) / static_cast<double>(n) - p), 3.0 * se);
}

TEST(ExponentialCap, GridMappingIsFirstTimeAtOrAfterTheta) {
    const TimeGrid grid(1.0, 40);
    const ExponentialCap cap{2.0, 19};
    const auto theta = draw_cap_times(IndependentCap{cap}, 500);
    const auto caps = cap_indices_independent(cap, grid, 500);
    for (std::size_t n = 0; n < 500; ++n) {
        if (theta[n] > 1.0) {
            EXPECT_TRUE(caps.is_never(n));
            continue;
        }
        const std::size_t k = caps.kappa(n);
        EXPECT_GE(grid.time(k), theta[n]);
        if (k > 0) {
            EXPECT_LT(grid.time(k - 1), theta[n]);
        }
    }
}

TEST(ErlangCap, CensoredMeanMatchesClosedForm) {
    const double q = 1.5, T = 1.0;
    const std::size_t n = 40000;
    const auto theta = draw_cap_times(IndependentCap{ErlangCap{2, q, 23}}, n);
    double sum = 0.0, sum_sq = 0.0;
    for (double t : theta) {
        const double c = std::min(t, T);
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt((sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
    // E min(theta, T) = int_0^T P[theta > t] dt with P[theta > t] = e^{-qt}(1 + qt)
    const double closed = (1.0 - std::exp(-q * T)) / q + (1.0 - std::exp(-q * T) * (1.0 + q * T)) / q;
    const double quad = fixtures::simpson([&](double t) { return std::exp(-q * t) * (1.0 + q * t); }, 0.0, T, 2000);
    EXPECT_NEAR(closed, quad, 1e-12);
    EXPECT_LE(std::abs(mean - closed), 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(ErlangCap, ShapeOneEqualsExponential) {
    const TimeGrid grid(1.0, 30);
    EXPECT_EQ(cap_indices_independent(ErlangCap{1, 1.3, 5}, grid, 300),
              cap_indices_independent(ExponentialCap{1.3, 5}, grid, 300));
}

TEST(IndependentCap, DependsOnlyOnSubSeed) {
    const auto a = levy_paths(250, 60, 100);
    const auto b = levy_paths(250, 60, 200);
    const CapSpec spec = ErlangCap{3, 2.0, 77};
    EXPECT_EQ(compute_caps(spec, a), compute_caps(spec, b));
    EXPECT_NE(compute_caps(ErlangCap{3, 2.0, 78}, a), compute_caps(spec, a));
}

TEST(IndependentCap, RejectsBadParameters) {
    const TimeGrid grid(1.0, 10);
    EXPECT_THROW(cap_indices_independent(ExponentialCap{0.0, 1}, grid, 5), std::invalid_argument);
    EXPECT_THROW(cap_indices_independent(ExponentialCap{-1.0, 1}, grid, 5), std::invalid_argument);
    EXPECT_THROW(cap_indices_independent(ErlangCap{0, 1.0, 1}, grid, 5), std::invalid_argument);
}

TEST(DeterministicCap, Examples) {
    const std::size_t steps = 100;
    const TimeGrid grid(1.0, steps);
    EXPECT_EQ(cap_indices_deterministic(0.0, grid, 3).values(), std::vector<std::size_t>(3, 0));
    EXPECT_EQ(cap_indices_deterministic(1.0, grid, 3).values(), std::vector<std::size_t>(3, steps));
    EXPECT_EQ(cap_indices_deterministic(0.5 + grid.dt() / 3.0, grid, 3).values(),
              std::vector<std::size_t>(3, steps / 2 + 1));
    EXPECT_EQ(cap_indices_deterministic(0.5, grid, 1).kappa(0), steps / 2);
    EXPECT_TRUE(cap_indices_deterministic(1.5, grid, 1).is_never(0));
    EXPECT_THROW(cap_indices_deterministic(-0.1, grid, 1), ParameterError);
}

TEST(ComputeCaps, NoneAndDispatch) {
    const auto paths = levy_paths(20, 10, 9);
    const auto none = compute_caps(NoCap{}, paths);
    for (std::size_t n = 0; n < 20; ++n) EXPECT_TRUE(none.is_never(n));
    EXPECT_EQ(compute_caps(DrawdownCap{0.3}, paths), cap_indices_drawdown(paths, 0.3));
    EXPECT_STREQ(cap_kind_name(DrawdownCap{0.3}), "drawdown");
    EXPECT_STREQ(cap_kind_name(NoCap{}), "none");
    EXPECT_TRUE(std::isnan(cap_level_value(NoCap{})));
}

TEST(CapsCsv, NeverIsEmptyField) {
    const auto paths = fixtures::make_paths({{100.0, 95.0, 92.0}, {100.0, 101.0, 102.0}}, 105.0);
    std::ostringstream os;
    write_caps_csv(os, cap_indices_drawdown(paths, 0.1), paths.grid());
    EXPECT_EQ(os.str(), "path,kappa,cap_time\n0,2,1\n1,,\n");
}
