#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <random>
#include <stdexcept>
#include <string>

#include "capped_lsmc/rng.hpp"

namespace capped_lsmc {

/// Invalid input that can be traced back to a single named parameter.
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Law of the (positive) downward jump sizes U_k. `transform(z)` is
/// E exp(-z U) and must be finite at z = 1 for the drift calibration.
template <class L>
concept JumpLaw = requires(const L& law, double z, Engine& engine) {
    { law.transform(z) } -> std::convertible_to<double>;
    { law.sample(engine) } -> std::convertible_to<double>;
};

/// Closed-form E exp(-z U) for U ~ Exp(rho): rho / (rho + z), defined for z > -rho.
inline double jump_transform(double z, double rho) {
    if (!(rho > 0.0)) throw std::domain_error("jump_transform: rho must be positive");
    if (!(z > -rho)) throw std::domain_error("jump_transform: requires z > -rho");
    return rho / (rho + z);
}

/// Exponentially distributed jumps with mean 1/rate.
struct ExponentialJumps {
    double rate = 1.0;

    double transform(double z) const { return jump_transform(z, rate); }

    double sample(Engine& engine) const {
        return std::exponential_distribution<double>(rate)(engine);
    }

    double mean() const { return 1.0 / rate; }
    double second_moment() const { return 2.0 / (rate * rate); }
};

static_assert(JumpLaw<ExponentialJumps>);

/// Drift mu that makes exp(-rt) S_t a martingale: mu = r - sigma^2/2 + lambda (1 - eta(1)).
template <JumpLaw Law>
double martingale_drift(double rate, double sigma, double jump_intensity, const Law& law) {
    const double jump_term = jump_intensity > 0.0 ? jump_intensity * (1.0 - law.transform(1.0)) : 0.0;
    return rate - 0.5 * sigma * sigma + jump_term;
}

inline double martingale_drift(double rate, double sigma, double jump_intensity, double rho) {
    return martingale_drift(rate, sigma, jump_intensity, ExponentialJumps{rho});
}

/// User-facing market inputs. The drift is not among them: it is always
/// derived from the martingale condition.
struct MarketInputs {
    double s0 = 100.0;
    double s_bar = 100.0;  // running maximum observed before issue
    double strike = 100.0;
    double maturity = 1.0;
    double rate = 0.0;
    double sigma = 0.0;
    double jump_intensity = 0.0;
    double jump_rate = 1.0;  // jumps ~ Exp(jump_rate)

    friend bool operator==(const MarketInputs&, const MarketInputs&) = default;
};

inline void validate(const MarketInputs& in) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(in.s0) && in.s0 > 0.0)) throw ParameterError("s0", "must be a positive finite number");
    if (!(finite(in.s_bar) && in.s_bar >= in.s0)) throw ParameterError("s_bar", "must be finite and >= s0");
    if (!(finite(in.strike) && in.strike > 0.0)) throw ParameterError("strike", "must be positive");
    if (!(finite(in.maturity) && in.maturity > 0.0)) throw ParameterError("maturity", "must be positive");
    if (!(finite(in.rate) && in.rate >= 0.0)) throw ParameterError("rate", "must be >= 0");
    if (!(finite(in.sigma) && in.sigma >= 0.0)) throw ParameterError("sigma", "must be >= 0");
    if (!(finite(in.jump_intensity) && in.jump_intensity >= 0.0))
        throw ParameterError("lambda", "must be >= 0");
    if (!(finite(in.jump_rate) && in.jump_rate > 0.0)) throw ParameterError("rho", "must be positive");
}

/// Validated market parameters on the martingale measure.
template <JumpLaw Law>
class BasicMarketParams {
public:
    BasicMarketParams(const MarketInputs& inputs, Law law) : inputs_(inputs), law_(std::move(law)) {
        validate(inputs_);
        drift_ = martingale_drift(inputs_.rate, inputs_.sigma, inputs_.jump_intensity, law_);
    }

    const MarketInputs& inputs() const noexcept { return inputs_; }
    const Law& jumps() const noexcept { return law_; }

    double s0() const noexcept { return inputs_.s0; }
    double s_bar() const noexcept { return inputs_.s_bar; }
    double strike() const noexcept { return inputs_.strike; }
    double maturity() const noexcept { return inputs_.maturity; }
    double rate() const noexcept { return inputs_.rate; }
    double sigma() const noexcept { return inputs_.sigma; }
    double jump_intensity() const noexcept { return inputs_.jump_intensity; }
    double drift() const noexcept { return drift_; }

private:
    MarketInputs inputs_;
    Law law_;
    double drift_ = 0.0;
};

using MarketParams = BasicMarketParams<ExponentialJumps>;

inline MarketParams make_market(const MarketInputs& inputs) {
    validate(inputs);
    return MarketParams(inputs, ExponentialJumps{inputs.jump_rate});
}

/// Psi(z) = mu z + sigma^2 z^2 / 2 + lambda (eta(z) - 1).
template <JumpLaw Law>
double laplace_exponent(double z, const BasicMarketParams<Law>& params) {
    const double sigma = params.sigma();
    const double jumps =
        params.jump_intensity() > 0.0 ? params.jump_intensity() * (params.jumps().transform(z) - 1.0) : 0.0;
    return params.drift() * z + 0.5 * sigma * sigma * z * z + jumps;
}

enum class OptionKind { put, call };

struct PayoffSpec {
    OptionKind kind = OptionKind::put;
    double strike = 100.0;

    friend bool operator==(const PayoffSpec&, const PayoffSpec&) = default;
};

inline double payoff(const PayoffSpec& spec, double s) {
    return spec.kind == OptionKind::put ? std::max(spec.strike - s, 0.0) : std::max(s - spec.strike, 0.0);
}

inline const char* to_string(OptionKind kind) { return kind == OptionKind::put ? "put" : "call"; }

}  // namespace capped_lsmc
