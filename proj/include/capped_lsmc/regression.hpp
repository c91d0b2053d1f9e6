#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "capped_lsmc/market_model.hpp"

namespace capped_lsmc {

/// Weighted Laguerre basis e^{-x/2} L_k(x), k = 0..count-1, evaluated at x = S / K.
struct BasisSpec {
    std::size_t count = 5;

    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

inline constexpr double kRidgeLambda = 1e-10;

/// Writes the M basis values at x into `out` (size M).
inline void basis_eval_into(std::size_t count, double x, std::span<double> out) {
    if (!(x >= 0.0)) throw std::invalid_argument("basis_eval: x must be >= 0");
    if (count == 0) return;
    const double weight = std::exp(-0.5 * x);
    // (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}
    double prev = 1.0;
    double cur = 1.0 - x;
    out[0] = weight;
    if (count > 1) out[1] = weight * cur;
    for (std::size_t k = 1; k + 1 < count; ++k) {
        const double kd = static_cast<double>(k);
        const double next = ((2.0 * kd + 1.0 - x) * cur - kd * prev) / (kd + 1.0);
        prev = cur;
        cur = next;
        out[k + 1] = weight * cur;
    }
}

inline std::vector<double> basis_eval(const BasisSpec& spec, double x) {
    if (spec.count < 1) throw ParameterError("n_basis", "must be >= 1");
    std::vector<double> out(spec.count);
    basis_eval_into(spec.count, x, out);
    return out;
}

enum class RankFlag { full, deficient };

inline const char* to_string(RankFlag f) { return f == RankFlag::full ? "full" : "deficient"; }

/// Continuation fit at one exercise date.
struct RegressionStep {
    std::size_t date = 0;
    std::vector<double> coefficients;
    std::size_t rows = 0;
    RankFlag rank = RankFlag::full;

    double continuation(std::span<const double> phi) const {
        double c = 0.0;
        for (std::size_t k = 0; k < coefficients.size(); ++k) c += coefficients[k] * phi[k];
        return c;
    }
};

/// Least-squares coefficients for y ~ sum_k alpha_k phi_k(x) over the rows of
/// `design` (rows x M, already evaluated basis). Uses column-pivoting QR; if the
/// design is rank deficient, solves the ridge normal equations
/// (A^T A + 1e-10 I) alpha = A^T y instead. All-zero targets or zero rows give a
/// zero step flagged deficient.
inline RegressionStep fit_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                                 std::size_t date = 0) {
    const auto m = static_cast<std::size_t>(design.cols());
    RegressionStep step;
    step.date = date;
    step.rows = static_cast<std::size_t>(design.rows());
    step.coefficients.assign(m, 0.0);

    if (design.rows() == 0 || targets.isZero(0.0)) {
        step.rank = RankFlag::deficient;
        return step;
    }

    Eigen::VectorXd alpha;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (static_cast<std::size_t>(qr.rank()) == m) {
        alpha = qr.solve(targets);
        step.rank = RankFlag::full;
    } else {
        Eigen::MatrixXd normal = design.transpose() * design;
        normal.diagonal().array() += kRidgeLambda;
        alpha = normal.ldlt().solve(design.transpose() * targets);
        step.rank = RankFlag::deficient;
    }
    if (!alpha.allFinite()) {
        step.rank = RankFlag::deficient;
        return step;
    }
    for (std::size_t k = 0; k < m; ++k) step.coefficients[k] = alpha(static_cast<Eigen::Index>(k));
    return step;
}

/// Fits the continuation regression on (x, y) rows with x = S / K.
inline RegressionStep fit_continuation(std::span<const double> x, std::span<const double> y,
                                       const BasisSpec& spec, std::size_t date = 0) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_continuation: x and y differ in length");
    if (spec.count < 1) throw ParameterError("n_basis", "must be >= 1");
    const auto rows = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(spec.count);
    Eigen::MatrixXd design(rows, m);
    Eigen::VectorXd targets(rows);
    std::vector<double> phi(spec.count);
    for (Eigen::Index i = 0; i < rows; ++i) {
        basis_eval_into(spec.count, x[static_cast<std::size_t>(i)], phi);
        for (Eigen::Index k = 0; k < m; ++k) design(i, k) = phi[static_cast<std::size_t>(k)];
        targets(i) = y[static_cast<std::size_t>(i)];
    }
    return fit_design(design, targets, date);
}

}  // namespace capped_lsmc
