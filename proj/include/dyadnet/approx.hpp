#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "dyadnet/dyadic.hpp"
#include "dyadnet/errors.hpp"
#include "dyadnet/matrix.hpp"

namespace dyadnet {

struct SweepConfig {
    double alpha_min = 0.25;
    double alpha_max = 1.0;
    double alpha_step = 1e-3;
    bool refine = true;

    void validate() const {
        if (!(alpha_min > 0.0) || !(alpha_min <= alpha_max))
            throw ConfigError("SweepConfig: need 0 < alpha_min <= alpha_max");
        if (!(alpha_step > 0.0)) throw ConfigError("SweepConfig: need alpha_step > 0");
    }
};

struct ApproximationResult {
    double alpha_star = 0.0;
    DyadicMatrix t_star;
    double error_star = 0.0;
    std::vector<std::pair<double, double>> curve; // (alpha, error) over the grid

    /// The implied approximation alpha_star * t_star.
    RealMatrix m_hat() const {
        RealMatrix m = t_star.to_real();
        for (double& v : m.data) v *= alpha_star;
        return m;
    }
};

/// Squared Frobenius distance between M and alpha * T.
inline double approximation_error(const RealMatrix& m, const DyadicMatrix& t, double alpha) {
    double err = 0.0;
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        double d = m.data[i] - alpha * t.data[i].value();
        err += d * d;
    }
    return err;
}

/// Optimal T over the set for a fixed expansion factor: each entry is the
/// nearest neighbour of m/alpha in the set, which solves the per-entry
/// quadratic selection exactly.
inline std::pair<DyadicMatrix, double> solve_fixed_alpha(const RealMatrix& m,
                                                         const DyadicSet& set,
                                                         double alpha) {
    if (!(alpha > 0.0)) throw Error("solve_fixed_alpha: alpha must be positive");
    DyadicMatrix t(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i)
        t.data[i] = set.nearest(m.data[i] / alpha);
    return {t, approximation_error(m, t, alpha)};
}

/// Exhaustive minimizer of |M - alpha T|_F^2 over T in D^(rows x cols).
/// Independent of the fast per-entry path; refuses search spaces above 1e6.
inline std::pair<DyadicMatrix, double> brute_force_oracle(const RealMatrix& m,
                                                          const DyadicSet& set,
                                                          double alpha) {
    if (!(alpha > 0.0)) throw Error("brute_force_oracle: alpha must be positive");
    const std::size_t n = m.data.size();
    double space = std::pow(static_cast<double>(set.size()), static_cast<double>(n));
    if (space > 1e6) throw Error("brute_force_oracle: search space exceeds 1e6");

    std::vector<std::size_t> idx(n, 0);
    DyadicMatrix t(m.rows, m.cols);
    DyadicMatrix best = t;
    double best_err = std::numeric_limits<double>::infinity();
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) t.data[i] = set[idx[i]];
        double err = approximation_error(m, t, alpha);
        if (err < best_err) {
            best_err = err;
            best = t;
        }
        std::size_t pos = 0;
        while (pos < n && ++idx[pos] == set.size()) idx[pos++] = 0;
        if (pos == n) break;
    }
    return {best, best_err};
}

/// Hook for plugging in a constraint-aware solver for the fixed-alpha
/// subproblem; the default (empty) uses the exact separable solution.
using EntrySolver = std::function<DyadicMatrix(const RealMatrix&, const DyadicSet&, double)>;

/// Sweep the expansion factor over the configured grid, pick the minimizer,
/// and optionally refine alpha in closed form for the winning T (the vertex
/// of that T's parabola, alpha = <M,T> / |T|^2), re-solving once at the
/// refined alpha.
inline ApproximationResult sweep(const RealMatrix& m, const DyadicSet& set,
                                 const SweepConfig& cfg = {},
                                 const EntrySolver& solver = {}) {
    cfg.validate();
    auto solve = [&](double alpha) -> std::pair<DyadicMatrix, double> {
        if (solver) {
            DyadicMatrix t = solver(m, set, alpha);
            return {t, approximation_error(m, t, alpha)};
        }
        return solve_fixed_alpha(m, set, alpha);
    };

    ApproximationResult result;
    double best_err = std::numeric_limits<double>::infinity();
    DyadicMatrix best_t;
    double best_alpha = 0.0;
    const long steps = static_cast<long>(std::floor((cfg.alpha_max - cfg.alpha_min) / cfg.alpha_step + 0.5));
    for (long k = 0; k <= steps; ++k) {
        double alpha = cfg.alpha_min + cfg.alpha_step * static_cast<double>(k);
        if (alpha > cfg.alpha_max + cfg.alpha_step * 0.5) break;
        auto [t, err] = solve(alpha);
        result.curve.emplace_back(alpha, err);
        if (err < best_err) {
            best_err = err;
            best_t = std::move(t);
            best_alpha = alpha;
        }
    }
    if (result.curve.empty()) throw Error("sweep: empty alpha grid");

    if (cfg.refine) {
        double tt = 0.0, mt = 0.0;
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            double tv = best_t.data[i].value();
            tt += tv * tv;
            mt += m.data[i] * tv;
        }
        if (tt > 0.0 && mt > 0.0) {
            double refined = mt / tt;
            auto [t2, err2] = solve(refined);
            if (err2 <= best_err) {
                best_err = err2;
                best_t = std::move(t2);
                best_alpha = refined;
            }
        }
    }

    result.alpha_star = best_alpha;
    result.t_star = std::move(best_t);
    result.error_star = best_err;
    return result;
}

} // namespace dyadnet
