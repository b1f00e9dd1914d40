#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "golden.hpp"
#include "signals.hpp"
#include "sysid.hpp"

namespace d2ibc {

struct SolverConfig {
    int grid_points = 401;
    double refine_tol = 1e-10;

    void validate() const {
        if (grid_points < 3) throw ConfigError("solver grid_points must be >= 3");
        if (!(refine_tol > 0.0)) throw ConfigError("solver refine_tol must be > 0");
    }

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct Normalization {
    double rho_y;
    double rho_u;
};

// Squared 2-norms of the recorded output and input channels.
inline Normalization rho_constants(const DataRecord& record) {
    double sy = 0.0;
    double su = 0.0;
    for (double v : record.y().samples()) sy += v * v;
    for (double v : record.u().samples()) su += v * v;
    if (sy == 0.0) throw DataError("output channel is identically zero: rho_y would be 0");
    if (su == 0.0) throw DataError("input channel is identically zero: rho_u would be 0");
    return {sy, su};
}

struct NicSettings {
    double mu = 0.0;
    double rho_y = 1.0;
    double rho_u = 1.0;
    double u_min = -1.0;
    double u_max = 1.0;
    SolverConfig solver{};

    void validate() const {
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be finite and >= 0");
        if (!(rho_y > 0.0) || !(rho_u > 0.0)) throw ConfigError("rho_y and rho_u must be > 0");
        if (!(u_min < u_max) || !std::isfinite(u_min) || !std::isfinite(u_max)) {
            throw ConfigError("input set must satisfy u_min < u_max");
        }
        solver.validate();
    }

    friend bool operator==(const NicSettings&, const NicSettings&) = default;
};

struct NicSolution {
    double u;
    // objective had no dependence on u; the projection of 0 onto U was used
    bool flat = false;
};

// Nonlinear inversion controller: at every step picks the input in
// [u_min, u_max] minimizing
//   J(u) = (r_{t+1} - f(q_t, u))^2 / rho_y + mu * u^2 / rho_u.
// Holds the lag buffers needed to form q_t on its own (observe_output /
// record_applied_input); command() also accepts an externally built q.
class NicController {
public:
    NicController(RegressionModel model, NicSettings settings) : model_(std::move(model)), settings_(settings) {
        settings_.validate();
        reset();
    }

    const RegressionModel& model() const noexcept { return model_; }
    const NicSettings& settings() const noexcept { return settings_; }
    std::size_t flat_objective_count() const noexcept { return flat_count_; }

    double clamp(double u) const { return std::clamp(u, settings_.u_min, settings_.u_max); }

    double objective(const Regressor& q, double r_next, double u) const {
        const double err = r_next - predict(model_, q, u);
        return err * err / settings_.rho_y + settings_.mu * u * u / settings_.rho_u;
    }

    NicSolution solve(const Regressor& q, double r_next) const {
        detail::check_regressor(model_, q);
        return model_.affine_in_u() ? solve_affine(q, r_next) : solve_search(q, r_next);
    }

    // Solves and pushes the emitted command into the input history.
    double command(double r_next, const Regressor& q) {
        const auto sol = solve(q, r_next);
        if (sol.flat) ++flat_count_;
        push_input(sol.u);
        return sol.u;
    }

    // Lag buffers, most recent first. Missing entries are zero-filled.
    void reset(std::span<const double> y_lags = {}, std::span<const double> u_lags = {}) {
        const auto n = static_cast<std::size_t>(model_.order());
        y_hist_.assign(n, 0.0);
        u_hist_.assign(n - 1, 0.0);
        std::copy_n(y_lags.begin(), std::min(n, y_lags.size()), y_hist_.begin());
        std::copy_n(u_lags.begin(), std::min(n - 1, u_lags.size()), u_hist_.begin());
        flat_count_ = 0;
    }

    void observe_output(double y) {
        y_hist_.push_front(y);
        y_hist_.pop_back();
    }

    // Replaces the most recent stored input (the emitted u^nl) with the input
    // actually applied to the plant.
    void record_applied_input(double u) {
        if (!u_hist_.empty()) u_hist_.front() = u;
    }

    Regressor regressor() const {
        Regressor q;
        q.n = model_.order();
        q.entries.assign(y_hist_.begin(), y_hist_.end());
        q.entries.insert(q.entries.end(), u_hist_.begin(), u_hist_.end());
        return q;
    }

    // observe y_t, then command toward r_{t+1} from the internal buffers
    double step(double y_t, double r_next) {
        observe_output(y_t);
        return command(r_next, regressor());
    }

private:
    void push_input(double u) {
        if (u_hist_.empty()) return;
        u_hist_.push_front(u);
        u_hist_.pop_back();
    }

    double zero_projection() const { return clamp(0.0); }

    // Ordering used on ties: smaller |u|, then smaller u.
    static bool preferred(double j1, double u1, double j2, double u2) {
        if (j1 != j2) return j1 < j2;
        if (std::abs(u1) != std::abs(u2)) return std::abs(u1) < std::abs(u2);
        return u1 < u2;
    }

    NicSolution solve_affine(const Regressor& q, double r_next) const {
        const auto [a, b] = affine_decompose(model_, q);
        const double denom = b * b / settings_.rho_y + settings_.mu / settings_.rho_u;
        if (denom == 0.0) return {zero_projection(), true};
        if (settings_.mu == 0.0) return {clamp((r_next - a) / b), false};
        return {clamp((b * (r_next - a) / settings_.rho_y) / denom), false};
    }

    NicSolution solve_search(const Regressor& q, double r_next) const {
        const double lo = settings_.u_min;
        const double hi = settings_.u_max;
        const int points = settings_.solver.grid_points;
        auto J = [&](double u) { return objective(q, r_next, u); };

        std::vector<double> grid(static_cast<std::size_t>(points));
        std::vector<double> values(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            const auto k = static_cast<std::size_t>(i);
            grid[k] = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
            values[k] = J(grid[k]);
        }

        // local minima of the coarse grid, best first
        std::vector<std::size_t> cells;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const bool left_ok = k == 0 || values[k] <= values[k - 1];
            const bool right_ok = k + 1 == grid.size() || values[k] <= values[k + 1];
            if (left_ok && right_ok) cells.push_back(k);
        }
        std::sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
            return preferred(values[a], grid[a], values[b], grid[b]);
        });
        if (cells.size() > kMaxRefinedCells) cells.resize(kMaxRefinedCells);

        ScalarMinimum best{grid[cells.front()], values[cells.front()]};
        auto consider = [&](ScalarMinimum c) {
            if (tied(c.value, best.value) ? closer_to_zero(c.x, best.x) : c.value < best.value) best = c;
        };
        for (std::size_t k : cells) {
            consider({grid[k], values[k]});
            const double a = grid[k == 0 ? 0 : k - 1];
            const double b = grid[std::min(k + 1, grid.size() - 1)];
            consider(golden_section_minimize(J, a, b, settings_.solver.refine_tol));
        }

        const double u0 = zero_projection();
        const double j0 = J(u0);
        const bool flat = std::all_of(values.begin(), values.end(), [&](double v) { return v == j0; });
        consider({u0, j0});
        return {best.x, flat};
    }

    // Objective values this close are the same minimum up to rounding.
    static bool tied(double j1, double j2) {
        return std::abs(j1 - j2) <= kTieTolerance * (1.0 + std::min(std::abs(j1), std::abs(j2)));
    }

    static bool closer_to_zero(double u1, double u2) {
        if (std::abs(u1) != std::abs(u2)) return std::abs(u1) < std::abs(u2);
        return u1 < u2;
    }

    static constexpr std::size_t kMaxRefinedCells = 16;
    static constexpr double kTieTolerance = 1e-13;

    RegressionModel model_;
    NicSettings settings_;
    std::deque<double> y_hist_;
    std::deque<double> u_hist_;
    std::size_t flat_count_ = 0;
};

} // namespace d2ibc
