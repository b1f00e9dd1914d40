#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "nic.hpp"
#include "record_io.hpp"
#include "signals.hpp"
#include "vrft.hpp"

namespace d2ibc {

// y_{t+1} = g0(y_t.., u_t..) + noise_gain . (xi_t, ..., xi_{t-n+1})
struct Plant {
    using Map = std::function<double(std::span<const double> y_lags, std::span<const double> u_lags)>;

    std::string name;
    int n = 1;
    Map g0;
    std::vector<double> noise_gain;
    double u_min = -5.0;
    double u_max = 5.0;
    double y_min = -10.0;
    double y_max = 10.0;
    double gamma_xi = 1.0;

    double step(std::span<const double> y_lags, std::span<const double> u_lags,
                std::span<const double> xi_lags) const {
        double y = g0(y_lags, u_lags);
        for (std::size_t k = 0; k < noise_gain.size() && k < xi_lags.size(); ++k) y += noise_gain[k] * xi_lags[k];
        return y;
    }

    double clamp_input(double u) const { return std::clamp(u, u_min, u_max); }
};

namespace detail {

inline Plant output_noise_plant(std::string name, int n, Plant::Map g0) {
    Plant p;
    p.name = std::move(name);
    p.n = n;
    p.g0 = std::move(g0);
    p.noise_gain.assign(static_cast<std::size_t>(n), 0.0);
    p.noise_gain.front() = 1.0;
    p.gamma_xi = 1.0;
    return p;
}

} // namespace detail

// (a) y_{t+1} = 0.5 y_t + u_t
inline Plant linear_plant() {
    return detail::output_noise_plant("linear", 1, [](auto y, auto u) { return 0.5 * y[0] + u[0]; });
}

// (b) y_{t+1} = 0.8 y_t - 0.2 y_{t-1} + u_t + 0.3 u_t^2
inline Plant quadratic_plant() {
    return detail::output_noise_plant(
        "quadratic", 2, [](auto y, auto u) { return 0.8 * y[0] - 0.2 * y[1] + u[0] + 0.3 * u[0] * u[0]; });
}

// (c) y_{t+1} = y_t / (1 + y_t^2) + u_t
inline Plant rational_plant() {
    return detail::output_noise_plant("rational", 1,
                                      [](auto y, auto u) { return y[0] / (1.0 + y[0] * y[0]) + u[0]; });
}

inline Plant plant_by_name(const std::string& name) {
    if (name == "a" || name == "linear") return linear_plant();
    if (name == "b" || name == "quadratic") return quadratic_plant();
    if (name == "c" || name == "rational") return rational_plant();
    throw ConfigError("unknown plant '" + name + "' (expected linear, quadratic or rational)");
}

// mt19937_64 with a hand-rolled [0,1) map, so sequences do not
// depend on the standard library's distribution implementations.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double symmetric(double amplitude) { return amplitude * (2.0 * unit() - 1.0); }

private:
    std::mt19937_64 engine_;
};

inline std::vector<double> uniform_sequence(std::size_t length, double amplitude, std::uint64_t seed) {
    UniformSource src(seed);
    std::vector<double> out(length);
    for (auto& v : out) v = src.symmetric(amplitude);
    return out;
}

inline constexpr double kDefaultBlowUpGuard = 1e6;

struct OpenLoopRun {
    Signal y;           // y_{t+1} for every input index t
    Signal u_applied;   // inputs after clipping into U
    std::size_t clip_count = 0;
};

// Iterates the plant from the output history y0 (most recent first; shorter
// vectors are zero-padded). Inputs and noise before u.start() are zero.
inline OpenLoopRun simulate_open_loop(const Plant& plant, const Signal& u, const Signal& noise,
                                      const std::vector<double>& y0, double guard = kDefaultBlowUpGuard) {
    if (!noise.empty() && (noise.start() != u.start() || noise.size() < u.size())) {
        throw RangeError("noise signal does not cover the input horizon");
    }
    const auto n = static_cast<std::size_t>(plant.n);
    std::vector<double> yl(n, 0.0);
    std::vector<double> ul(n, 0.0);
    std::vector<double> xl(n, 0.0);
    std::copy_n(y0.begin(), std::min(n, y0.size()), yl.begin());
    auto push = [](std::vector<double>& buf, double v) {
        std::rotate(buf.rbegin(), buf.rbegin() + 1, buf.rend());
        buf.front() = v;
    };

    OpenLoopRun run;
    std::vector<double> ys;
    std::vector<double> us;
    ys.reserve(u.size());
    us.reserve(u.size());
    for (TimeIndex t = u.start(); t <= u.last(); ++t) {
        const double raw = u.at(t);
        const double applied = plant.clamp_input(raw);
        if (applied != raw) ++run.clip_count;
        push(ul, applied);
        push(xl, noise.empty() ? 0.0 : noise.at(t));
        const double next = plant.step(yl, ul, xl);
        if (!std::isfinite(next) || std::abs(next) > guard) {
            throw InstabilityError("plant output exceeded the blow-up guard", t + 1);
        }
        push(yl, next);
        ys.push_back(next);
        us.push_back(applied);
    }
    run.y = Signal(std::move(ys), u.start() + 1);
    run.u_applied = Signal(std::move(us), u.start());
    return run;
}

// Open-loop experiment on t = 1-L..0: y_{1-L} = y0[0], then the plant
// response to the excitation. Both channels store applied values.
inline DataRecord generate_record(const Plant& plant, const std::vector<double>& excitation,
                                  const std::vector<double>& noise, const std::vector<double>& y0,
                                  double guard = kDefaultBlowUpGuard) {
    if (excitation.empty()) throw DataError("excitation is empty");
    const auto L = static_cast<TimeIndex>(excitation.size());
    const Signal u(excitation, 1 - L);
    const Signal xi = noise.empty() ? Signal() : Signal(noise, 1 - L);
    const auto run = simulate_open_loop(plant, u, xi, y0, guard);
    std::vector<double> y;
    y.reserve(excitation.size());
    y.push_back(y0.empty() ? 0.0 : y0.front());
    for (TimeIndex t = 2 - L; t <= 0; ++t) y.push_back(run.y.at(t));
    return DataRecord(std::vector<double>(run.u_applied.samples().begin(), run.u_applied.samples().end()),
                      std::move(y));
}

struct RunConfig {
    std::size_t horizon = 0;
    // output history at t = 1, most recent first: (y_1, y_0, ..., y_{2-n})
    std::vector<double> y0;
    Signal reference;   // r_1..; r_{T+1} is held at r_T when absent
    Signal noise;       // xi_1..; empty means noise-free
    double guard = kDefaultBlowUpGuard;

    void validate() const {
        if (horizon == 0) return;
        if (reference.start() != 1 || reference.size() < horizon) {
            throw ConfigError("reference must start at t = 1 and cover the horizon");
        }
        if (!noise.empty() && (noise.start() != 1 || noise.size() < horizon)) {
            throw ConfigError("noise must start at t = 1 and cover the horizon");
        }
    }
};

struct Trace {
    std::vector<double> r, y, u, u_nl, u_lin, e;
    std::vector<double> u_unsaturated;
    std::size_t saturation_count = 0;

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }
};

// Closed loop of plant, K^nl and K^lin. Per step t:
//   e_t = r_t - y_t, u^lin_t = pid(e_t), u^nl_t = nic(r_{t+1}, q_t),
//   u_t = clip(u^nl_t + u^lin_t), y_{t+1} = g(...).
// q_t is formed from plant outputs and the applied (clipped) inputs.
// Controllers are taken by value: the caller's instances keep their state.
inline Trace simulate_closed_loop(const Plant& plant, NicController nic, PidController pid, const RunConfig& cfg) {
    cfg.validate();
    Trace tr;
    if (cfg.horizon == 0) return tr;
    const auto n = static_cast<std::size_t>(plant.n);
    const auto nm = static_cast<std::size_t>(nic.model().order());
    std::vector<double> yl(n, 0.0);
    std::vector<double> ul(n, 0.0);
    std::vector<double> xl(n, 0.0);
    std::copy_n(cfg.y0.begin(), std::min(n, cfg.y0.size()), yl.begin());
    auto push = [](std::vector<double>& buf, double v) {
        std::rotate(buf.rbegin(), buf.rbegin() + 1, buf.rend());
        buf.front() = v;
    };

    // The controller observes y_1 at the first step; seed it with the older lags.
    std::vector<double> nic_lags(nm, 0.0);
    for (std::size_t k = 1; k < cfg.y0.size() && k - 1 < nm; ++k) nic_lags[k - 1] = cfg.y0[k];
    nic.reset(nic_lags);

    const TimeIndex T = static_cast<TimeIndex>(cfg.horizon);
    for (auto* v : {&tr.r, &tr.y, &tr.u, &tr.u_nl, &tr.u_lin, &tr.e, &tr.u_unsaturated}) v->reserve(cfg.horizon);

    for (TimeIndex t = 1; t <= T; ++t) {
        const double y_t = yl.front();
        const double r_t = cfg.reference.at(t);
        const double r_next = cfg.reference.contains(t + 1) ? cfg.reference.at(t + 1) : r_t;
        const double e_t = r_t - y_t;

        const double u_lin = pid.step(e_t);
        nic.observe_output(y_t);
        const double u_nl = nic.command(r_next, nic.regressor());
        const double u_raw = u_nl + u_lin;
        const double u_t = plant.clamp_input(u_raw);
        if (u_t != u_raw) ++tr.saturation_count;
        nic.record_applied_input(u_t);

        tr.r.push_back(r_t);
        tr.y.push_back(y_t);
        tr.u.push_back(u_t);
        tr.u_nl.push_back(u_nl);
        tr.u_lin.push_back(u_lin);
        tr.e.push_back(e_t);
        tr.u_unsaturated.push_back(u_raw);

        push(ul, u_t);
        push(xl, cfg.noise.empty() ? 0.0 : cfg.noise.at(t));
        const double next = plant.step(yl, ul, xl);
        if (!std::isfinite(next) || std::abs(next) > cfg.guard) {
            throw InstabilityError("closed-loop output exceeded the blow-up guard", t + 1);
        }
        push(yl, next);
    }
    return tr;
}

struct RunMetrics {
    double linf_error = 0.0;
    double rms_error = 0.0;
    double steady_state_error = 0.0;
    std::size_t saturation_count = 0;
};

inline RunMetrics metrics(const Trace& trace, std::size_t settle_window) {
    if (trace.empty()) throw DomainError("metrics of an empty trace");
    if (settle_window == 0 || settle_window >= trace.size()) {
        throw DomainError("settle window must satisfy 0 < window < T");
    }
    RunMetrics m;
    m.linf_error = lp_norm(trace.e, kInfNorm);
    double ss = 0.0;
    for (double v : trace.e) ss += v * v;
    m.rms_error = std::sqrt(ss / static_cast<double>(trace.size()));
    double tail = 0.0;
    for (std::size_t k = trace.size() - settle_window; k < trace.size(); ++k) tail += std::abs(trace.e[k]);
    m.steady_state_error = tail / static_cast<double>(settle_window);
    m.saturation_count = trace.saturation_count;
    return m;
}

inline void write_trace(std::ostream& out, const Trace& trace) {
    out << "t,r,y,u,u_nl,u_lin,e\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << (k + 1) << ',' << format_decimal(trace.r[k]) << ',' << format_decimal(trace.y[k]) << ','
            << format_decimal(trace.u[k]) << ',' << format_decimal(trace.u_nl[k]) << ','
            << format_decimal(trace.u_lin[k]) << ',' << format_decimal(trace.e[k]) << '\n';
    }
}

// Step from 0 to `amplitude` at t = step_time (1-based), held to `length`.
inline Signal step_reference(std::size_t length, double amplitude, std::size_t step_time) {
    std::vector<double> r(length, 0.0);
    for (std::size_t k = 0; k < length; ++k) {
        if (k + 1 >= step_time) r[k] = amplitude;
    }
    return Signal(std::move(r), 1);
}

} // namespace d2ibc
