#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "nic.hpp"
#include "signals.hpp"
#include "simloop.hpp"
#include "sysid.hpp"
#include "vrft.hpp"

namespace d2ibc {

// Shifted Halton points in [0,1)^d. Point k is independent of how many points
// are drawn, so a longer run always samples a superset.
class HaltonSequence {
public:
    HaltonSequence(std::size_t dim, std::uint64_t seed) : shift_(dim) {
        static constexpr std::array<unsigned, 24> primes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                                         41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
        if (dim == 0 || dim > primes.size()) throw DomainError("Halton dimension must be in [1, 24]");
        bases_.assign(primes.begin(), primes.begin() + static_cast<std::ptrdiff_t>(dim));
        UniformSource src(seed);
        for (auto& s : shift_) s = src.unit();
    }

    std::size_t dim() const noexcept { return bases_.size(); }

    std::vector<double> point(std::uint64_t index) const {
        std::vector<double> p(bases_.size());
        for (std::size_t d = 0; d < bases_.size(); ++d) {
            double v = radical_inverse(index + 1, bases_[d]) + shift_[d];
            p[d] = v - std::floor(v);
        }
        return p;
    }

private:
    static double radical_inverse(std::uint64_t i, unsigned base) {
        double inv = 1.0 / base;
        double f = inv;
        double r = 0.0;
        while (i > 0) {
            r += f * static_cast<double>(i % base);
            i /= base;
            f *= inv;
        }
        return r;
    }

    std::vector<unsigned> bases_;
    std::vector<double> shift_;
};

// Delta(y, u) = g^o(y, u) - f(y, u) on lag vectors of length max(plant order,
// model order), most recent first. u[0] is the current input u_t.
class Residue {
public:
    Residue(const RegressionModel& model, const Plant& plant)
        : model_(model), plant_(plant), lags_(std::max(model.order(), plant.n)) {}

    int lags() const noexcept { return lags_; }

    double operator()(std::span<const double> y, std::span<const double> u) const {
        const auto nm = static_cast<std::size_t>(model_.order());
        const auto np = static_cast<std::size_t>(plant_.n);
        const Regressor q = make_regressor(y.first(nm), u.subspan(1, nm - 1), model_.order());
        return plant_.g0(y.first(np), u.first(np)) - predict(model_, q, u[0]);
    }

private:
    const RegressionModel& model_;
    const Plant& plant_;
    int lags_;
};

// Max difference quotient |Delta(y,u) - Delta(y',u)| / ||y - y'||_inf over
// shifted-Halton draws from Y^n x Y^n x U^n. Each draw contributes the global
// pair (y, y') and the nearby pair (y, y + 1e-3 (y' - y)). A lower bound on
// gamma_y.
inline double estimate_gamma_y(const RegressionModel& model, const Plant& plant, std::size_t samples,
                               std::uint64_t seed) {
    if (samples < 100) throw DomainError("gamma_y estimation needs at least 100 samples");
    const Residue delta(model, plant);
    const auto N = static_cast<std::size_t>(delta.lags());
    const HaltonSequence seq(3 * N, seed);
    std::vector<double> y(N), y2(N), y3(N), u(N);
    double best = 0.0;
    std::size_t used = 0;
    auto quotient = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double dist = 0.0;
        for (std::size_t k = 0; k < N; ++k) dist = std::max(dist, std::abs(a[k] - b[k]));
        if (dist == 0.0) return;
        ++used;
        best = std::max(best, std::abs(delta(a, u) - delta(b, u)) / dist);
    };
    for (std::size_t i = 0; i < samples; ++i) {
        const auto p = seq.point(i);
        for (std::size_t k = 0; k < N; ++k) {
            y[k] = plant.y_min + (plant.y_max - plant.y_min) * p[k];
            y2[k] = plant.y_min + (plant.y_max - plant.y_min) * p[N + k];
            u[k] = plant.u_min + (plant.u_max - plant.u_min) * p[2 * N + k];
            y3[k] = y[k] + 1e-3 * (y2[k] - y[k]);
        }
        quotient(y, y2);
        quotient(y, y3);
    }
    if (used == 0) throw SamplingError("no sample pair with y != y'");
    return best;
}

struct GridConfig {
    std::size_t points_per_axis = 50;
    std::size_t budget = 1'000'000;
};

struct ResidueBounds {
    double delta_bar = 0.0;   // max over U^n of |Delta(0, u)|
    double delta_inf = 0.0;   // max over Y^n x U^n of |Delta(y, u)|
    std::size_t points_u = 0; // per axis, U^n grid
    std::size_t points_yu = 0;
};

namespace detail {

inline std::size_t axis_points(std::size_t requested, std::size_t budget, std::size_t dims) {
    auto p = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(budget), 1.0 / dims) + 1e-9));
    p = std::min(requested, p);
    return std::max<std::size_t>(p, 2);
}

// Calls visit(point) on every node of a tensor grid over the boxes [lo_d, hi_d].
template <class Visit>
void for_each_grid_point(const std::vector<double>& lo, const std::vector<double>& hi, std::size_t points,
                         Visit&& visit) {
    const std::size_t dims = lo.size();
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> x(dims);
    while (true) {
        for (std::size_t d = 0; d < dims; ++d) {
            x[d] = idx[d] + 1 == points ? hi[d] : lo[d] + (hi[d] - lo[d]) * static_cast<double>(idx[d]) / (points - 1);
        }
        visit(x);
        std::size_t d = 0;
        while (d < dims && ++idx[d] == points) idx[d++] = 0;
        if (d == dims) break;
    }
}

} // namespace detail

inline ResidueBounds residue_bounds(const RegressionModel& model, const Plant& plant, const GridConfig& grid = {}) {
    const Residue delta(model, plant);
    const auto N = static_cast<std::size_t>(delta.lags());
    ResidueBounds out;

    out.points_u = detail::axis_points(grid.points_per_axis, grid.budget, N);
    const std::vector<double> zeros(N, 0.0);
    detail::for_each_grid_point(std::vector<double>(N, plant.u_min), std::vector<double>(N, plant.u_max), out.points_u,
                                [&](const std::vector<double>& u) {
                                    out.delta_bar = std::max(out.delta_bar, std::abs(delta(zeros, u)));
                                });

    out.points_yu = detail::axis_points(grid.points_per_axis, grid.budget, 2 * N);
    std::vector<double> lo(2 * N);
    std::vector<double> hi(2 * N);
    for (std::size_t k = 0; k < N; ++k) {
        lo[k] = plant.y_min;
        hi[k] = plant.y_max;
        lo[N + k] = plant.u_min;
        hi[N + k] = plant.u_max;
    }
    detail::for_each_grid_point(lo, hi, out.points_yu, [&](const std::vector<double>& x) {
        const std::span<const double> all(x);
        out.delta_inf = std::max(out.delta_inf, std::abs(delta(all.first(N), all.subspan(N))));
    });
    out.delta_inf = std::max(out.delta_inf, out.delta_bar);
    return out;
}

// Nonnegative c minimizing sum_k a_k . c subject to a_k . c >= b_k, by
// enumerating vertices of the feasible polyhedron (dimension <= 3). The
// last column of `rows` must be the constant 1 so the problem is feasible.
inline std::vector<double> fit_affine_envelope(const std::vector<std::vector<double>>& rows,
                                               const std::vector<double>& targets) {
    if (rows.empty()) throw DomainError("envelope fit needs at least one probe");
    const std::size_t d = rows.front().size();
    if (d == 0 || d > 3) throw DomainError("envelope fit supports 1 to 3 unknowns");

    // constraint list: probe rows, then c_j >= 0
    std::vector<std::vector<double>> A = rows;
    std::vector<double> b = targets;
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> e(d, 0.0);
        e[j] = 1.0;
        A.push_back(e);
        b.push_back(0.0);
    }
    std::vector<double> weight(d, 0.0);
    double scale = 1.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t j = 0; j < d; ++j) weight[j] += rows[k][j];
        scale = std::max(scale, std::abs(targets[k]));
    }
    const double feas_tol = 1e-10 * scale;

    auto solve_square = [&](const std::vector<std::size_t>& pick, std::vector<double>& x) {
        std::vector<std::vector<double>> M(d, std::vector<double>(d + 1));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) M[i][j] = A[pick[i]][j];
            M[i][d] = b[pick[i]];
        }
        for (std::size_t col = 0; col < d; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < d; ++i) {
                if (std::abs(M[i][col]) > std::abs(M[piv][col])) piv = i;
            }
            if (std::abs(M[piv][col]) < 1e-12) return false;
            std::swap(M[piv], M[col]);
            for (std::size_t i = 0; i < d; ++i) {
                if (i == col) continue;
                const double f = M[i][col] / M[col][col];
                for (std::size_t j = col; j <= d; ++j) M[i][j] -= f * M[col][j];
            }
        }
        for (std::size_t i = 0; i < d; ++i) x[i] = M[i][d] / M[i][i];
        return true;
    };

    std::vector<double> best;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(d);
    std::vector<double> x(d);
    const std::size_t total = A.size();
    auto consider = [&]() {
        if (!solve_square(pick, x)) return;
        for (std::size_t k = 0; k < total; ++k) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < d; ++j) lhs += A[k][j] * x[j];
            if (lhs < b[k] - feas_tol) return;
        }
        double obj = 0.0;
        for (std::size_t j = 0; j < d; ++j) obj += weight[j] * x[j];
        if (best.empty()) {
            best_obj = obj;
            best = x;
            return;
        }
        const double tie = 1e-12 * std::max(1.0, std::abs(best_obj));
        if (obj < best_obj - tie || (std::abs(obj - best_obj) <= tie && x < best)) {
            best_obj = obj;
            best = x;
        }
    };
    // all d-subsets of the constraints
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    while (true) {
        pick = idx;
        consider();
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(d) - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - d + static_cast<std::size_t>(i)) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (best.empty()) {
        best.assign(d, 0.0);
        best.back() = *std::max_element(targets.begin(), targets.end());
    }
    for (auto& v : best) v = std::max(v, 0.0);

    // clear rounding-level violations through the constant term
    double deficit = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < d; ++j) lhs += rows[k][j] * best[j];
        deficit = std::max(deficit, targets[k] - lhs);
    }
    if (deficit > 0.0) best.back() += deficit + 4.0 * std::numeric_limits<double>::epsilon() * scale;
    return best;
}

struct ProbeConfig {
    std::vector<double> y_amplitudes{0.0, 0.5, 1.0, 2.0, 5.0};
    std::vector<double> r_amplitudes{0.0, 0.5, 1.0, 2.0, 5.0};
    std::size_t length = 200;
    std::uint64_t seed = 7;
};

struct ProbeRecord {
    double y_norm;
    double r_norm;
    double yhat_norm;
    double ehat_norm;
};

struct CascadeGains {
    double Gamma_y = 0.0;
    double Gamma_r = 0.0;
    double Lambda_f = 0.0;
    double Gamma_s = 0.0;
    double Lambda_e = 0.0;
    bool degenerate = false;
    std::vector<ProbeRecord> probes;
};

// Drives the open cascade controller -> model with injected (y, r) sequences:
//   u_t = clip(K^nl(r_{t+1}, q_t) + K^lin(r_t - y_t)),  yhat_{t+1} = f(q_t, u_t),
//   ehat_{t+1} = r_{t+1} - yhat_{t+1}.
// Each (y amplitude, r amplitude) pair yields a uniform-random probe and a
// constant probe.
inline std::vector<ProbeRecord> run_cascade_probes(const NicController& nic, const PidController& pid,
                                                   const ProbeConfig& probe) {
    if (probe.length < 2) throw DomainError("probe length must be >= 2");
    std::vector<ProbeRecord> out;
    std::uint64_t stream = 0;
    for (double ay : probe.y_amplitudes) {
        for (double ar : probe.r_amplitudes) {
            for (int kind = 0; kind < 2; ++kind) {
                std::vector<double> y;
                std::vector<double> r;
                if (kind == 0) {
                    y = uniform_sequence(probe.length, ay, probe.seed * 1000003u + 2 * stream);
                    r = uniform_sequence(probe.length + 1, ar, probe.seed * 1000003u + 2 * stream + 1);
                } else {
                    y.assign(probe.length, ay);
                    r.assign(probe.length + 1, ar);
                }
                ++stream;
                NicController k_nl = nic;
                PidController k_lin = pid;
                k_nl.reset();
                k_lin.reset();
                double yhat_norm = 0.0;
                double ehat_norm = 0.0;
                for (std::size_t t = 0; t < probe.length; ++t) {
                    const double u_lin = k_lin.step(r[t] - y[t]);
                    k_nl.observe_output(y[t]);
                    const Regressor q = k_nl.regressor();
                    const double u = k_nl.clamp(k_nl.command(r[t + 1], q) + u_lin);
                    k_nl.record_applied_input(u);
                    const double yhat = predict(nic.model(), q, u);
                    if (!std::isfinite(yhat)) throw ContractError("cascade produced a non-finite prediction");
                    yhat_norm = std::max(yhat_norm, std::abs(yhat));
                    ehat_norm = std::max(ehat_norm, std::abs(r[t + 1] - yhat));
                }
                out.push_back({lp_norm(y, kInfNorm), lp_norm(r, kInfNorm), yhat_norm, ehat_norm});
            }
        }
    }
    return out;
}

inline CascadeGains estimate_cascade_gains(const NicController& nic, const PidController& pid,
                                           const ProbeConfig& probe) {
    CascadeGains g;
    g.probes = run_cascade_probes(nic, pid, probe);
    g.degenerate = std::all_of(g.probes.begin(), g.probes.end(),
                               [](const ProbeRecord& p) { return p.y_norm == 0.0 && p.r_norm == 0.0; });

    std::vector<std::vector<double>> rows;
    std::vector<double> yhat;
    for (const auto& p : g.probes) {
        rows.push_back({p.y_norm, p.r_norm, 1.0});
        yhat.push_back(p.yhat_norm);
    }
    const auto f = fit_affine_envelope(rows, yhat);
    g.Gamma_y = f[0];
    g.Gamma_r = f[1];
    g.Lambda_f = f[2];

    // error-system fit shares Gamma_y with the prediction fit
    std::vector<std::vector<double>> rows_e;
    std::vector<double> ehat;
    for (const auto& p : g.probes) {
        rows_e.push_back({p.r_norm, 1.0});
        ehat.push_back(p.ehat_norm - g.Gamma_y * p.y_norm);
    }
    const auto fe = fit_affine_envelope(rows_e, ehat);
    g.Gamma_s = fe[0];
    g.Lambda_e = fe[1];
    return g;
}

struct CertifyConfig {
    std::size_t gamma_samples = 10'000;
    std::uint64_t gamma_seed = 1;
    GridConfig grid{};
    ProbeConfig probe{};
    std::optional<double> gamma_xi; // defaults to the plant declaration
};

struct CertificateProvenance {
    std::size_t gamma_samples = 0;
    std::uint64_t gamma_seed = 0;
    std::size_t grid_points_u = 0;
    std::size_t grid_points_yu = 0;
    std::size_t probe_count = 0;
    std::size_t probe_length = 0;
    std::uint64_t probe_seed = 0;
};

// Empirical constants behind the finite-gain bounds. Everything here is
// estimated by sampling and is a lower bound on the true constant.
struct StabilityCertificate {
    double gamma_y = 0.0;
    double gamma_xi = 0.0;
    double Gamma_y = 0.0;
    double Gamma_r = 0.0;
    double Lambda_f = 0.0;
    double Gamma_s = 0.0;
    double Lambda_e = 0.0;
    double delta_bar = 0.0;
    double delta_inf = 0.0;
    double Lambda_g = 0.0;
    bool lipschitz_ok = false;   // gamma_y <= 1
    bool small_gain_ok = false;  // Gamma_y < 1 - gamma_y
    bool degenerate_probe_fit = false;
    CertificateProvenance provenance{};

    bool verdicts_hold() const noexcept { return lipschitz_ok && small_gain_ok; }

    void finalize() {
        Lambda_g = Lambda_f + delta_bar;
        lipschitz_ok = gamma_y <= 1.0;
        small_gain_ok = Gamma_y < 1.0 - gamma_y;
    }

    // Throws if stored values break the certificate's own invariants.
    void validate() const {
        for (double v : {gamma_y, gamma_xi, Gamma_y, Gamma_r, Lambda_f, Gamma_s, Lambda_e, delta_bar, delta_inf,
                         Lambda_g}) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("certificate constant is negative or non-finite");
        }
        if (Lambda_g != Lambda_f + delta_bar) throw ValidationError("Lambda_g != Lambda_f + delta_bar");
        if (lipschitz_ok != (gamma_y <= 1.0) || small_gain_ok != (Gamma_y < 1.0 - gamma_y)) {
            throw ValidationError("stored verdicts disagree with stored constants");
        }
    }
};

inline StabilityCertificate certify(const Plant& plant, const NicController& nic, const PidController& pid,
                                    const CertifyConfig& cfg = {}) {
    StabilityCertificate c;
    const auto& model = nic.model();
    c.gamma_y = estimate_gamma_y(model, plant, cfg.gamma_samples, cfg.gamma_seed);
    c.gamma_xi = cfg.gamma_xi.value_or(plant.gamma_xi);
    const auto gains = estimate_cascade_gains(nic, pid, cfg.probe);
    c.Gamma_y = gains.Gamma_y;
    c.Gamma_r = gains.Gamma_r;
    c.Lambda_f = gains.Lambda_f;
    c.Gamma_s = gains.Gamma_s;
    c.Lambda_e = gains.Lambda_e;
    c.degenerate_probe_fit = gains.degenerate;
    const auto rb = residue_bounds(model, plant, cfg.grid);
    c.delta_bar = rb.delta_bar;
    c.delta_inf = rb.delta_inf;
    c.provenance = {cfg.gamma_samples, cfg.gamma_seed, rb.points_u, rb.points_yu, gains.probes.size(),
                    cfg.probe.length, cfg.probe.seed};
    c.finalize();
    return c;
}

struct Theorem1Bounds {
    double y_bound;
    double e_bound;
};

//   ||y||_inf <= (Gamma_r ||r|| + gamma_xi ||xi|| + Lambda_g) / (1 - Gamma_y - gamma_y)
//   ||e||_inf <= ((Gamma_y + Gamma_s) ||r|| + gamma_xi ||xi|| + Lambda_e + ||Delta||) / (1 - Gamma_y)
inline Theorem1Bounds theorem1_bounds(const StabilityCertificate& c, double r_norm, double xi_norm) {
    if (!(r_norm >= 0.0) || !(xi_norm >= 0.0)) throw DomainError("signal norms must be >= 0");
    const double margin = 1.0 - c.Gamma_y - c.gamma_y;
    if (!(margin > 0.0)) {
        throw AssumptionViolation("Gamma_y + gamma_y = " + std::to_string(c.Gamma_y + c.gamma_y) +
                                  " >= 1: finite-gain bound undefined");
    }
    Theorem1Bounds b;
    b.y_bound = (c.Gamma_r * r_norm + c.gamma_xi * xi_norm + c.Lambda_g) / margin;
    b.e_bound = ((c.Gamma_y + c.Gamma_s) * r_norm + c.gamma_xi * xi_norm + c.Lambda_e + c.delta_inf) /
                (1.0 - c.Gamma_y);
    return b;
}

struct BoundCheck {
    double r_norm = 0.0;
    double xi_norm = 0.0;
    double observed_y = 0.0;
    double observed_e = 0.0;
    Theorem1Bounds bounds{0.0, 0.0};
    bool y_within = false;
    bool e_within = false;
    bool left_output_domain = false; // run exited Y: outside the certificate's validity region

    bool holds() const noexcept { return y_within && e_within; }
};

inline BoundCheck check_bounds(const StabilityCertificate& c, const Plant& plant, const Trace& trace,
                               const Signal& noise) {
    if (trace.empty()) throw DomainError("bound check on an empty trace");
    BoundCheck out;
    out.r_norm = lp_norm(trace.r, kInfNorm);
    out.xi_norm = noise.empty() ? 0.0 : lp_norm(noise.slice(1, static_cast<TimeIndex>(trace.size())), kInfNorm);
    out.observed_y = lp_norm(trace.y, kInfNorm);
    out.observed_e = lp_norm(trace.e, kInfNorm);
    out.bounds = theorem1_bounds(c, out.r_norm, out.xi_norm);
    out.y_within = out.observed_y <= out.bounds.y_bound;
    out.e_within = out.observed_e <= out.bounds.e_bound;
    for (double y : trace.y) {
        if (y < plant.y_min || y > plant.y_max) out.left_output_domain = true;
    }
    return out;
}

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct Theorem2Scenario {
    double step_amplitude = 1.0;
    std::size_t step_time = 10;
    double disturbance = 0.05;
    std::size_t horizon = 1000;
    std::size_t settle_window = 100;
    std::vector<double> y0{};

    friend bool operator==(const Theorem2Scenario&, const Theorem2Scenario&) = default;
};

struct SteadyStateCase {
    RunMetrics metrics{};
    double spread = 0.0; // max e - min e over the settle window
    Verdict verdict = Verdict::inconclusive;
};

struct Theorem2Report {
    double tol = 0.0;
    SteadyStateCase step;        // reference step, no disturbance
    SteadyStateCase disturbance; // constant reference, constant disturbance
    SteadyStateCase contrast;    // reference step with theta = 0
};

namespace detail {

inline SteadyStateCase classify(const Trace& trace, std::size_t window, double tol) {
    SteadyStateCase c;
    c.metrics = metrics(trace, window);
    const auto tail = std::span<const double>(trace.e).last(window);
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    c.spread = *hi - *lo;
    if (c.spread > tol) {
        c.verdict = Verdict::inconclusive;
    } else {
        c.verdict = c.metrics.steady_state_error < tol ? Verdict::pass : Verdict::fail;
    }
    return c;
}

} // namespace detail

// Zero steady-state error for steps and constant disturbances, checked by
// simulating to steady state. The theta = 0 run is reported for contrast.
inline Theorem2Report verify_theorem2(const Plant& plant, const NicController& nic, const PidController& pid,
                                      const Theorem2Scenario& sc, double tol) {
    if (std::all_of(pid.theta().begin(), pid.theta().end(), [](double v) { return v == 0.0; })) {
        throw ContractError("steady-state verification needs a PID with nonzero theta");
    }
    if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
    Theorem2Report rep;
    rep.tol = tol;

    RunConfig step;
    step.horizon = sc.horizon;
    step.y0 = sc.y0;
    step.reference = step_reference(sc.horizon + 1, sc.step_amplitude, sc.step_time);
    rep.step = detail::classify(simulate_closed_loop(plant, nic, pid, step), sc.settle_window, tol);

    RunConfig dist = step;
    dist.reference = Signal(std::vector<double>(sc.horizon + 1, sc.step_amplitude), 1);
    dist.noise = Signal(std::vector<double>(sc.horizon + 1, sc.disturbance), 1);
    rep.disturbance = detail::classify(simulate_closed_loop(plant, nic, pid, dist), sc.settle_window, tol);

    PidController off(std::vector<double>(pid.theta().size(), 0.0));
    rep.contrast = detail::classify(simulate_closed_loop(plant, nic, off, step), sc.settle_window, tol);
    return rep;
}

} // namespace d2ibc
