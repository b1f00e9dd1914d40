// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "d2ibc/pipeline.hpp"
#include "support.hpp"

using namespace d2ibc;
using d2ibc::testing::Gen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1. Exact-model inversion on plant (a): |e_t| < 1e-9 for t > n, T = 1000 in under 1 s.
Outcome exact_inversion() {
    const auto plant = linear_plant();
    RunConfig cfg;
    cfg.horizon = 1000;
    cfg.reference = d2ibc::testing::feasible_reference(1001, 1.0, 2024);
    const auto nic = d2ibc::testing::make_nic(d2ibc::testing::exact_linear_model(), 0.0, plant.u_min, plant.u_max);
    const auto t0 = std::chrono::steady_clock::now();
    const auto tr = simulate_closed_loop(plant, nic, PidController({0.0}), cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double worst = 0.0;
    for (std::size_t k = static_cast<std::size_t>(plant.n); k < tr.size(); ++k) worst = std::max(worst, std::abs(tr.e[k]));
    return {worst < 1e-9 && secs < 1.0, fmt("max |e_t| (t > n) = %.3g, runtime %.3f s", worst, secs)};
}

// 2. Non-affine NIC vs a 1e5-point grid over U, 1000 random (q, r) on plant (c).
Outcome nic_oracle() {
    const auto d = d2ibc::testing::design(rational_plant(), {.degree = 3, .affine_in_u = false, .noise = 0.02});
    if (d.model.affine_in_u()) return {false, "identified model is unexpectedly affine"};
    Gen g(5150);
    const auto& s = d.nic.settings();
    constexpr int kFine = 100'000;
    double worst_gap = -INFINITY;
    for (int trial = 0; trial < 1000; ++trial) {
        Regressor q;
        q.n = 1;
        q.entries = {g.uniform(-3, 3)};
        const double r = g.uniform(-6, 6);
        const double u = d.nic.solve(q, r).u;
        if (u < s.u_min || u > s.u_max) return {false, "command outside U"};
        double oracle = INFINITY;
        for (int i = 0; i < kFine; ++i) {
            const double v = s.u_min + (s.u_max - s.u_min) * i / (kFine - 1.0);
            oracle = std::min(oracle, d.nic.objective(q, r, v));
        }
        worst_gap = std::max(worst_gap, d.nic.objective(q, r, u) - oracle);
    }
    return {worst_gap <= 1e-9, fmt("max objective(command) - grid min = %.3g", worst_gap)};
}

// 3. theta* = (0.4, 0.2) recovered from data generated by the PID recursion.
Outcome vrft_recovery() {
    Gen g(77);
    const auto e = g.vector(500, -1, 1);
    PidController truth({0.4, 0.2});
    std::vector<double> du;
    for (double v : e) du.push_back(truth.step(v));
    const auto res = fit_pid(Signal(du, 1), Signal(e, 1), 1);
    const double err = std::max(std::abs(res.theta[0] - 0.4), std::abs(res.theta[1] - 0.2));
    return {err < 1e-9 && res.residual < 1e-18, fmt("|theta - theta*|_inf = %.3g, residual = %.3g", err, res.residual)};
}

std::vector<double> poly_from_real_roots(const std::vector<double>& roots) {
    std::vector<double> c{1.0};
    for (double z : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k] += c[k];
            next[k + 1] -= z * c[k];
        }
        c = next;
    }
    return c;
}

// 4. Forward-filter random r through 20 random stable minimum-phase M, invert.
Outcome virtual_reference_round_trip() {
    Gen g(404);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> poles(static_cast<std::size_t>(g.integer(1, 3)));
        for (auto& p : poles) p = g.uniform(-0.9, 0.9);
        std::vector<double> zeros(static_cast<std::size_t>(g.integer(0, 2)));
        for (auto& z : zeros) z = g.uniform(-0.8, 0.8);
        const auto den = poly_from_real_roots(poles);
        const auto lead = poly_from_real_roots(zeros);
        double sd = 0, sn = 0;
        for (double v : den) sd += v;
        for (double v : lead) sn += v;
        std::vector<double> num(static_cast<std::size_t>(g.integer(1, 3)), 0.0);
        for (double v : lead) num.push_back(v * sd / sn);
        const ReferenceModel M(num, den);

        const auto r = g.vector(300, -1, 1);
        std::vector<double> y(r.size(), 0.0);
        for (std::size_t k = 0; k < r.size(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < num.size() && j <= k; ++j) acc += num[j] * r[k - j];
            for (std::size_t j = 1; j < den.size() && j <= k; ++j) acc -= den[j] * y[k - j];
            y[k] = acc / den[0];
        }
        const auto vr = virtual_reference(M, Signal(y, 1));
        for (TimeIndex t = vr.valid_begin; t <= vr.valid_end; ++t) {
            worst = std::max(worst, std::abs(vr.r.at(t) - r[static_cast<std::size_t>(t - 1)]));
        }
    }
    return {worst < 1e-9, fmt("max |r^v - r| on valid windows = %.3g", worst)};
}

d2ibc::testing::Design plant_b_design() {
    return d2ibc::testing::design(quadratic_plant(), {.degree = 2, .affine_in_u = false, .mu = 0.01, .n_theta = 1});
}

// 5. Unit step on plant (b): steady-state error < 1e-4 by T = 1000, theta = 0 worse.
Outcome theorem2_step() {
    const auto d = plant_b_design();
    const auto rep = verify_theorem2(d.plant, d.nic, d.pid, {}, 1e-4);
    const double ss = rep.step.metrics.steady_state_error;
    const double contrast = rep.contrast.metrics.steady_state_error;
    return {rep.step.verdict == Verdict::pass && ss < 1e-4 && contrast > ss,
            fmt("steady-state error %.3g (verdict %s); theta = 0 gives %.3g", ss, to_string(rep.step.verdict),
                contrast)};
}

// 6. Constant disturbance 0.05 rejected on plant (b).
Outcome theorem2_disturbance() {
    const auto d = plant_b_design();
    Theorem2Scenario sc;
    sc.disturbance = 0.05;
    const auto rep = verify_theorem2(d.plant, d.nic, d.pid, sc, 1e-4);
    const double ss = rep.disturbance.metrics.steady_state_error;
    return {rep.disturbance.verdict == Verdict::pass && ss < 1e-4,
            fmt("steady-state error %.3g (verdict %s)", ss, to_string(rep.disturbance.verdict))};
}

// 7. Observed norms never exceed the bounds on fixture scenarios whose verdicts hold.
Outcome bound_soundness() {
    std::size_t checked = 0, violations = 0, skipped = 0;
    const std::vector<Plant> plants{linear_plant(), quadratic_plant(), rational_plant()};
    for (const auto& plant : plants) {
        for (double mu : {0.0, 0.01, 0.1}) {
            for (double data_noise : {0.0, 0.02}) {
                d2ibc::testing::DesignOptions o;
                o.degree = plant.name == "linear" ? 1 : 2;
                o.affine_in_u = plant.name != "quadratic";
                o.mu = mu;
                o.noise = data_noise;
                o.n_theta = 1;
                const auto d = d2ibc::testing::design(plant, o);
                CertifyConfig cc;
                cc.probe.y_amplitudes = {0.0, 0.5, 1.0, 2.0};
                cc.probe.r_amplitudes = {0.0, 0.5, 1.0, 2.0};
                const auto cert = certify(d.plant, d.nic, d.pid, cc);
                if (!cert.verdicts_hold()) {
                    ++skipped;
                    continue;
                }
                std::vector<RunConfig> runs;
                for (double amp : {0.5, 1.0, 2.0}) {
                    RunConfig step;
                    step.horizon = 600;
                    step.reference = step_reference(601, amp, 10);
                    runs.push_back(step);
                    RunConfig noisy = step;
                    noisy.noise = Signal(uniform_sequence(601, 0.05, 900 + runs.size()), 1);
                    runs.push_back(noisy);
                    RunConfig sine = step;
                    std::vector<double> r(601);
                    for (std::size_t k = 0; k < r.size(); ++k) r[k] = amp * std::sin(0.05 * static_cast<double>(k));
                    sine.reference = Signal(r, 1);
                    runs.push_back(sine);
                }
                for (const auto& rc : runs) {
                    const auto bc = check_bounds(cert, d.plant, simulate_closed_loop(d.plant, d.nic, d.pid, rc), rc.noise);
                    ++checked;
                    if (!bc.holds()) ++violations;
                }
            }
        }
    }
    return {checked > 0 && violations == 0,
            fmt("%zu runs checked, %zu violations, %zu designs without holding verdicts", checked, violations,
                skipped)};
}

// 8. Residue 0.3 y_t: estimate within 1e-3 of 0.3 at 1e4 samples, monotone in samples.
Outcome gamma_calibration() {
    const auto model = RegressionModel::affine(1, 0.0, {0.2}, {}, 1.0);
    const auto plant = linear_plant();
    const double est = estimate_gamma_y(model, plant, 10'000, 1);
    bool monotone = true;
    double prev = 0.0;
    for (std::size_t n : {100u, 300u, 1000u, 3000u, 10'000u}) {
        const double v = estimate_gamma_y(model, plant, n, 1);
        monotone = monotone && v >= prev;
        prev = v;
    }
    return {std::abs(est - 0.3) < 1e-3 && monotone,
            fmt("estimate %.6f, monotone over sample counts: %s", est, monotone ? "yes" : "no")};
}

// 9. |command| non-increasing over mu in {0, 0.01, 0.1, 1, 10} on affine models.
Outcome mu_monotonicity() {
    const auto d = d2ibc::testing::design(linear_plant(), {.degree = 1, .affine_in_u = true, .noise = 0.02});
    Gen g(909);
    std::size_t breaks = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Regressor q;
        q.n = 1;
        q.entries = {g.uniform(-5, 5)};
        const double r = g.uniform(-6, 6);
        double prev = INFINITY;
        for (double mu : {0.0, 0.01, 0.1, 1.0, 10.0}) {
            auto s = d.nic.settings();
            s.mu = mu;
            const double u = std::abs(NicController(d.model, s).solve(q, r).u);
            if (u > prev) ++breaks;
            prev = u;
        }
    }
    return {breaks == 0, fmt("%zu monotonicity breaks over 100 (q, r) pairs", breaks)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 10. Two full pipeline runs with fixed seeds give byte-identical artifacts.
Outcome determinism() {
    const auto cfg = load_config(D2IBC_SOURCE_DIR "/configs/demo.json");
    const auto root = fs::temp_directory_path() / "d2ibc_acceptance";
    fs::remove_all(root);
    std::ostringstream log, err;
    const int a = Pipeline(cfg, root / "a", log).run("all", err);
    const int b = Pipeline(cfg, root / "b", log).run("all", err);
    if (a != kExitOk || b != kExitOk) return {false, "pipeline failed: " + err.str()};
    std::size_t files = 0, diffs = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++files;
        if (slurp(entry.path()) != slurp(root / "b" / entry.path().filename())) ++diffs;
    }
    return {files > 0 && diffs == 0, fmt("%zu artifacts compared, %zu differ", files, diffs)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"exact-inversion tracking", exact_inversion},
        {"NIC optimizer oracle", nic_oracle},
        {"VRFT recovery", vrft_recovery},
        {"virtual-reference round trip", virtual_reference_round_trip},
        {"zero steady-state error (step)", theorem2_step},
        {"constant disturbance rejection", theorem2_disturbance},
        {"finite-gain bound soundness", bound_soundness},
        {"gamma_y calibration", gamma_calibration},
        {"mu-monotonicity", mu_monotonicity},
        {"pipeline determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s  %2d  %-34s %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
