#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "certify.hpp"
#include "errors.hpp"
#include "nic.hpp"
#include "record_io.hpp"
#include "serialization.hpp"
#include "simloop.hpp"
#include "sysid.hpp"
#include "vrft.hpp"

namespace d2ibc {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitAssumption = 4,
    kExitBound = 5,
};

struct ReferenceSpec {
    std::string type = "step"; // step | constant | sine | open_loop
    double amplitude = 1.0;
    std::size_t time = 10;     // step instant
    double period = 100.0;     // sine
    double offset = 0.0;       // sine

    friend bool operator==(const ReferenceSpec&, const ReferenceSpec&) = default;
};

struct NoiseSpec {
    std::string type = "none"; // none | constant | uniform
    double amplitude = 0.0;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct RunSpec {
    std::string name;
    std::size_t horizon = 1000;
    ReferenceSpec reference{};
    NoiseSpec noise{};
    std::vector<double> y0{};

    friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string output = "out";

    std::string plant = "quadratic";
    std::optional<double> u_min, u_max, y_min, y_max;

    std::size_t data_length = 400;
    double data_amplitude = 1.0;
    double data_noise = 0.0;
    std::vector<double> data_y0{};
    std::string data_file{}; // when set, gen is skipped and identify loads this file

    IdConfig id{};

    double mu = 0.0;
    SolverConfig solver{};

    double reference_lambda = 0.6;
    std::vector<double> reference_num{};
    std::vector<double> reference_den{};

    std::size_t n_theta = 1;

    std::vector<RunSpec> runs{};
    std::size_t settle_window = 100;

    std::size_t gamma_samples = 10'000;
    std::size_t grid_points_per_axis = 50;
    std::size_t grid_budget = 1'000'000;
    std::vector<double> probe_y_amplitudes{0.0, 0.5, 1.0, 2.0};
    std::vector<double> probe_r_amplitudes{0.0, 0.5, 1.0, 2.0};
    std::size_t probe_length = 200;
    std::optional<double> gamma_xi{};
    double bound_r_norm = 1.0;
    double bound_xi_norm = 0.0;

    Theorem2Scenario theorem2{};
    double theorem2_tol = 1e-4;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;

    Plant make_plant() const {
        Plant p = plant_by_name(plant);
        if (u_min) p.u_min = *u_min;
        if (u_max) p.u_max = *u_max;
        if (y_min) p.y_min = *y_min;
        if (y_max) p.y_max = *y_max;
        if (!(p.u_min < p.u_max) || !(p.y_min < p.y_max)) throw ConfigError("plant bounds must be ordered");
        return p;
    }

    ReferenceModel make_reference_model() const {
        if (!reference_num.empty() || !reference_den.empty()) return ReferenceModel(reference_num, reference_den);
        return ReferenceModel::first_order(reference_lambda);
    }

    CertifyConfig make_certify_config() const {
        CertifyConfig c;
        c.gamma_samples = gamma_samples;
        c.gamma_seed = seed + 2;
        c.grid = {grid_points_per_axis, grid_budget};
        c.probe.y_amplitudes = probe_y_amplitudes;
        c.probe.r_amplitudes = probe_r_amplitudes;
        c.probe.length = probe_length;
        c.probe.seed = seed + 3;
        c.gamma_xi = gamma_xi;
        return c;
    }

    void validate() const {
        id.validate();
        solver.validate();
        if (data_file.empty() && data_length < 2) throw ConfigError("data.length must be >= 2");
        if (!(data_amplitude > 0.0)) throw ConfigError("data.amplitude must be > 0");
        if (!(data_noise >= 0.0)) throw ConfigError("data.noise must be >= 0");
        if (!(mu >= 0.0)) throw ConfigError("nic.mu must be >= 0");
        if (runs.empty()) throw ConfigError("at least one run is required");
        std::set<std::string> names;
        for (const auto& r : runs) {
            if (r.name.empty()) throw ConfigError("every run needs a name");
            if (r.name.find_first_of("/\\") != std::string::npos) throw ConfigError("run names must not contain path separators");
            if (!names.insert(r.name).second) throw ConfigError("duplicate run name '" + r.name + "'");
            if (r.horizon <= settle_window) throw ConfigError("run '" + r.name + "': horizon must exceed settle_window");
            static const std::set<std::string> refs{"step", "constant", "sine", "open_loop"};
            static const std::set<std::string> noises{"none", "constant", "uniform"};
            if (!refs.count(r.reference.type)) throw ConfigError("run '" + r.name + "': unknown reference type");
            if (!noises.count(r.noise.type)) throw ConfigError("run '" + r.name + "': unknown noise type");
        }
        if (settle_window == 0) throw ConfigError("settle_window must be >= 1");
        if (gamma_samples < 100) throw ConfigError("certificate.gamma_samples must be >= 100");
        if (probe_length < 2) throw ConfigError("certificate.probe.length must be >= 2");
        if (theorem2.horizon <= theorem2.settle_window || theorem2.settle_window == 0) {
            throw ConfigError("theorem2 horizon must exceed a nonzero settle_window");
        }
        if (!(theorem2_tol > 0.0)) throw ConfigError("theorem2.tol must be > 0");
        make_plant();
        make_reference_model();
    }
};

namespace detail {

inline void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    T v{};
    read(j, key, v);
    out = v;
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace detail

inline PipelineConfig config_from_json(const json& j) {
    using detail::read;
    detail::check_keys(j, "config", {"seed", "output", "plant", "data", "identification", "nic", "reference_model", "n_theta",
                                     "runs", "settle_window", "certificate", "theorem2"});
    PipelineConfig c;
    if (!j.contains("seed")) throw ConfigError("config must set 'seed'");
    read(j, "seed", c.seed);
    read(j, "output", c.output);

    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        detail::check_keys(p, "plant", {"name", "u_min", "u_max", "y_min", "y_max"});
        read(p, "name", c.plant);
        read(p, "u_min", c.u_min);
        read(p, "u_max", c.u_max);
        read(p, "y_min", c.y_min);
        read(p, "y_max", c.y_max);
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        detail::check_keys(d, "data", {"length", "amplitude", "noise", "y0", "file"});
        read(d, "length", c.data_length);
        read(d, "amplitude", c.data_amplitude);
        read(d, "noise", c.data_noise);
        read(d, "y0", c.data_y0);
        read(d, "file", c.data_file);
    }
    if (j.contains("identification")) {
        const auto& d = j.at("identification");
        detail::check_keys(d, "identification", {"n", "degree", "ridge", "affine_in_u"});
        read(d, "n", c.id.n);
        read(d, "degree", c.id.degree);
        read(d, "ridge", c.id.ridge);
        read(d, "affine_in_u", c.id.affine_in_u);
    }
    if (j.contains("nic")) {
        const auto& d = j.at("nic");
        detail::check_keys(d, "nic", {"mu", "solver"});
        read(d, "mu", c.mu);
        if (d.contains("solver")) {
            detail::check_keys(d.at("solver"), "nic.solver", {"grid_points", "refine_tol"});
            read(d.at("solver"), "grid_points", c.solver.grid_points);
            read(d.at("solver"), "refine_tol", c.solver.refine_tol);
        }
    }
    if (j.contains("reference_model")) {
        const auto& d = j.at("reference_model");
        detail::check_keys(d, "reference_model", {"lambda", "num", "den"});
        read(d, "lambda", c.reference_lambda);
        read(d, "num", c.reference_num);
        read(d, "den", c.reference_den);
    }
    read(j, "n_theta", c.n_theta);
    read(j, "settle_window", c.settle_window);
    if (j.contains("runs")) {
        for (const auto& r : j.at("runs")) {
            detail::check_keys(r, "run", {"name", "horizon", "reference", "noise", "y0"});
            RunSpec s;
            read(r, "name", s.name);
            read(r, "horizon", s.horizon);
            read(r, "y0", s.y0);
            if (r.contains("reference")) {
                const auto& ref = r.at("reference");
                detail::check_keys(ref, "run.reference", {"type", "amplitude", "time", "period", "offset"});
                read(ref, "type", s.reference.type);
                read(ref, "amplitude", s.reference.amplitude);
                read(ref, "time", s.reference.time);
                read(ref, "period", s.reference.period);
                read(ref, "offset", s.reference.offset);
            }
            if (r.contains("noise")) {
                const auto& nz = r.at("noise");
                detail::check_keys(nz, "run.noise", {"type", "amplitude"});
                read(nz, "type", s.noise.type);
                read(nz, "amplitude", s.noise.amplitude);
            }
            c.runs.push_back(std::move(s));
        }
    }
    if (j.contains("certificate")) {
        const auto& d = j.at("certificate");
        detail::check_keys(d, "certificate",
                           {"gamma_samples", "grid_points_per_axis", "grid_budget", "probe", "gamma_xi", "r_norm",
                            "xi_norm"});
        read(d, "gamma_samples", c.gamma_samples);
        read(d, "grid_points_per_axis", c.grid_points_per_axis);
        read(d, "grid_budget", c.grid_budget);
        read(d, "gamma_xi", c.gamma_xi);
        read(d, "r_norm", c.bound_r_norm);
        read(d, "xi_norm", c.bound_xi_norm);
        if (d.contains("probe")) {
            const auto& p = d.at("probe");
            detail::check_keys(p, "certificate.probe", {"y_amplitudes", "r_amplitudes", "length"});
            read(p, "y_amplitudes", c.probe_y_amplitudes);
            read(p, "r_amplitudes", c.probe_r_amplitudes);
            read(p, "length", c.probe_length);
        }
    }
    if (j.contains("theorem2")) {
        const auto& d = j.at("theorem2");
        detail::check_keys(d, "theorem2",
                           {"step_amplitude", "step_time", "disturbance", "horizon", "settle_window", "tol", "y0"});
        read(d, "step_amplitude", c.theorem2.step_amplitude);
        read(d, "step_time", c.theorem2.step_time);
        read(d, "disturbance", c.theorem2.disturbance);
        read(d, "horizon", c.theorem2.horizon);
        read(d, "settle_window", c.theorem2.settle_window);
        read(d, "y0", c.theorem2.y0);
        read(d, "tol", c.theorem2_tol);
    }
    c.validate();
    return c;
}

inline json to_json(const PipelineConfig& c) {
    json runs = json::array();
    for (const auto& r : c.runs) {
        runs.push_back({{"name", r.name},
                        {"horizon", r.horizon},
                        {"y0", r.y0},
                        {"reference",
                         {{"type", r.reference.type},
                          {"amplitude", r.reference.amplitude},
                          {"time", r.reference.time},
                          {"period", r.reference.period},
                          {"offset", r.reference.offset}}},
                        {"noise", {{"type", r.noise.type}, {"amplitude", r.noise.amplitude}}}});
    }
    return {{"seed", c.seed},
            {"output", c.output},
            {"plant",
             {{"name", c.plant},
              {"u_min", detail::opt(c.u_min)},
              {"u_max", detail::opt(c.u_max)},
              {"y_min", detail::opt(c.y_min)},
              {"y_max", detail::opt(c.y_max)}}},
            {"data",
             {{"length", c.data_length},
              {"amplitude", c.data_amplitude},
              {"noise", c.data_noise},
              {"y0", c.data_y0},
              {"file", c.data_file}}},
            {"identification",
             {{"n", c.id.n}, {"degree", c.id.degree}, {"ridge", c.id.ridge}, {"affine_in_u", c.id.affine_in_u}}},
            {"nic", {{"mu", c.mu}, {"solver", to_json(c.solver)}}},
            {"reference_model", {{"lambda", c.reference_lambda}, {"num", c.reference_num}, {"den", c.reference_den}}},
            {"n_theta", c.n_theta},
            {"runs", runs},
            {"settle_window", c.settle_window},
            {"certificate",
             {{"gamma_samples", c.gamma_samples},
              {"grid_points_per_axis", c.grid_points_per_axis},
              {"grid_budget", c.grid_budget},
              {"gamma_xi", detail::opt(c.gamma_xi)},
              {"r_norm", c.bound_r_norm},
              {"xi_norm", c.bound_xi_norm},
              {"probe",
               {{"y_amplitudes", c.probe_y_amplitudes},
                {"r_amplitudes", c.probe_r_amplitudes},
                {"length", c.probe_length}}}}},
            {"theorem2",
             {{"step_amplitude", c.theorem2.step_amplitude},
              {"step_time", c.theorem2.step_time},
              {"disturbance", c.theorem2.disturbance},
              {"horizon", c.theorem2.horizon},
              {"settle_window", c.theorem2.settle_window},
              {"y0", c.theorem2.y0},
              {"tol", c.theorem2_tol}}}};
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

// Reference, noise and initial condition for one configured run.
inline RunConfig build_run(const PipelineConfig& cfg, const Plant& plant, const RunSpec& spec, std::size_t index) {
    RunConfig rc;
    rc.horizon = spec.horizon;
    rc.y0 = spec.y0;
    const std::size_t len = spec.horizon + 1;
    std::vector<double> r(len, 0.0);
    const auto& ref = spec.reference;
    if (ref.type == "step") {
        const auto step = step_reference(len, ref.amplitude, ref.time);
        r.assign(step.samples().begin(), step.samples().end());
    } else if (ref.type == "constant") {
        r.assign(len, ref.amplitude);
    } else if (ref.type == "sine") {
        const double pi = std::acos(-1.0);
        for (std::size_t k = 0; k < len; ++k) {
            r[k] = ref.offset + ref.amplitude * std::sin(2.0 * pi * static_cast<double>(k) / ref.period);
        }
    } else if (ref.type == "open_loop") {
        // a noise-free plant solution from the run's initial condition
        const auto u = uniform_sequence(len - 1, ref.amplitude, cfg.seed + 200 + index);
        const auto run = simulate_open_loop(plant, Signal(u, 1), Signal(), spec.y0);
        r[0] = spec.y0.empty() ? 0.0 : spec.y0.front();
        for (std::size_t k = 1; k < len; ++k) r[k] = run.y.at(static_cast<TimeIndex>(k + 1));
    }
    rc.reference = Signal(std::move(r), 1);
    if (spec.noise.type == "constant") {
        rc.noise = Signal(std::vector<double>(len, spec.noise.amplitude), 1);
    } else if (spec.noise.type == "uniform") {
        rc.noise = Signal(uniform_sequence(len, spec.noise.amplitude, cfg.seed + 100 + index), 1);
    }
    return rc;
}

// Stages: gen -> identify -> design -> simulate -> certify -> report. Each stage
// reads its inputs from the output directory, so any stage can be rerun alone.
class Pipeline {
public:
    Pipeline(PipelineConfig cfg, std::filesystem::path out, std::ostream& log = std::cout)
        : cfg_(std::move(cfg)), out_(std::move(out)), log_(log) {
        cfg_.validate();
    }

    const PipelineConfig& config() const noexcept { return cfg_; }
    std::filesystem::path path(const std::string& name) const { return out_ / name; }

    std::filesystem::path record_path() const {
        return cfg_.data_file.empty() ? path("record.csv") : std::filesystem::path(cfg_.data_file);
    }

    void gen() {
        ensure_out();
        if (!cfg_.data_file.empty()) {
            log_ << "gen: using recorded data " << cfg_.data_file << '\n';
            return;
        }
        const Plant plant = cfg_.make_plant();
        const auto u = uniform_sequence(cfg_.data_length, cfg_.data_amplitude, cfg_.seed);
        const auto xi = cfg_.data_noise > 0.0 ? uniform_sequence(cfg_.data_length, cfg_.data_noise, cfg_.seed + 1)
                                              : std::vector<double>{};
        const auto record = generate_record(plant, u, xi, cfg_.data_y0);
        save_record(path("record.csv").string(), record);
        log_ << "gen: wrote " << record.length() << " samples to " << path("record.csv").string() << '\n';
    }

    void identify() {
        ensure_out();
        const auto record = load_record(record_path().string());
        const auto model = d2ibc::identify(record, cfg_.id);
        const auto res = one_step_residuals(model, record);
        write_json(path("model.json"), to_json(model));
        log_ << "identify: " << model.features().size() << " features, one-step residual max "
             << lp_norm(res, kInfNorm) << '\n';
    }

    void design() {
        ensure_out();
        const auto record = load_record(record_path().string());
        const auto model = model_from_json(read_json(path("model.json")));
        const Plant plant = cfg_.make_plant();
        const auto rho = rho_constants(record);
        NicSettings s;
        s.mu = cfg_.mu;
        s.rho_y = rho.rho_y;
        s.rho_u = rho.rho_u;
        s.u_min = plant.u_min;
        s.u_max = plant.u_max;
        s.solver = cfg_.solver;
        const NicController nic(model, s);
        write_json(path("nic.json"), to_json(nic));

        const auto M = cfg_.make_reference_model();
        const auto vr = design_pid(nic, M, record, cfg_.n_theta);
        write_json(path("pid.json"), to_json(vr, M));
        log_ << "design: theta = " << json(vr.theta).dump() << ", residual " << vr.residual << '\n';
    }

    void simulate() {
        ensure_out();
        const Plant plant = cfg_.make_plant();
        const NicController nic = load_nic();
        const PidController pid = load_pid();
        const auto traces = run_all(plant, nic, pid);
        json metrics_out = json::object();
        for (std::size_t i = 0; i < traces.size(); ++i) {
            const auto& spec = cfg_.runs[i];
            std::ofstream f(path("trace_" + spec.name + ".csv"), std::ios::binary);
            if (!f) throw DataError("cannot write trace for run '" + spec.name + "'");
            write_trace(f, traces[i]);
            metrics_out[spec.name] = to_json(metrics(traces[i], cfg_.settle_window));
        }
        write_json(path("metrics.json"), metrics_out);
        log_ << "simulate: " << traces.size() << " run(s)\n";
    }

    // Writes certificate.json; returns kExitAssumption / kExitBound when the
    // verdicts fail or an observed run exceeds its bound.
    int certify() {
        ensure_out();
        const Plant plant = cfg_.make_plant();
        const NicController nic = load_nic();
        const PidController pid = load_pid();
        const auto cert = d2ibc::certify(plant, nic, pid, cfg_.make_certify_config());

        json out = to_json(cert);
        int code = kExitOk;
        if (cert.verdicts_hold()) {
            const auto b = theorem1_bounds(cert, cfg_.bound_r_norm, cfg_.bound_xi_norm);
            out["theorem1_bounds"] = {{"r_norm", cfg_.bound_r_norm},
                                      {"xi_norm", cfg_.bound_xi_norm},
                                      {"y_bound", b.y_bound},
                                      {"e_bound", b.e_bound}};
            const auto traces = run_all(plant, nic, pid);
            json checks = json::object();
            for (std::size_t i = 0; i < traces.size(); ++i) {
                const auto rc = build_run(cfg_, plant, cfg_.runs[i], i);
                const auto bc = check_bounds(cert, plant, traces[i], rc.noise);
                checks[cfg_.runs[i].name] = to_json(bc);
                if (!bc.holds()) code = kExitBound;
            }
            out["bound_checks"] = checks;
        } else {
            out["theorem1_bounds"] = nullptr;
            code = kExitAssumption;
        }

        const bool has_integrator =
            std::any_of(pid.theta().begin(), pid.theta().end(), [](double v) { return v != 0.0; });
        if (has_integrator) {
            out["theorem2"] = to_json(verify_theorem2(plant, nic, pid, cfg_.theorem2, cfg_.theorem2_tol));
        } else {
            out["theorem2"] = nullptr;
        }
        write_json(path("certificate.json"), out);
        log_ << "certify: gamma_y = " << cert.gamma_y << ", Gamma_y = " << cert.Gamma_y
             << ", verdicts " << (cert.verdicts_hold() ? "hold" : "fail") << '\n';
        return code;
    }

    void report() {
        ensure_out();
        const json m = read_json(path("metrics.json"));
        const json c = read_json(path("certificate.json"));
        json runs = json::object();
        for (const auto& spec : cfg_.runs) {
            if (!m.contains(spec.name)) throw DataError("metrics.json lacks run '" + spec.name + "'");
            json r = m.at(spec.name);
            if (c.contains("bound_checks") && c.at("bound_checks").contains(spec.name)) {
                r["bounds"] = c.at("bound_checks").at(spec.name);
            } else {
                r["bounds"] = nullptr;
            }
            runs[spec.name] = r;
        }
        json summary = {{"runs", runs},
                        {"verdicts", c.at("verdicts")},
                        {"constants", c.at("constants")},
                        {"estimates_are_lower_bounds", true},
                        {"theorem1_bounds", c.value("theorem1_bounds", json(nullptr))},
                        {"theorem2", c.value("theorem2", json(nullptr))}};
        write_json(path("summary.json"), summary);
        log_ << "report: wrote " << path("summary.json").string() << '\n';
    }

    // Runs a named stage (or "all") and maps failures to exit codes.
    int run(const std::string& stage, std::ostream& err = std::cerr) {
        const std::vector<std::string> order{"gen", "identify", "design", "simulate", "certify", "report"};
        std::vector<std::string> todo;
        if (stage == "all") {
            todo = order;
        } else if (std::find(order.begin(), order.end(), stage) != order.end()) {
            todo = {stage};
        } else {
            err << "error: unknown stage '" << stage << "'\n";
            return kExitConfig;
        }
        int deferred = kExitOk;
        for (const auto& s : todo) {
            const int code = run_stage(s, err);
            if (code == kExitAssumption || code == kExitBound) {
                // keep going so report still gets written; surface the code at the end
                if (deferred == kExitOk) deferred = code;
                continue;
            }
            if (code != kExitOk) return code;
        }
        return deferred;
    }

private:
    int run_stage(const std::string& s, std::ostream& err) {
        try {
            if (s == "gen") gen();
            else if (s == "identify") identify();
            else if (s == "design") design();
            else if (s == "simulate") simulate();
            else if (s == "certify") {
                const int code = certify();
                if (code == kExitAssumption) err << "stage certify: assumption verdicts fail (Gamma_y + gamma_y >= 1)\n";
                if (code == kExitBound) err << "stage certify: observed norm exceeds an estimated bound\n";
                return code;
            } else if (s == "report") report();
            return kExitOk;
        } catch (const ConfigError& e) {
            err << "error [stage " << s << "]: " << e.what() << '\n';
            return kExitConfig;
        } catch (const DataError& e) {
            err << "error [stage " << s << "]: " << e.what() << '\n';
            return kExitData;
        } catch (const AssumptionViolation& e) {
            err << "error [stage " << s << "]: " << e.what() << '\n';
            return kExitAssumption;
        } catch (const InstabilityError& e) {
            err << "error [stage " << s << "]: " << e.what() << '\n';
            return kExitAssumption;
        } catch (const Error& e) {
            err << "error [stage " << s << "]: " << e.what() << '\n';
            return kExitConfig;
        } catch (const json::exception& e) {
            err << "error [stage " << s << "]: malformed artifact: " << e.what() << '\n';
            return kExitData;
        }
    }

    void ensure_out() const { std::filesystem::create_directories(out_); }

    NicController load_nic() const { return nic_from_json(read_json(path("nic.json"))); }
    PidController load_pid() const { return PidController(vrft_from_json(read_json(path("pid.json"))).theta); }

    std::vector<Trace> run_all(const Plant& plant, const NicController& nic, const PidController& pid) const {
        std::vector<std::future<Trace>> jobs;
        for (std::size_t i = 0; i < cfg_.runs.size(); ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] {
                return simulate_closed_loop(plant, nic, pid, build_run(cfg_, plant, cfg_.runs[i], i));
            }));
        }
        std::vector<Trace> out;
        for (auto& j : jobs) out.push_back(j.get());
        return out;
    }

    static json read_json(const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw DataError("missing artifact '" + p.string() + "' (run the earlier stages first)");
        try {
            json j;
            in >> j;
            return j;
        } catch (const json::exception& e) {
            throw DataError("artifact '" + p.string() + "' is not valid JSON: " + e.what());
        }
    }

    static void write_json(const std::filesystem::path& p, const json& j) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DataError("cannot write '" + p.string() + "'");
        out << j.dump(2) << '\n';
    }

    PipelineConfig cfg_;
    std::filesystem::path out_;
    std::ostream& log_;
};

} // namespace d2ibc
