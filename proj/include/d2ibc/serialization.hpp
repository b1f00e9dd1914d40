#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "certify.hpp"
#include "errors.hpp"
#include "nic.hpp"
#include "simloop.hpp"
#include "sysid.hpp"
#include "vrft.hpp"

namespace d2ibc {

using json = nlohmann::json;

namespace detail {

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace detail

// {n, degree, affine_in_u, features:[{name, exponents}], coefficients}
inline json to_json(const RegressionModel& m) {
    json features = json::array();
    for (const auto& f : m.features()) features.push_back({{"name", f.name(m.order())}, {"exponents", f.exponents}});
    return {{"n", m.order()},
            {"degree", m.degree()},
            {"affine_in_u", m.affine_in_u()},
            {"features", features},
            {"coefficients", m.coefficients()}};
}

inline RegressionModel model_from_json(const json& j) {
    const int n = detail::field<int>(j, "n");
    std::vector<Feature> features;
    for (const auto& f : detail::field<json>(j, "features")) {
        features.push_back(Feature{detail::field<std::vector<int>>(f, "exponents")});
    }
    RegressionModel m(n, detail::field<int>(j, "degree"), std::move(features),
                      detail::field<std::vector<double>>(j, "coefficients"));
    if (j.contains("affine_in_u") && j.at("affine_in_u").get<bool>() != m.affine_in_u()) {
        throw ConfigError("stored affine_in_u flag disagrees with the feature basis");
    }
    return m;
}

inline json to_json(const SolverConfig& s) { return {{"grid_points", s.grid_points}, {"refine_tol", s.refine_tol}}; }

inline SolverConfig solver_from_json(const json& j) {
    SolverConfig s;
    s.grid_points = j.value("grid_points", s.grid_points);
    s.refine_tol = j.value("refine_tol", s.refine_tol);
    s.validate();
    return s;
}

// {model, mu, rho_y, rho_u, u_min, u_max, solver}
inline json to_json(const NicController& c) {
    const auto& s = c.settings();
    return {{"model", to_json(c.model())}, {"mu", s.mu},         {"rho_y", s.rho_y},
            {"rho_u", s.rho_u},            {"u_min", s.u_min},   {"u_max", s.u_max},
            {"solver", to_json(s.solver)}};
}

inline NicController nic_from_json(const json& j) {
    NicSettings s;
    s.mu = detail::field<double>(j, "mu");
    s.rho_y = detail::field<double>(j, "rho_y");
    s.rho_u = detail::field<double>(j, "rho_u");
    s.u_min = detail::field<double>(j, "u_min");
    s.u_max = detail::field<double>(j, "u_max");
    if (j.contains("solver")) s.solver = solver_from_json(j.at("solver"));
    return NicController(model_from_json(detail::field<json>(j, "model")), s);
}

// {theta, residual, samples_used, reference_model:{num, den}}
inline json to_json(const VrftResult& r, const ReferenceModel& M) {
    return {{"theta", r.theta},
            {"residual", r.residual},
            {"samples_used", r.samples_used},
            {"reference_model", {{"num", M.num()}, {"den", M.den()}}}};
}

inline VrftResult vrft_from_json(const json& j) {
    VrftResult r;
    r.theta = detail::field<std::vector<double>>(j, "theta");
    r.residual = detail::field<double>(j, "residual");
    r.samples_used = detail::field<std::size_t>(j, "samples_used");
    return r;
}

inline ReferenceModel reference_model_from_json(const json& j) {
    return ReferenceModel(detail::field<std::vector<double>>(j, "num"), detail::field<std::vector<double>>(j, "den"));
}

inline json to_json(const RunMetrics& m) {
    return {{"linf_error", m.linf_error},
            {"rms_error", m.rms_error},
            {"steady_state_error", m.steady_state_error},
            {"saturation_count", m.saturation_count}};
}

inline json to_json(const StabilityCertificate& c) {
    return {{"constants",
             {{"gamma_y", c.gamma_y},
              {"gamma_xi", c.gamma_xi},
              {"Gamma_y", c.Gamma_y},
              {"Gamma_r", c.Gamma_r},
              {"Lambda_f", c.Lambda_f},
              {"Gamma_s", c.Gamma_s},
              {"Lambda_e", c.Lambda_e},
              {"delta_bar", c.delta_bar},
              {"delta_inf", c.delta_inf},
              {"Lambda_g", c.Lambda_g}}},
            {"verdicts", {{"lipschitz_gamma_y_le_1", c.lipschitz_ok}, {"small_gain", c.small_gain_ok}}},
            {"degenerate_probe_fit", c.degenerate_probe_fit},
            {"estimates_are_lower_bounds", true},
            {"provenance",
             {{"gamma_samples", c.provenance.gamma_samples},
              {"gamma_seed", c.provenance.gamma_seed},
              {"grid_points_u", c.provenance.grid_points_u},
              {"grid_points_yu", c.provenance.grid_points_yu},
              {"probe_count", c.provenance.probe_count},
              {"probe_length", c.provenance.probe_length},
              {"probe_seed", c.provenance.probe_seed}}}};
}

inline StabilityCertificate certificate_from_json(const json& j) {
    StabilityCertificate c;
    const auto& k = detail::field<json>(j, "constants");
    c.gamma_y = detail::field<double>(k, "gamma_y");
    c.gamma_xi = detail::field<double>(k, "gamma_xi");
    c.Gamma_y = detail::field<double>(k, "Gamma_y");
    c.Gamma_r = detail::field<double>(k, "Gamma_r");
    c.Lambda_f = detail::field<double>(k, "Lambda_f");
    c.Gamma_s = detail::field<double>(k, "Gamma_s");
    c.Lambda_e = detail::field<double>(k, "Lambda_e");
    c.delta_bar = detail::field<double>(k, "delta_bar");
    c.delta_inf = detail::field<double>(k, "delta_inf");
    c.Lambda_g = detail::field<double>(k, "Lambda_g");
    const auto& v = detail::field<json>(j, "verdicts");
    c.lipschitz_ok = detail::field<bool>(v, "lipschitz_gamma_y_le_1");
    c.small_gain_ok = detail::field<bool>(v, "small_gain");
    c.degenerate_probe_fit = j.value("degenerate_probe_fit", false);
    if (j.contains("provenance")) {
        const auto& p = j.at("provenance");
        c.provenance.gamma_samples = p.value("gamma_samples", std::size_t{0});
        c.provenance.gamma_seed = p.value("gamma_seed", std::uint64_t{0});
        c.provenance.grid_points_u = p.value("grid_points_u", std::size_t{0});
        c.provenance.grid_points_yu = p.value("grid_points_yu", std::size_t{0});
        c.provenance.probe_count = p.value("probe_count", std::size_t{0});
        c.provenance.probe_length = p.value("probe_length", std::size_t{0});
        c.provenance.probe_seed = p.value("probe_seed", std::uint64_t{0});
    }
    c.validate();
    return c;
}

inline json to_json(const BoundCheck& b) {
    return {{"r_norm", b.r_norm},
            {"xi_norm", b.xi_norm},
            {"observed_y_linf", b.observed_y},
            {"observed_e_linf", b.observed_e},
            {"y_bound", b.bounds.y_bound},
            {"e_bound", b.bounds.e_bound},
            {"y_within_bound", b.y_within},
            {"e_within_bound", b.e_within},
            {"left_output_domain", b.left_output_domain}};
}

inline json to_json(const SteadyStateCase& c) {
    return {{"steady_state_error", c.metrics.steady_state_error},
            {"spread", c.spread},
            {"verdict", to_string(c.verdict)},
            {"metrics", to_json(c.metrics)}};
}

inline json to_json(const Theorem2Report& r) {
    return {{"tol", r.tol},
            {"step", to_json(r.step)},
            {"constant_disturbance", to_json(r.disturbance)},
            {"no_linear_controller", to_json(r.contrast)}};
}

} // namespace d2ibc
