#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "d2ibc/d2ibc.hpp"

namespace d2ibc::testing {

// Deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    std::vector<double> vector(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 engine_;
};

struct Design {
    Plant plant;
    DataRecord record;
    RegressionModel model;
    NicController nic;
    VrftResult vrft;
    PidController pid;
};

struct DesignOptions {
    int degree = 2;
    bool affine_in_u = false;
    double ridge = 1e-6;
    double mu = 0.01;
    std::size_t n_theta = 1;
    std::size_t length = 400;
    double amplitude = 1.0;
    double noise = 0.0;
    std::uint64_t seed = 11;
    double lambda = 0.6;
};

// Identification record -> model -> NIC -> virtual-reference PID.
inline Design design(const Plant& plant, const DesignOptions& o = {}) {
    const auto u = uniform_sequence(o.length, o.amplitude, o.seed);
    const auto xi = o.noise > 0.0 ? uniform_sequence(o.length, o.noise, o.seed + 1) : std::vector<double>{};
    DataRecord record = generate_record(plant, u, xi, {});
    IdConfig id;
    id.n = plant.n;
    id.degree = o.degree;
    id.ridge = o.ridge;
    id.affine_in_u = o.affine_in_u;
    RegressionModel model = identify(record, id);
    const auto rho = rho_constants(record);
    NicSettings s;
    s.mu = o.mu;
    s.rho_y = rho.rho_y;
    s.rho_u = rho.rho_u;
    s.u_min = plant.u_min;
    s.u_max = plant.u_max;
    NicController nic(model, s);
    VrftResult vr = design_pid(nic, ReferenceModel::first_order(o.lambda), record, o.n_theta);
    PidController pid(vr.theta);
    return {plant, std::move(record), std::move(model), std::move(nic), std::move(vr), std::move(pid)};
}

// The exact model of plant (a): f = 0.5 y_t + u_t.
inline RegressionModel exact_linear_model() { return RegressionModel::affine(1, 0.0, {0.5}, {}, 1.0); }

inline NicController make_nic(const RegressionModel& m, double mu, double u_min, double u_max, double rho_y = 1.0,
                              double rho_u = 1.0, SolverConfig solver = {}) {
    NicSettings s;
    s.mu = mu;
    s.rho_y = rho_y;
    s.rho_u = rho_u;
    s.u_min = u_min;
    s.u_max = u_max;
    s.solver = solver;
    return NicController(m, s);
}

// Plant (a) trajectory from zero state under a random input, used as a
// reference the exact model can follow. Returns r_1..r_{len}.
inline Signal feasible_reference(std::size_t len, double amplitude, std::uint64_t seed) {
    const auto u = uniform_sequence(len - 1, amplitude, seed);
    const auto run = simulate_open_loop(linear_plant(), Signal(u, 1), Signal(), {0.0});
    std::vector<double> r{0.0};
    for (TimeIndex t = 2; t <= static_cast<TimeIndex>(len); ++t) r.push_back(run.y.at(t));
    return Signal(std::move(r), 1);
}

} // namespace d2ibc::testing
