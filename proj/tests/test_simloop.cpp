#include <chrono>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace d2ibc;
using d2ibc::testing::Gen;

TEST(Plants, Catalog) {
    const auto a = plant_by_name("a");
    const auto b = plant_by_name("quadratic");
    const auto c = plant_by_name("rational");
    EXPECT_EQ(a.n, 1);
    EXPECT_EQ(b.n, 2);
    EXPECT_EQ(c.n, 1);
    const std::vector<double> y{2.0, 1.0}, u{0.5, 0.0};
    EXPECT_DOUBLE_EQ(a.g0(std::span(y).first(1), std::span(u).first(1)), 1.5);
    EXPECT_DOUBLE_EQ(b.g0(y, u), 0.8 * 2 - 0.2 * 1 + 0.5 + 0.3 * 0.25);
    EXPECT_DOUBLE_EQ(c.g0(std::span(y).first(1), std::span(u).first(1)), 2.0 / 5.0 + 0.5);
    EXPECT_THROW(plant_by_name("d"), ConfigError);
}

TEST(OpenLoop, Examples) {
    const auto p = linear_plant();
    const auto zero = simulate_open_loop(p, Signal(std::vector<double>(10, 0.0), 1), Signal(), {0.0});
    for (double v : zero.y.samples()) EXPECT_EQ(v, 0.0);

    const auto run = simulate_open_loop(p, Signal({1.0, 0.0, 0.0}, 0), Signal(), {0.0});
    EXPECT_EQ(run.y.start(), 1);
    EXPECT_EQ(run.y.samples()[0], 1.0);
    EXPECT_EQ(run.y.samples()[1], 0.5);
    EXPECT_EQ(run.y.samples()[2], 0.25);
}

TEST(OpenLoop, ClipsIntoInputSet) {
    const auto run = simulate_open_loop(linear_plant(), Signal({9.0, -9.0}, 1), Signal(), {});
    EXPECT_EQ(run.clip_count, 2u);
    EXPECT_EQ(run.u_applied.at(1), 5.0);
    EXPECT_EQ(run.u_applied.at(2), -5.0);
}

TEST(OpenLoop, BlowUpGuard) {
    Plant p = linear_plant();
    p.g0 = [](std::span<const double> y, std::span<const double> u) { return 2.0 * y[0] + u[0]; };
    EXPECT_THROW(simulate_open_loop(p, Signal(std::vector<double>(100, 1.0), 1), Signal(), {}), InstabilityError);
}

TEST(OpenLoop, NoiseMustCoverHorizon) {
    EXPECT_THROW(simulate_open_loop(linear_plant(), Signal({1, 2, 3}, 1), Signal({1.0}, 1), {}), RangeError);
}

TEST(GenerateRecord, IndexConvention) {
    const auto rec = generate_record(linear_plant(), {1.0, 0.0, 0.0}, {}, {2.0});
    EXPECT_EQ(rec.first(), -2);
    EXPECT_EQ(rec.y().at(-2), 2.0);
    EXPECT_EQ(rec.y().at(-1), 2.0);   // 0.5*2 + 1
    EXPECT_EQ(rec.y().at(0), 1.0);
}

TEST(ClosedLoop, OriginIsFixedPoint) {
    const auto m = d2ibc::testing::exact_linear_model();
    RunConfig cfg;
    cfg.horizon = 50;
    cfg.reference = Signal(std::vector<double>(51, 0.0), 1);
    const auto tr = simulate_closed_loop(linear_plant(), d2ibc::testing::make_nic(m, 0.0, -5, 5),
                                         PidController({0.3, 0.1}), cfg);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(tr.y[k], 0.0);
        EXPECT_EQ(tr.u[k], 0.0);
    }
}

TEST(ClosedLoop, ExactInversionTracksFeasibleReference) {
    const auto m = d2ibc::testing::exact_linear_model();
    RunConfig cfg;
    cfg.horizon = 1000;
    cfg.reference = d2ibc::testing::feasible_reference(1001, 1.0, 99);
    const auto start = std::chrono::steady_clock::now();
    const auto tr =
        simulate_closed_loop(linear_plant(), d2ibc::testing::make_nic(m, 0.0, -5, 5), PidController({0.0}), cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t k = 1; k < tr.size(); ++k) EXPECT_LT(std::abs(tr.e[k]), 1e-9) << "t=" << k + 1;
    EXPECT_LT(secs, 1.0);
}

TEST(ClosedLoop, TraceIdentityAndSaturation) {
    const auto d = d2ibc::testing::design(quadratic_plant(), {.n_theta = 2});
    RunConfig cfg;
    cfg.horizon = 300;
    cfg.reference = step_reference(301, 3.0, 10);
    cfg.noise = Signal(uniform_sequence(301, 0.05, 4), 1);
    const auto tr = simulate_closed_loop(d.plant, d.nic, d.pid, cfg);
    std::size_t clips = 0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(tr.u_unsaturated[k], tr.u_nl[k] + tr.u_lin[k]);
        EXPECT_EQ(tr.u[k], std::clamp(tr.u_unsaturated[k], d.plant.u_min, d.plant.u_max));
        EXPECT_EQ(tr.e[k], tr.r[k] - tr.y[k]);
        if (tr.u[k] != tr.u_unsaturated[k]) ++clips;
    }
    EXPECT_EQ(clips, tr.saturation_count);
}

TEST(ClosedLoop, ZeroThetaIsNicOnlyLoop) {
    const auto d = d2ibc::testing::design(rational_plant(), {.degree = 3});
    RunConfig cfg;
    cfg.horizon = 200;
    cfg.reference = step_reference(201, 1.0, 5);
    const auto tr = simulate_closed_loop(d.plant, d.nic, PidController({0.0, 0.0}), cfg);

    // NIC alone against the plant, written out directly
    NicController nic = d.nic;
    nic.reset();
    double y = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(tr.y[k], y);
        EXPECT_EQ(tr.u_lin[k], 0.0);
        const double r_next = k + 1 < tr.size() ? tr.r[k + 1] : tr.r[k];
        const double u = d.plant.clamp_input(nic.step(y, r_next));
        nic.record_applied_input(u);
        const std::vector<double> yl{y}, ul{u}, xl{0.0};
        y = d.plant.step(yl, ul, xl);
    }
}

TEST(ClosedLoop, DeterministicTraces) {
    const auto d = d2ibc::testing::design(quadratic_plant(), {});
    RunConfig cfg;
    cfg.horizon = 400;
    cfg.reference = step_reference(401, 1.0, 10);
    cfg.noise = Signal(uniform_sequence(401, 0.02, 8), 1);
    std::ostringstream a, b;
    write_trace(a, simulate_closed_loop(d.plant, d.nic, d.pid, cfg));
    write_trace(b, simulate_closed_loop(d.plant, d.nic, d.pid, cfg));
    EXPECT_EQ(a.str(), b.str());
}

TEST(ClosedLoop, PlantBStepSettles) {
    const auto d = d2ibc::testing::design(quadratic_plant(), {});
    RunConfig cfg;
    cfg.horizon = 500;
    cfg.reference = step_reference(501, 1.0, 10);
    const auto tr = simulate_closed_loop(d.plant, d.nic, d.pid, cfg);
    EXPECT_LT(std::abs(tr.e.back()), 1e-6);
}

TEST(ClosedLoop, ConfigValidation) {
    const auto m = d2ibc::testing::exact_linear_model();
    RunConfig cfg;
    cfg.horizon = 10;
    cfg.reference = Signal(std::vector<double>(5, 0.0), 1);
    EXPECT_THROW(simulate_closed_loop(linear_plant(), d2ibc::testing::make_nic(m, 0, -5, 5), PidController({0.0}), cfg),
                 ConfigError);
}

TEST(Metrics, Examples) {
    Trace zero;
    zero.e.assign(10, 0.0);
    zero.y.assign(10, 0.0);
    const auto m0 = metrics(zero, 3);
    EXPECT_EQ(m0.linf_error, 0.0);
    EXPECT_EQ(m0.rms_error, 0.0);
    EXPECT_EQ(m0.steady_state_error, 0.0);

    Trace t;
    t.e = {1.0, -2.0};
    t.y = {0.0, 0.0};
    const auto m = metrics(t, 1);
    EXPECT_EQ(m.linf_error, 2.0);
    EXPECT_DOUBLE_EQ(m.rms_error, std::sqrt(2.5));
    EXPECT_EQ(m.steady_state_error, 2.0);
    EXPECT_THROW(metrics(t, 2), DomainError);
}
