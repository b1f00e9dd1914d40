#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "support.hpp"

using namespace d2ibc;
using d2ibc::testing::Gen;

namespace {

// Plain least squares on hand-built columns, independent of the basis code.
Eigen::VectorXd lsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return X.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
}

DataRecord simulate(const std::function<double(double, double)>& g, std::size_t len, std::uint64_t seed) {
    const auto u = uniform_sequence(len, 1.0, seed);
    std::vector<double> y(len, 0.0);
    for (std::size_t k = 0; k + 1 < len; ++k) y[k + 1] = g(y[k], u[k]);
    return DataRecord(u, y);
}

} // namespace

TEST(Identify, LinearPlantCoefficients) {
    const auto rec = simulate([](double y, double u) { return 0.5 * y + u; }, 200, 5);
    IdConfig cfg;
    const auto m = identify(rec, cfg);

    Eigen::MatrixXd X(199, 3);
    Eigen::VectorXd t(199);
    for (int k = 0; k < 199; ++k) {
        X.row(k) << 1.0, rec.y().samples()[static_cast<std::size_t>(k)], rec.u().samples()[static_cast<std::size_t>(k)];
        t(k) = rec.y().samples()[static_cast<std::size_t>(k) + 1];
    }
    const auto oracle = lsq(X, t);
    EXPECT_NEAR(oracle(0), 0.0, 1e-8);
    EXPECT_NEAR(oracle(1), 0.5, 1e-8);
    EXPECT_NEAR(oracle(2), 1.0, 1e-8);

    EXPECT_NEAR(coefficient_of(m, Feature::constant(1)), oracle(0), 1e-8);
    EXPECT_NEAR(coefficient_of(m, Feature::output_lag(1, 0)), oracle(1), 1e-8);
    EXPECT_NEAR(coefficient_of(m, Feature::input(1)), oracle(2), 1e-8);
    EXPECT_TRUE(m.affine_in_u());
}

TEST(Identify, ZeroRecordWithRidgeGivesZeroModel) {
    const DataRecord rec(std::vector<double>(50, 0.0), std::vector<double>(50, 0.0));
    IdConfig cfg;
    cfg.degree = 2;
    cfg.ridge = 1e-3;
    const auto m = identify(rec, cfg);
    for (double c : m.coefficients()) EXPECT_EQ(c, 0.0);
}

TEST(Identify, ZeroRecordWithoutRidgeIsConditioningError) {
    const DataRecord rec(std::vector<double>(50, 0.0), std::vector<double>(50, 0.0));
    EXPECT_THROW(identify(rec, IdConfig{}), ConditioningError);
}

TEST(Identify, QuadraticInputCoefficient) {
    const auto rec = simulate([](double y, double u) { return 0.8 * y + u + 0.3 * u * u; }, 200, 6);
    IdConfig cfg;
    cfg.degree = 2;
    cfg.affine_in_u = false;
    const auto m = identify(rec, cfg);

    // oracle over the full degree-2 monomial set in (y_t, u_t)
    Eigen::MatrixXd X(199, 6);
    Eigen::VectorXd t(199);
    for (int k = 0; k < 199; ++k) {
        const double y = rec.y().samples()[static_cast<std::size_t>(k)];
        const double u = rec.u().samples()[static_cast<std::size_t>(k)];
        X.row(k) << 1, y, u, y * y, y * u, u * u;
        t(k) = rec.y().samples()[static_cast<std::size_t>(k) + 1];
    }
    const auto oracle = lsq(X, t);
    EXPECT_NEAR(oracle(5), 0.3, 1e-6);
    EXPECT_NEAR(coefficient_of(m, Feature::input(1, 2)), 0.3, 1e-6);
    EXPECT_FALSE(m.affine_in_u());

    // predict at q=(1), u=2: 0.8 + 2 + 1.2
    Regressor q;
    q.entries = {1.0};
    EXPECT_NEAR(predict(m, q, 2.0), 4.0, 1e-5);
}

TEST(Identify, InterpolatesNoiseFreePlantB) {
    const auto plant = quadratic_plant();
    const auto rec = generate_record(plant, uniform_sequence(300, 1.0, 21), {}, {});
    IdConfig cfg;
    cfg.n = 2;
    cfg.degree = 2;
    cfg.affine_in_u = false;
    const auto m = identify(rec, cfg);
    EXPECT_LT(lp_norm(one_step_residuals(m, rec), kInfNorm), 1e-8);
}

TEST(Identify, ShortRecordIsDataError) {
    const DataRecord rec({1, 2}, {1, 2});
    IdConfig cfg;
    cfg.n = 2;
    EXPECT_THROW(identify(rec, cfg), DataError);
}

TEST(Identify, RidgeMonotonicityProperty) {
    const auto rec = generate_record(rational_plant(), uniform_sequence(150, 1.0, 31),
                                     uniform_sequence(150, 0.05, 32), {});
    IdConfig cfg;
    cfg.degree = 3;
    double prev = INFINITY;
    for (double ridge : {0.0, 1e-6, 1e-4, 1e-2, 1.0, 10.0, 1e3}) {
        cfg.ridge = ridge;
        const double norm = lp_norm(identify(rec, cfg).coefficients(), 2);
        EXPECT_LE(norm, prev * (1 + 1e-10)) << "ridge " << ridge;
        prev = norm;
    }
}

TEST(Predict, Examples) {
    Regressor q;
    q.entries = {2.0};
    const auto m = RegressionModel::affine(1, 0.0, {0.5}, {}, 1.0);
    EXPECT_DOUBLE_EQ(predict(m, q, 3.0), 4.0);
    const auto zero = RegressionModel::affine(1, 0.0, {0.0}, {}, 0.0);
    EXPECT_EQ(predict(zero, q, 3.0), 0.0);
    Regressor bad;
    bad.entries = {1.0, 2.0};
    EXPECT_THROW(predict(m, bad, 0.0), ShapeError);
}

TEST(Predict, LinearInCoefficientsProperty) {
    Gen g(7);
    const auto basis = polynomial_basis(2, 3, false);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c1 = g.vector(basis.size(), -1, 1);
        const auto c2 = g.vector(basis.size(), -1, 1);
        const double a = g.uniform(-2, 2);
        std::vector<double> mix(basis.size());
        for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = a * c1[k] + c2[k];
        Regressor q;
        q.entries = g.vector(3, -2, 2);
        const double u = g.uniform(-2, 2);
        const double lhs = predict(RegressionModel(2, 3, basis, mix), q, u);
        const double rhs = a * predict(RegressionModel(2, 3, basis, c1), q, u) + predict(RegressionModel(2, 3, basis, c2), q, u);
        EXPECT_NEAR(lhs, rhs, 1e-10);
    }
}

TEST(AffineDecompose, Examples) {
    Regressor q;
    q.entries = {3.0};
    const auto [a, b] = affine_decompose(RegressionModel::affine(1, 0.1, {0.5}, {}, 2.0), q);
    EXPECT_NEAR(a, 1.6, 1e-15);
    EXPECT_EQ(b, 2.0);

    const auto [a2, b2] = affine_decompose(RegressionModel::affine(1, 0.0, {}, {}, 1.0), q);
    EXPECT_EQ(a2, 0.0);
    EXPECT_EQ(b2, 1.0);
}

TEST(AffineDecompose, NonAffineModelIsContractError) {
    const auto basis = polynomial_basis(1, 2, false);
    const RegressionModel m(1, 2, basis, std::vector<double>(basis.size(), 1.0));
    Regressor q;
    q.entries = {1.0};
    EXPECT_THROW(affine_decompose(m, q), ContractError);
}

TEST(AffineDecompose, MatchesPredictProperty) {
    Gen g(8);
    const auto basis = polynomial_basis(2, 3, true);
    for (int trial = 0; trial < 50; ++trial) {
        const RegressionModel m(2, 3, basis, g.vector(basis.size(), -1, 1));
        Regressor q;
        q.entries = g.vector(3, -2, 2);
        const double u = g.uniform(-3, 3);
        const auto [a, b] = affine_decompose(m, q);
        EXPECT_NEAR(a + b * u, predict(m, q, u), 1e-10);
    }
}

TEST(Basis, AffineBasisExcludesHigherInputPowers) {
    for (const auto& f : polynomial_basis(2, 3, true)) EXPECT_LE(f.u_degree(), 1);
    bool has_u2 = false;
    for (const auto& f : polynomial_basis(2, 3, false)) has_u2 = has_u2 || f.u_degree() >= 2;
    EXPECT_TRUE(has_u2);
    EXPECT_EQ(polynomial_basis(1, 1, true).size(), 3u);
}
