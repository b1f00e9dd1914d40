#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "signals.hpp"

namespace d2ibc {

// A monomial over z = (q_0, ..., q_{2n-2}, u_t). exponents.back() is the
// power of the current input u_t.
struct Feature {
    std::vector<int> exponents;

    int total_degree() const {
        int d = 0;
        for (int e : exponents) d += e;
        return d;
    }
    int u_degree() const { return exponents.empty() ? 0 : exponents.back(); }

    double evaluate(std::span<const double> q, double u) const {
        double v = 1.0;
        const std::size_t nq = exponents.size() - 1;
        for (std::size_t k = 0; k < nq; ++k) {
            for (int p = 0; p < exponents[k]; ++p) v *= q[k];
        }
        for (int p = 0; p < exponents.back(); ++p) v *= u;
        return v;
    }

    // Same monomial with the u_t factor removed.
    double evaluate_without_u(std::span<const double> q) const {
        double v = 1.0;
        for (std::size_t k = 0; k + 1 < exponents.size(); ++k) {
            for (int p = 0; p < exponents[k]; ++p) v *= q[k];
        }
        return v;
    }

    std::string name(int n) const {
        std::string out;
        auto factor = [&](const std::string& var, int power) {
            if (power == 0) return;
            if (!out.empty()) out += '*';
            out += var;
            if (power > 1) out += '^' + std::to_string(power);
        };
        for (int k = 0; k < n; ++k) {
            factor(k == 0 ? "y[t]" : "y[t-" + std::to_string(k) + "]", exponents[static_cast<std::size_t>(k)]);
        }
        for (int j = 0; j < n - 1; ++j) {
            factor("u[t-" + std::to_string(j + 1) + "]", exponents[static_cast<std::size_t>(n + j)]);
        }
        factor("u[t]", exponents.back());
        return out.empty() ? "1" : out;
    }

    friend bool operator==(const Feature&, const Feature&) = default;

    static Feature constant(int n) { return Feature{std::vector<int>(static_cast<std::size_t>(2 * n), 0)}; }
    static Feature output_lag(int n, int lag) {
        auto f = constant(n);
        f.exponents[static_cast<std::size_t>(lag)] = 1;
        return f;
    }
    static Feature input_lag(int n, int lag) {
        auto f = constant(n);
        f.exponents[static_cast<std::size_t>(n + lag - 1)] = 1;
        return f;
    }
    static Feature input(int n, int power = 1) {
        auto f = constant(n);
        f.exponents.back() = power;
        return f;
    }
};

// Graded enumeration of all monomials in 2n variables up to `degree`,
// constant first. With affine_in_u, monomials with u_t^2 or higher are dropped.
inline std::vector<Feature> polynomial_basis(int n, int degree, bool affine_in_u) {
    if (n < 1) throw DomainError("model order must be >= 1");
    if (degree < 1) throw DomainError("polynomial degree must be >= 1");
    const std::size_t vars = static_cast<std::size_t>(2 * n);
    std::vector<Feature> basis;
    for (int d = 0; d <= degree; ++d) {
        // exponent vectors of total degree d in lexicographic (descending) order
        std::vector<int> e(vars, 0);
        auto emit = [&](auto&& self, std::size_t pos, int remaining) -> void {
            if (pos + 1 == vars) {
                e[pos] = remaining;
                if (!affine_in_u || e.back() <= 1) basis.push_back(Feature{e});
                return;
            }
            for (int k = remaining; k >= 0; --k) {
                e[pos] = k;
                self(self, pos + 1, remaining - k);
            }
            e[pos] = 0;
        };
        emit(emit, 0, d);
    }
    return basis;
}

struct IdConfig {
    int n = 1;
    int degree = 1;
    double ridge = 0.0;
    bool affine_in_u = true;

    void validate() const {
        if (n < 1) throw ConfigError("identification order n must be >= 1");
        if (degree < 1) throw ConfigError("identification degree must be >= 1");
        if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("ridge weight must be finite and >= 0");
    }

    friend bool operator==(const IdConfig&, const IdConfig&) = default;
};

// One-step predictor y_{t+1} = f(q_t, u_t) = sum_k c_k * feature_k(q_t, u_t).
class RegressionModel {
public:
    RegressionModel(int n, int degree, std::vector<Feature> features, std::vector<double> coefficients)
        : n_(n), degree_(degree), features_(std::move(features)), coefficients_(std::move(coefficients)) {
        if (n_ < 1) throw DomainError("model order must be >= 1");
        if (features_.size() != coefficients_.size()) {
            throw ShapeError("coefficient count " + std::to_string(coefficients_.size()) +
                             " differs from basis count " + std::to_string(features_.size()));
        }
        affine_in_u_ = true;
        for (const auto& f : features_) {
            if (f.exponents.size() != static_cast<std::size_t>(2 * n_)) {
                throw ShapeError("feature width does not match model order");
            }
            if (f.u_degree() >= 2) affine_in_u_ = false;
        }
        for (double c : coefficients_) {
            if (!std::isfinite(c)) throw ValidationError("non-finite model coefficient");
        }
    }

    // f(q, u) = c + sum_k a_k y_{t-k} + sum_j d_j u_{t-j} + b u_t
    static RegressionModel affine(int n, double constant, const std::vector<double>& output_coeffs,
                                  const std::vector<double>& past_input_coeffs, double input_coeff) {
        if (output_coeffs.size() > static_cast<std::size_t>(n) ||
            past_input_coeffs.size() > static_cast<std::size_t>(n - 1)) {
            throw ShapeError("too many lag coefficients for order " + std::to_string(n));
        }
        std::vector<Feature> features{Feature::constant(n)};
        std::vector<double> coeffs{constant};
        for (std::size_t k = 0; k < output_coeffs.size(); ++k) {
            features.push_back(Feature::output_lag(n, static_cast<int>(k)));
            coeffs.push_back(output_coeffs[k]);
        }
        for (std::size_t j = 0; j < past_input_coeffs.size(); ++j) {
            features.push_back(Feature::input_lag(n, static_cast<int>(j) + 1));
            coeffs.push_back(past_input_coeffs[j]);
        }
        features.push_back(Feature::input(n));
        coeffs.push_back(input_coeff);
        return RegressionModel(n, 1, std::move(features), std::move(coeffs));
    }

    int order() const noexcept { return n_; }
    int degree() const noexcept { return degree_; }
    bool affine_in_u() const noexcept { return affine_in_u_; }
    const std::vector<Feature>& features() const noexcept { return features_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

    friend bool operator==(const RegressionModel&, const RegressionModel&) = default;

private:
    int n_;
    int degree_;
    bool affine_in_u_ = true;
    std::vector<Feature> features_;
    std::vector<double> coefficients_;
};

namespace detail {

inline void check_regressor(const RegressionModel& model, const Regressor& q) {
    if (q.size() != Regressor::length_for(model.order())) {
        throw ShapeError("regressor length " + std::to_string(q.size()) + " does not match model order " +
                         std::to_string(model.order()) + " (expected " +
                         std::to_string(Regressor::length_for(model.order())) + ")");
    }
}

} // namespace detail

inline double predict(const RegressionModel& model, const Regressor& q, double u) {
    detail::check_regressor(model, q);
    const auto& features = model.features();
    const auto& coeffs = model.coefficients();
    double y = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) y += coeffs[k] * features[k].evaluate(q.entries, u);
    return y;
}

// (a, b) with predict(model, q, u) == a + b*u for every u.
inline std::pair<double, double> affine_decompose(const RegressionModel& model, const Regressor& q) {
    if (!model.affine_in_u()) throw ContractError("affine_decompose called on a model that is not affine in u");
    detail::check_regressor(model, q);
    double a = 0.0;
    double b = 0.0;
    const auto& features = model.features();
    const auto& coeffs = model.coefficients();
    for (std::size_t k = 0; k < features.size(); ++k) {
        const double v = coeffs[k] * features[k].evaluate_without_u(q.entries);
        (features[k].u_degree() == 0 ? a : b) += v;
    }
    return {a, b};
}

// Ridge least squares over the polynomial basis:
//   min_c  sum_t (y_{t+1} - f(q_t, u_t))^2 + ridge * ||c||_2^2
// Columns are rescaled to unit RMS before the QR solve; the penalty is
// rescaled with them so the minimizer is the one of the unscaled problem.
inline RegressionModel identify(const DataRecord& record, const IdConfig& cfg) {
    cfg.validate();
    const int n = cfg.n;
    const auto L = static_cast<TimeIndex>(record.length());
    if (L < n + 1) {
        throw DataError("record of length " + std::to_string(L) + " too short for order " + std::to_string(n));
    }
    auto basis = polynomial_basis(n, cfg.degree, cfg.affine_in_u);
    const auto k = static_cast<Eigen::Index>(basis.size());
    const TimeIndex t_first = record.first() + n - 1;
    const TimeIndex t_last = -1;
    const auto m = static_cast<Eigen::Index>(t_last - t_first + 1);
    if (cfg.ridge == 0.0 && m < k) {
        throw DataError("only " + std::to_string(m) + " usable rows for " + std::to_string(k) + " basis features");
    }

    Eigen::MatrixXd X(m, k);
    Eigen::VectorXd target(m);
    for (TimeIndex t = t_first; t <= t_last; ++t) {
        const auto row = static_cast<Eigen::Index>(t - t_first);
        const auto q = build_regressor(record.y(), record.u(), t, n);
        const double u = record.u().at(t);
        for (Eigen::Index j = 0; j < k; ++j) X(row, j) = basis[static_cast<std::size_t>(j)].evaluate(q.entries, u);
        target(row) = record.y().at(t + 1);
    }

    Eigen::VectorXd scale(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double rms = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(m));
        scale(j) = rms > 0.0 ? rms : 1.0;
        X.col(j) /= scale(j);
    }

    Eigen::VectorXd beta;
    if (cfg.ridge > 0.0) {
        Eigen::MatrixXd A(m + k, k);
        A.topRows(m) = X;
        A.bottomRows(k).setZero();
        const double s = std::sqrt(cfg.ridge);
        for (Eigen::Index j = 0; j < k; ++j) A(m + j, j) = s / scale(j);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + k);
        rhs.head(m) = target;
        beta = A.colPivHouseholderQr().solve(rhs);
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        qr.setThreshold(1e-12);
        if (qr.rank() < k) {
            const auto deficient = static_cast<std::size_t>(k - qr.rank());
            throw ConditioningError("regression matrix is rank deficient: " + std::to_string(deficient) + " of " +
                                        std::to_string(k) + " features are not identifiable (use ridge > 0)",
                                    deficient);
        }
        beta = qr.solve(target);
    }

    std::vector<double> coeffs(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) coeffs[static_cast<std::size_t>(j)] = beta(j) / scale(j);
    return RegressionModel(n, cfg.degree, std::move(basis), std::move(coeffs));
}

// y_{t+1} - f(q_t, u_t) over every row with full history.
inline std::vector<double> one_step_residuals(const RegressionModel& model, const DataRecord& record) {
    const int n = model.order();
    std::vector<double> out;
    for (TimeIndex t = record.first() + n - 1; t <= -1; ++t) {
        const auto q = build_regressor(record.y(), record.u(), t, n);
        out.push_back(record.y().at(t + 1) - predict(model, q, record.u().at(t)));
    }
    return out;
}

// Looks up the coefficient of a feature; 0 when absent from the basis.
inline double coefficient_of(const RegressionModel& model, const Feature& feature) {
    const auto& features = model.features();
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k] == feature) return model.coefficients()[k];
    }
    return 0.0;
}

} // namespace d2ibc
