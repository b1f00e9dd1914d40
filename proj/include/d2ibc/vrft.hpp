#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "nic.hpp"
#include "signals.hpp"

namespace d2ibc {

// Roots in z of c_0 z^k + c_1 z^{k-1} + ... + c_k (coefficients of z^0..z^-k).
inline std::vector<std::complex<double>> polynomial_roots(std::vector<double> c) {
    while (!c.empty() && c.front() == 0.0) c.erase(c.begin());
    if (c.empty()) throw DomainError("zero polynomial has no well-defined roots");
    std::vector<std::complex<double>> roots;
    while (c.size() > 1 && c.back() == 0.0) {
        c.pop_back();
        roots.emplace_back(0.0, 0.0);
    }
    const auto k = static_cast<Eigen::Index>(c.size()) - 1;
    if (k == 0) return roots;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) companion(0, j) = -c[static_cast<std::size_t>(j + 1)] / c[0];
    for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (Eigen::Index i = 0; i < k; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

inline double max_root_modulus(const std::vector<double>& c) {
    double m = 0.0;
    for (const auto& r : polynomial_roots(c)) m = std::max(m, std::abs(r));
    return m;
}

// Desired closed-loop behaviour M(z^-1) = num(z^-1) / den(z^-1), coefficients
// ordered by increasing delay. Must be stable, minimum phase, strictly proper
// and have unit static gain.
class ReferenceModel {
public:
    ReferenceModel(std::vector<double> num, std::vector<double> den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.empty() || den_.front() == 0.0) throw DomainError("reference model denominator needs den[0] != 0");
        relative_degree_ = 0;
        while (relative_degree_ < num_.size() && num_[relative_degree_] == 0.0) ++relative_degree_;
        if (relative_degree_ == num_.size()) throw DomainError("reference model numerator is identically zero");
        if (relative_degree_ < 1) throw DomainError("reference model must be strictly proper (relative degree >= 1)");
        for (double v : num_) {
            if (!std::isfinite(v)) throw DomainError("non-finite reference model coefficient");
        }
        for (double v : den_) {
            if (!std::isfinite(v)) throw DomainError("non-finite reference model coefficient");
        }
        if (max_root_modulus(den_) >= 1.0) throw DomainError("reference model is not asymptotically stable");
        if (max_root_modulus(std::vector<double>(num_.begin() + static_cast<std::ptrdiff_t>(relative_degree_),
                                                 num_.end())) >= 1.0) {
            throw DomainError("reference model is not invertible: numerator root on or outside the unit circle");
        }
        double sn = 0.0;
        double sd = 0.0;
        for (double v : num_) sn += v;
        for (double v : den_) sd += v;
        if (std::abs(sn / sd - 1.0) > 1e-10) throw DomainError("reference model static gain must be 1");
    }

    // y_{t+1} = (1 - lambda) r_t + lambda y_t
    static ReferenceModel first_order(double lambda) {
        if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("first-order reference pole must lie in [0, 1)");
        return ReferenceModel({0.0, 1.0 - lambda}, {1.0, -lambda});
    }

    const std::vector<double>& num() const noexcept { return num_; }
    const std::vector<double>& den() const noexcept { return den_; }
    std::size_t relative_degree() const noexcept { return relative_degree_; }

    friend bool operator==(const ReferenceModel&, const ReferenceModel&) = default;

private:
    std::vector<double> num_;
    std::vector<double> den_;
    std::size_t relative_degree_ = 1;
};

// r^v over the index range of y. Samples outside [valid_begin, valid_end]
// depend on unknown initial conditions or on data past the record end.
struct VirtualReference {
    Signal r;
    TimeIndex valid_begin;
    TimeIndex valid_end;

    Signal valid() const { return r.slice(valid_begin, valid_end); }
};

// Runs M^-1 offline: solving den(z^-1) y = num(z^-1) r for r_s needs y up to
// s + relative_degree. Values before the start of y are taken as zero.
inline VirtualReference virtual_reference(const ReferenceModel& M, const Signal& y) {
    const auto d = static_cast<TimeIndex>(M.relative_degree());
    const auto warmup = static_cast<TimeIndex>(std::max(M.num().size(), M.den().size()));
    const auto len = static_cast<TimeIndex>(y.size());
    if (len <= d + warmup) {
        throw DataError("signal of length " + std::to_string(len) + " too short for the reference model (needs > " +
                        std::to_string(d + warmup) + ")");
    }
    const std::vector<double> lead(M.num().begin() + d, M.num().end());
    const auto& den = M.den();
    auto y_at = [&](TimeIndex k) { return k < 0 ? 0.0 : y.samples()[static_cast<std::size_t>(k)]; };

    std::vector<double> r(static_cast<std::size_t>(len), 0.0);
    for (TimeIndex s = 0; s + d < len; ++s) {
        double acc = 0.0;
        for (std::size_t j = 0; j < den.size(); ++j) acc += den[j] * y_at(s + d - static_cast<TimeIndex>(j));
        for (std::size_t k = 1; k < lead.size(); ++k) {
            const TimeIndex idx = s - static_cast<TimeIndex>(k);
            if (idx >= 0) acc -= lead[k] * r[static_cast<std::size_t>(idx)];
        }
        r[static_cast<std::size_t>(s)] = acc / lead.front();
    }
    return {Signal(std::move(r), y.start()), y.start() + warmup, y.last() - d};
}

// Replays K^nl over the record: u^nl_t = argmin J with target r^v_{t+1} and
// q_t built from the recorded outputs and applied inputs. The controller is
// not modified.
inline Signal filter_through_nic(const NicController& ctrl, const VirtualReference& rv, const DataRecord& record) {
    if (rv.r.start() != record.y().start() || rv.r.size() != record.length()) {
        throw RangeError("virtual reference is not aligned with the record");
    }
    const int n = ctrl.model().order();
    const TimeIndex first = std::max(rv.valid_begin, record.first() + n - 1);
    const TimeIndex last = rv.valid_end - 1;
    if (first > last) throw RangeError("no sample has both a full regressor and a valid virtual reference");
    std::vector<double> u_nl;
    u_nl.reserve(static_cast<std::size_t>(last - first + 1));
    for (TimeIndex t = first; t <= last; ++t) {
        const auto q = build_regressor(record.y(), record.u(), t, n);
        u_nl.push_back(ctrl.solve(q, rv.r.at(t + 1)).u);
    }
    return Signal(std::move(u_nl), first);
}

// u^lin_t = u^lin_{t-1} + sum_{i=0}^{n_theta} theta_i e_{t-i}, zero initial state.
class PidController {
public:
    explicit PidController(std::vector<double> theta) : theta_(std::move(theta)) {
        if (theta_.empty()) throw DomainError("PID parameter vector must have at least one entry");
        for (double v : theta_) {
            if (!std::isfinite(v)) throw DomainError("non-finite PID parameter");
        }
        reset();
    }

    const std::vector<double>& theta() const noexcept { return theta_; }
    std::size_t order() const noexcept { return theta_.size() - 1; }
    double output() const noexcept { return u_prev_; }

    void reset() {
        u_prev_ = 0.0;
        errors_.assign(theta_.size() - 1, 0.0);
    }

    double step(double e) {
        if (!std::isfinite(e)) throw DomainError("non-finite tracking error fed to PID");
        double du = theta_.front() * e;
        for (std::size_t i = 1; i < theta_.size(); ++i) du += theta_[i] * errors_[i - 1];
        if (!errors_.empty()) {
            errors_.push_front(e);
            errors_.pop_back();
        }
        u_prev_ += du;
        return u_prev_;
    }

private:
    std::vector<double> theta_;
    std::deque<double> errors_;
    double u_prev_ = 0.0;
};

struct VrftResult {
    std::vector<double> theta;
    double residual = 0.0;
    std::size_t samples_used = 0;
};

// Least-squares fit of theta: the PID output is linear in theta,
//   u^lin_t = sum_i theta_i * c_{i,t},  c_{i,t} = sum_{tau <= t} e_{tau - i},
// with errors before the window start taken as zero.
inline VrftResult fit_pid(const Signal& delta_u, const Signal& e_v, std::size_t n_theta) {
    if (delta_u.start() != e_v.start() || delta_u.size() != e_v.size()) {
        throw RangeError("delta_u and virtual error windows are not aligned");
    }
    const auto m = static_cast<Eigen::Index>(delta_u.size());
    const auto k = static_cast<Eigen::Index>(n_theta + 1);
    if (m <= k) {
        throw DataError("fit window of " + std::to_string(m) + " samples too short for n_theta = " +
                        std::to_string(n_theta));
    }
    const auto e = e_v.samples();
    Eigen::MatrixXd C(m, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        double running = 0.0;
        for (Eigen::Index t = 0; t < m; ++t) {
            if (t - i >= 0) running += e[static_cast<std::size_t>(t - i)];
            C(t, i) = running;
        }
    }
    Eigen::VectorXd target(m);
    for (Eigen::Index t = 0; t < m; ++t) target(t) = delta_u.samples()[static_cast<std::size_t>(t)];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C);
    qr.setThreshold(1e-12);
    if (qr.rank() < k) {
        throw ConditioningError("virtual-error regressor matrix has rank " + std::to_string(qr.rank()) + " < " +
                                    std::to_string(k),
                                static_cast<std::size_t>(k - qr.rank()));
    }
    const Eigen::VectorXd theta = qr.solve(target);
    VrftResult out;
    out.theta.assign(theta.data(), theta.data() + theta.size());
    out.residual = (target - C * theta).squaredNorm();
    out.samples_used = static_cast<std::size_t>(m);
    return out;
}

// Full virtual-reference design from a record: r^v, NIC replay, then the fit.
inline VrftResult design_pid(const NicController& nic, const ReferenceModel& M, const DataRecord& record,
                             std::size_t n_theta) {
    const auto rv = virtual_reference(M, record.y());
    const Signal u_nl = filter_through_nic(nic, rv, record);
    std::vector<double> du;
    std::vector<double> ev;
    du.reserve(u_nl.size());
    ev.reserve(u_nl.size());
    for (TimeIndex t = u_nl.start(); t <= u_nl.last(); ++t) {
        du.push_back(record.u().at(t) - u_nl.at(t));
        ev.push_back(rv.r.at(t) - record.y().at(t));
    }
    return fit_pid(Signal(std::move(du), u_nl.start()), Signal(std::move(ev), u_nl.start()), n_theta);
}

} // namespace d2ibc
