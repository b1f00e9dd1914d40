#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace d2ibc {

using TimeIndex = std::int64_t;

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

// A finite scalar sequence on a signed time axis. Data records live on
// 1-L..0, closed-loop runs on 1..T.
class Signal {
public:
    Signal() = default;

    explicit Signal(std::vector<double> samples, TimeIndex start = 1)
        : samples_(std::move(samples)), start_(start) {
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            if (!std::isfinite(samples_[k])) {
                throw ValidationError("non-finite sample at t = " +
                                      std::to_string(start_ + static_cast<TimeIndex>(k)));
            }
        }
    }

    TimeIndex start() const noexcept { return start_; }
    // Last valid index (inclusive). Equals start() - 1 for an empty signal.
    TimeIndex last() const noexcept { return start_ + static_cast<TimeIndex>(samples_.size()) - 1; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    bool contains(TimeIndex t) const noexcept { return t >= start_ && t <= last(); }

    double at(TimeIndex t) const {
        if (!contains(t)) {
            throw RangeError("time index " + std::to_string(t) + " outside [" + std::to_string(start_) +
                             ", " + std::to_string(last()) + "]");
        }
        return samples_[static_cast<std::size_t>(t - start_)];
    }

    std::span<const double> samples() const noexcept { return samples_; }

    // Inclusive sub-window [from, to].
    Signal slice(TimeIndex from, TimeIndex to) const {
        if (from > to + 1 || (from <= to && (!contains(from) || !contains(to)))) {
            throw RangeError("slice [" + std::to_string(from) + ", " + std::to_string(to) +
                             "] outside signal");
        }
        auto first = samples_.begin() + (from - start_);
        return Signal(std::vector<double>(first, first + (to - from + 1)), from);
    }

    friend bool operator==(const Signal&, const Signal&) = default;

private:
    std::vector<double> samples_;
    TimeIndex start_ = 1;
};

namespace detail {

inline void check_norm_order(double p) {
    if (std::isnan(p) || p < 1.0) {
        throw DomainError("lp norm order must satisfy p >= 1");
    }
}

} // namespace detail

// ||x||_p of a vector; p = kInfNorm gives max |x_i|.
inline double lp_norm(std::span<const double> x, double p) {
    detail::check_norm_order(p);
    if (x.empty()) {
        throw DomainError("lp norm of an empty vector");
    }
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return s;
    }
    if (p == 2.0) {
        // scaled to avoid overflow on large entries
        double scale = 0.0;
        for (double v : x) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) return 0.0;
        double s = 0.0;
        for (double v : x) {
            const double r = v / scale;
            s += r * r;
        }
        return scale * std::sqrt(s);
    }
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v) / scale, p);
    return scale * std::pow(s, 1.0 / p);
}

inline double lp_norm(const std::vector<double>& x, double p) {
    return lp_norm(std::span<const double>(x), p);
}

inline double lp_norm(const Signal& x, double p) { return lp_norm(x.samples(), p); }

// Norm of a vector-valued signal: sums (or maxes) over component and time.
inline double lp_norm(std::span<const std::vector<double>> x, double p) {
    detail::check_norm_order(p);
    if (x.empty() || x.front().empty()) {
        throw DomainError("lp norm of an empty signal");
    }
    const std::size_t width = x.front().size();
    std::vector<double> flat;
    flat.reserve(width * x.size());
    for (const auto& sample : x) {
        if (sample.size() != width) {
            throw ShapeError("vector signal samples have non-uniform width");
        }
        for (double v : sample) {
            if (!std::isfinite(v)) throw ValidationError("non-finite signal sample");
            flat.push_back(v);
        }
    }
    return lp_norm(std::span<const double>(flat), p);
}

// q_t = (y_t, ..., y_{t-n+1}, u_{t-1}, ..., u_{t-n+1}); length 2n-1.
struct Regressor {
    std::vector<double> entries;
    int n = 1;

    std::size_t size() const noexcept { return entries.size(); }
    double operator[](std::size_t k) const { return entries[k]; }

    static std::size_t length_for(int order) { return static_cast<std::size_t>(2 * order - 1); }
};

// Assemble q from lag buffers ordered most recent first.
inline Regressor make_regressor(std::span<const double> y_lags, std::span<const double> u_lags, int n) {
    if (n < 1) throw DomainError("model order must be >= 1");
    if (y_lags.size() < static_cast<std::size_t>(n) || u_lags.size() < static_cast<std::size_t>(n - 1)) {
        throw RangeError("insufficient lag history for order " + std::to_string(n));
    }
    Regressor q;
    q.n = n;
    q.entries.reserve(Regressor::length_for(n));
    q.entries.insert(q.entries.end(), y_lags.begin(), y_lags.begin() + n);
    q.entries.insert(q.entries.end(), u_lags.begin(), u_lags.begin() + (n - 1));
    return q;
}

inline Regressor build_regressor(const Signal& y, const Signal& u, TimeIndex t, int n) {
    if (n < 1) throw DomainError("model order must be >= 1");
    const TimeIndex oldest = t - n + 1;
    if (!y.contains(t) || !y.contains(oldest)) {
        throw RangeError("output history does not cover [" + std::to_string(oldest) + ", " +
                         std::to_string(t) + "]");
    }
    if (n > 1 && (!u.contains(t - 1) || !u.contains(oldest))) {
        throw RangeError("input history does not cover [" + std::to_string(oldest) + ", " +
                         std::to_string(t - 1) + "]");
    }
    Regressor q;
    q.n = n;
    q.entries.reserve(Regressor::length_for(n));
    for (TimeIndex k = t; k >= oldest; --k) q.entries.push_back(y.at(k));
    for (TimeIndex k = t - 1; k >= oldest; --k) q.entries.push_back(u.at(k));
    return q;
}

// Measured input/output pairs on t = 1-L..0.
class DataRecord {
public:
    DataRecord(std::vector<double> u, std::vector<double> y) {
        if (u.size() != y.size()) {
            throw ValidationError("record channels differ in length (" + std::to_string(u.size()) + " vs " +
                                  std::to_string(y.size()) + ")");
        }
        if (u.empty()) throw ValidationError("record is empty");
        const TimeIndex start = 1 - static_cast<TimeIndex>(u.size());
        u_ = Signal(std::move(u), start);
        y_ = Signal(std::move(y), start);
    }

    const Signal& u() const noexcept { return u_; }
    const Signal& y() const noexcept { return y_; }
    std::size_t length() const noexcept { return u_.size(); }
    TimeIndex first() const noexcept { return u_.start(); }

    friend bool operator==(const DataRecord&, const DataRecord&) = default;

private:
    Signal u_;
    Signal y_;
};

} // namespace d2ibc
