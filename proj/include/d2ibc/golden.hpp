#pragma once

#include <cmath>
#include <utility>

namespace d2ibc {

struct ScalarMinimum {
    double x;
    double value;
};

// Golden-section search for a minimum of f on [lo, hi]; stops once the
// bracket is narrower than tol. The endpoints are compared against the final
// interior point so a minimum on the boundary is returned exactly.
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double tol, int max_iter = 300) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    ScalarMinimum best = fc <= fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
    const double fa = f(lo);
    const double fb = f(hi);
    if (fa < best.value) best = {lo, fa};
    if (fb < best.value) best = {hi, fb};
    return best;
}

} // namespace d2ibc
