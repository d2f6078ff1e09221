#pragma once

#include "types.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace prodbar::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the three-term recurrence.
struct GaussLegendreRule {
    std::vector<lreal> nodes;
    std::vector<lreal> weights;

    explicit GaussLegendreRule(int n) : nodes(n), weights(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            lreal x = std::cos(kPi * (i + 0.75L) / (n + 0.5L));
            lreal dp = 0;
            for (int iter = 0; iter < 100; ++iter) {
                lreal p0 = 1, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const lreal pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n * (x * p1 - p0) / (x * x - 1);
                const lreal dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-19L) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
        }
    }

    template <class F>
    lreal integrate(F&& f, lreal a, lreal b) const {
        const lreal half = (b - a) / 2, mid = (a + b) / 2;
        lreal sum = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
        return sum * half;
    }
};

inline const GaussLegendreRule& default_rule() {
    static const GaussLegendreRule rule(20);
    return rule;
}

namespace detail {
template <class F>
lreal adaptive(F& f, lreal a, lreal b, lreal whole, lreal tol, int depth) {
    const auto& rule = default_rule();
    const lreal mid = (a + b) / 2;
    const lreal left = rule.integrate(f, a, mid);
    const lreal right = rule.integrate(f, mid, b);
    if (depth <= 0 || std::fabs(left + right - whole) <= tol) return left + right;
    return adaptive(f, a, mid, left, tol / 2, depth - 1) + adaptive(f, mid, b, right, tol / 2, depth - 1);
}
}  // namespace detail

/// Adaptive Gauss-Legendre quadrature of f over [a, b] to an absolute tolerance.
template <class F>
lreal integrate(F f, lreal a, lreal b, lreal abs_tol = 1e-12L) {
    const lreal whole = default_rule().integrate(f, a, b);
    return detail::adaptive(f, a, b, whole, abs_tol, 40);
}

}  // namespace prodbar::quadrature
