#pragma once

#include <functional>
#include <vector>

namespace roughtomo {

// Gauss-Legendre nodes/weights on [-1,1] for fixed small orders.
struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss_rule(int order);  // supported: 4, 8, 12, 16

// Integrate fn over [a,b] with one Gauss panel of the given order.
double gauss_panel(const std::function<double(double)>& fn, double a, double b, int order = 12);

// Adaptive panel integration: start from the given breakpoints (panel edges),
// bisect panels until the order-12 vs order-8 discrepancy per panel is below
// tol_abs (distributed by panel width).  Throws QuadratureFailure on
// non-convergence at max depth.  tol_abs must stay above the rounding floor
// ~1e-15 * span * max|fn|; below it the discrepancy is noise that bisection
// cannot shrink, and the subdivision tree grows without useful bound.
double integrate_adaptive(const std::function<double(double)>& fn,
                          const std::vector<double>& breakpoints, double tol_abs,
                          int max_depth = 52);

// Convenience: single interval [a,b].
double integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                          double tol_abs, int max_depth = 52);

}  // namespace roughtomo
