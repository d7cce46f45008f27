#include "roughtomo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "roughtomo/errors.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

namespace {

// Nodes by Newton iteration on P_n (three-term recurrence); weights from the
// derivative. Reproducible to ~1 ulp, avoids hard-coded constant tables.
GaussRule compute_rule(int n) {
  GaussRule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_rule(int order) {
  static const std::map<int, GaussRule> rules = [] {
    std::map<int, GaussRule> m;
    for (int n : {4, 8, 12, 16}) m.emplace(n, compute_rule(n));
    return m;
  }();
  auto it = rules.find(order);
  if (it == rules.end())
    throw ValidationError("gauss_rule: unsupported order " + std::to_string(order));
  return it->second;
}

double gauss_panel(const std::function<double(double)>& fn, double a, double b,
                   int order) {
  const GaussRule& r = gauss_rule(order);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  NeumaierSum s;
  for (size_t i = 0; i < r.x.size(); ++i) s.add(r.w[i] * fn(mid + half * r.x[i]));
  return half * s.value();
}

double integrate_adaptive(const std::function<double(double)>& fn,
                          const std::vector<double>& breakpoints, double tol_abs,
                          int max_depth) {
  if (breakpoints.size() < 2)
    throw ValidationError("integrate_adaptive: need at least two breakpoints");
  std::vector<double> bp = breakpoints;
  std::sort(bp.begin(), bp.end());
  double total = bp.back() - bp.front();
  if (!(total > 0.0)) return 0.0;
  if (!(tol_abs > 0.0))
    throw ValidationError("integrate_adaptive: tolerance must be positive");

  struct Panel {
    double a, b;
    int depth;
  };
  std::vector<Panel> stack;
  for (size_t i = 0; i + 1 < bp.size(); ++i)
    if (bp[i + 1] > bp[i]) stack.push_back({bp[i], bp[i + 1], 0});

  NeumaierSum acc;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    double coarse = gauss_panel(fn, p.a, p.b, 8);
    double fine = gauss_panel(fn, p.a, p.b, 12);
    if (!std::isfinite(fine) || !std::isfinite(coarse))
      throw QuadratureFailure("integrate_adaptive: non-finite integrand");
    double budget = tol_abs * (p.b - p.a) / total;
    if (std::abs(fine - coarse) <= budget || (p.b - p.a) < 1e-15 * total) {
      acc.add(fine);
      continue;
    }
    if (p.depth >= max_depth)
      throw QuadratureFailure("integrate_adaptive: max refinement depth reached");
    double m = 0.5 * (p.a + p.b);
    stack.push_back({p.a, m, p.depth + 1});
    stack.push_back({m, p.b, p.depth + 1});
  }
  return acc.value();
}

double integrate_adaptive(const std::function<double(double)>& fn, double a,
                          double b, double tol_abs, int max_depth) {
  return integrate_adaptive(fn, std::vector<double>{a, b}, tol_abs, max_depth);
}

}  // namespace roughtomo
