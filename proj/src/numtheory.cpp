#include "roughtomo/numtheory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughtomo/quadrature.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

ContinuedFraction continued_fraction(long double s, int n_terms) {
  if (n_terms < 1 || n_terms > 64)
    throw ValidationError("continued_fraction: n_terms out of range");
  ContinuedFraction cf;
  long double x = s;
  long long pm1 = 1, pm2 = 0, qm1 = 0, qm2 = 1;
  for (int i = 0; i < n_terms; ++i) {
    long double fl = std::floor(x);
    // A quotient this size means <q s> ~ 1e-15 at a small denominator: the
    // input is rational to working precision (legitimate quotients here are
    // O(10^3); Khinchin-typical growth stays far below this for n <= 64).
    if (std::abs(fl) > 1e15L)
      throw RationalInput("continued_fraction: quotient overflow (precision exhausted)");
    long long a = static_cast<long long>(fl);
    long long p = a * pm1 + pm2, q = a * qm1 + qm2;
    cf.a.push_back(a);
    cf.p.push_back(p);
    cf.q.push_back(q);
    long double frac = x - fl;
    if (frac < 1e-18L)
      throw RationalInput(
          "continued_fraction: expansion terminated, input is rational at "
          "working precision");
    x = 1.0L / frac;
    pm2 = pm1;
    pm1 = p;
    qm2 = qm1;
    qm1 = q;
    if (q > (1LL << 40)) break;  // convergents beyond working precision
  }
  return cf;
}

long double nearest_int_distance(long double s, long long m) {
  long double v = s * m;
  return std::abs(v - std::roundl(v));
}

DiophantineScreen screen_scalar(long double s, int M, double threshold) {
  if (M < 8) throw ValidationError("screen_scalar: need M >= 8");
  DiophantineScreen out;
  out.value = static_cast<double>(s);
  out.threshold = threshold;

  std::vector<long double> gap(M + 1, 0.0L);
  for (long long m = 1; m <= M; ++m) gap[m] = nearest_int_distance(s, m);

  // Record minima of <m s> for m >= 2 drive the exponent estimate: along the
  // records, <q s> ~ q^{-eta}, so -log gap against log m has slope eta.
  long double best = 1e30L;
  for (long long m = 2; m <= M; ++m) {
    if (gap[m] < best && gap[m] > 1e-15L) {
      best = gap[m];
      out.record_m.push_back(static_cast<double>(m));
      out.record_gap.push_back(static_cast<double>(gap[m]));
    }
  }
  bool rational = false;
  try {
    ContinuedFraction cf = continued_fraction(s, 20);
    out.quotients = cf.a;
  } catch (const RationalInput&) {
    rational = true;
  }
  if (out.record_m.size() < 3 || rational) {
    out.eta_hat = 99.0;
    out.min_stat = 0.0;
    out.pass = false;
    return out;
  }
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t n = out.record_m.size();
  for (size_t i = 0; i < n; ++i) {
    long double x = std::log(static_cast<long double>(out.record_m[i]));
    long double y = -std::log(static_cast<long double>(out.record_gap[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.eta_hat = static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));

  long double min_stat = 1e30L;
  for (long long m = 1; m <= M; ++m) {
    long double stat = std::pow(static_cast<long double>(m),
                                static_cast<long double>(out.eta_hat) + 0.5L) *
                       gap[m];
    min_stat = std::min(min_stat, stat);
  }
  out.min_stat = static_cast<double>(min_stat);
  out.pass = out.min_stat >= threshold;
  return out;
}

// ---------------------------------------------------------------------------
// Model integrals

namespace {

constexpr double kPi = std::numbers::pi;

// integrate fn over (-inf, inf) by mapping the tails; integrand must decay
// at least quadratically.
double integrate_line(const std::function<double(double)>& fn, double inner_lo,
                      double inner_hi, const std::vector<double>& inner_bp,
                      double tol) {
  std::vector<double> bp = inner_bp;
  bp.push_back(inner_lo);
  bp.push_back(inner_hi);
  double core = integrate_adaptive(fn, bp, tol);
  // tails via x = inner_hi + v/(1-v), v in (0,1)
  double up = integrate_adaptive(
      [&](double v) {
        double x = inner_hi + v / (1.0 - v);
        double jac = 1.0 / ((1.0 - v) * (1.0 - v));
        return fn(x) * jac;
      },
      0.0, 1.0 - 1e-12, tol);
  double lo = integrate_adaptive(
      [&](double v) {
        double x = inner_lo - v / (1.0 - v);
        double jac = 1.0 / ((1.0 - v) * (1.0 - v));
        return fn(x) * jac;
      },
      0.0, 1.0 - 1e-12, tol);
  return core + up + lo;
}

}  // namespace

std::vector<ModelCaseResult> model_peak_integral(
    const std::vector<double>& eps_list,
    const std::vector<double>& alpha_over_sqrt_eps) {
  std::vector<ModelCaseResult> out;
  for (double eps : eps_list) {
    double se = std::sqrt(eps);
    for (double an : alpha_over_sqrt_eps) {
      double alpha = an * se;
      auto fn = [&](double th) {
        double z = th * (th - alpha) / eps;
        return 1.0 / (1.0 + z * z);
      };
      double lhs = integrate_line(fn, -8.0 * se * (1 + std::abs(an)),
                                  8.0 * se * (1 + std::abs(an)),
                                  {0.0, alpha}, 1e-12);
      double env = se / (1.0 + std::abs(alpha) / se);
      out.push_back({"peak", eps, an, lhs, env, lhs / env});
    }
  }
  return out;
}

std::vector<ModelCaseResult> model_near_integral(
    const std::vector<double>& eps_list, const std::vector<double>& tau_list) {
  std::vector<ModelCaseResult> out;
  for (double eps : eps_list) {
    double se = std::sqrt(eps);
    for (double tau : tau_list) {
      double alpha = tau * se;
      auto fn = [&](double s) {
        double z = s * (alpha + s) / eps;
        return (std::abs(s) / eps) / (1.0 + z * z);
      };
      double lhs = integrate_adaptive(fn, {-se, 0.0, se}, 1e-12);
      double env = std::log(std::abs(tau)) / (tau * tau);
      out.push_back({"near", eps, tau, lhs, env, lhs / env});
    }
  }
  return out;
}

std::vector<ModelCaseResult> model_derivative_integral(
    const std::vector<double>& eps_list,
    const std::vector<double>& alpha_over_sqrt_eps) {
  std::vector<ModelCaseResult> out;
  for (double eps : eps_list) {
    double se = std::sqrt(eps);
    for (double an : alpha_over_sqrt_eps) {
      double alpha = an * se;
      auto fn = [&](double th) {
        if (std::abs(th - alpha) < se) return 0.0;
        double z = th * (th - alpha) / eps;
        return (std::abs(th) / eps) / (1.0 + z * z);
      };
      double lhs =
          integrate_line(fn, -8.0 * se * (1 + std::abs(an)),
                         8.0 * se * (1 + std::abs(an)),
                         {0.0, alpha - se, alpha + se}, 1e-12);
      double env = 1.0 / (1.0 + std::abs(an));
      out.push_back({"deriv", eps, an, lhs, env, lhs / env});
    }
  }
  return out;
}

std::vector<ModelCaseResult> model_quadratic_phase(
    const std::vector<double>& eps_list, const std::vector<double>& alpha_list,
    double a) {
  std::vector<ModelCaseResult> out;
  for (double eps : eps_list) {
    for (double alpha : alpha_list) {
      auto fn = [&](double th) {
        double z = (th * th - alpha) / eps;
        return 1.0 / (1.0 + z * z);
      };
      std::vector<double> bp{-a, 0.0, a};
      if (alpha > 0.0 && alpha < a * a) {
        bp.push_back(std::sqrt(alpha));
        bp.push_back(-std::sqrt(alpha));
      }
      double lhs = integrate_adaptive(fn, bp, 1e-13);
      double env;
      std::string regime;
      if (alpha >= a * a) {
        env = eps / (1.0 + (alpha - a * a) / eps);
        regime = "quad_past_arc";
      } else if (alpha >= 0.0 && alpha <= 4.0 * eps) {
        env = std::sqrt(eps);
        regime = "quad_small";
      } else if (alpha < 0.0) {
        env = std::sqrt(eps) * std::pow(1.0 + std::abs(alpha) / eps, -1.5);
        regime = "quad_negative";
      } else {
        continue;  // intermediate band covered by quadratic_split
      }
      out.push_back({regime, eps, alpha, lhs, env, lhs / env});
    }
  }
  return out;
}

std::vector<ModelCaseResult> model_quadratic_split(
    const std::vector<double>& eps_list, const std::vector<double>& alpha_list) {
  std::vector<ModelCaseResult> out;
  for (double eps : eps_list) {
    for (double alpha : alpha_list) {
      if (!(alpha >= 4.0 * eps && alpha <= 0.5 * kPi)) continue;
      double cut = std::sqrt(eps * alpha);
      auto base = [&](double th) {
        double z = (th * th - alpha) / eps;
        return 1.0 / (1.0 + z * z);
      };
      double r = std::sqrt(alpha);
      double in_lo = std::sqrt(std::max(0.0, alpha - cut));
      double in_hi = std::sqrt(alpha + cut);
      auto far_fn = [&](double th) {
        return (std::abs(th * th - alpha) >= cut) ? base(th) : 0.0;
      };
      auto near_fn = [&](double th) {
        return (std::abs(th * th - alpha) < cut) ? base(th) : 0.0;
      };
      double far = integrate_line(far_fn, -2.0 * r - 2.0, 2.0 * r + 2.0,
                                  {-in_hi, -in_lo, in_lo, in_hi}, 1e-13);
      double near = integrate_adaptive(near_fn, {-in_hi, -in_lo, in_lo, in_hi},
                                       1e-13);
      double env1 = std::pow(eps, 1.5) / alpha;
      double env2 = eps / std::sqrt(alpha);
      out.push_back({"split_far", eps, alpha, far, env1, far / env1});
      out.push_back({"split_near", eps, alpha, near, env2, near / env2});
    }
  }
  return out;
}

std::vector<ModelCaseResult> model_lattice_sum(
    const std::vector<double>& eps_list, const std::vector<double>& p_list) {
  std::vector<ModelCaseResult> out;
  for (double eps : eps_list) {
    long long N = static_cast<long long>(std::ceil(4.0 / std::sqrt(eps)));
    for (double p : p_list) {
      NeumaierSum s;
      for (long long n = 1; n < N; ++n)
        s.add((1.0 / n) / (1.0 + std::abs(n + p)));
      double lhs = s.value();
      double env = std::log(std::abs(p)) / std::abs(p);
      out.push_back({"lattice_sum", eps, p, lhs, env, lhs / env});

      // companion integral: int_1^inf dx / ((1+|p+x|) x^2), kink at x = -p
      std::vector<double> bp{0.0, 1.0 - 1e-14};
      if (p < -1.0) bp.push_back(-1.0 / p);  // v = 1/x at the kink
      std::sort(bp.begin(), bp.end());
      double integral = integrate_adaptive(
          [&](double v) { return 1.0 / (1.0 + std::abs(p + 1.0 / v)); }, bp,
          1e-13);
      double env2 = 1.0 / std::abs(p);
      out.push_back({"lattice_int", eps, p, integral, env2, integral / env2});
    }
  }
  return out;
}

bool ModelSuiteResult::all_within(double band) const {
  for (const auto& [name, r] : ratio_bands)
    if (r > band) return false;
  return true;
}

ModelSuiteResult model_integral_suite() {
  ModelSuiteResult res;
  std::vector<double> eps{1.0 / 16,  1.0 / 32,  1.0 / 64, 1.0 / 128,
                          1.0 / 256, 1.0 / 512, 1.0 / 1024};
  auto absorb = [&](const std::vector<ModelCaseResult>& v) {
    res.cases.insert(res.cases.end(), v.begin(), v.end());
  };
  absorb(model_peak_integral(eps, {0.0, 1.0, 4.0, 16.0, 64.0}));
  absorb(model_near_integral(eps, {4.0, 8.0, 16.0, 32.0}));
  absorb(model_derivative_integral(eps, {0.0, 1.0, 4.0, 16.0, 64.0}));
  {
    std::vector<ModelCaseResult> v;
    for (double eps_i : eps) {
      std::vector<double> alphas{0.12,        0.0,        2.0 * eps_i,
                                 -4.0 * eps_i, -64.0 * eps_i, 0.09 + 16.0 * eps_i};
      auto w = model_quadratic_phase({eps_i}, alphas, 0.3);
      v.insert(v.end(), w.begin(), w.end());
    }
    absorb(v);
  }
  absorb(model_quadratic_split(eps, {0.05, 0.2, 0.8, 1.5}));
  absorb(model_lattice_sum(eps, {2.0, 4.0, 8.0, -2.0, -4.0, -8.0}));

  // ratio band per family
  std::vector<std::string> fams;
  for (const auto& c : res.cases)
    if (std::find(fams.begin(), fams.end(), c.name) == fams.end())
      fams.push_back(c.name);
  for (const std::string& f : fams) {
    double lo = 1e300, hi = 0.0;
    for (const auto& c : res.cases)
      if (c.name == f) {
        lo = std::min(lo, c.ratio);
        hi = std::max(hi, c.ratio);
      }
    res.ratio_bands.emplace_back(f, hi / lo);
  }
  return res;
}

}  // namespace roughtomo
