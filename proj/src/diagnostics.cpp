#include "roughtomo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "roughtomo/errors.hpp"
#include "roughtomo/quadrature.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

namespace {

constexpr double kPi = std::numbers::pi;

inline std::complex<double> cis(double x) {
  return {std::cos(2.0 * kPi * x), std::sin(2.0 * kPi * x)};
}

// Along the circular layer, alpha_vec.(y(u) - x) = C + R cos(xi) with
// xi = u + phase - alpha. Everything the u-integral needs is derived from
// this one closed form.
struct LayerGeometry {
  double C = 0.0;      // alpha_vec . (center - x)
  double R = 0.0;      // curve radius
  double base = 0.0;   // xi = u + base
  Vec2 alpha_vec;

  double rtilde(double u) const { return C + R * std::cos(u + base); }
  // d(u) = alpha_vec . theta(u), theta the interior normal -e(u+phase).
  double normal_dot(double u) const { return -std::cos(u + base); }
};

// u-subintervals of [-a, a] where |C + R cos(xi)| <= band. Used to truncate
// the integral for oscillatory modes: beyond the band the mode coefficient
// is below the far-field floor (the aperture transform has a seventh-order
// zero at every nonzero integer frequency, so psi_m with m >= 1 is
// negligible past the tabulated range).
std::vector<std::pair<double, double>> band_windows(const LayerGeometry& g,
                                                    double band, double a) {
  std::vector<std::pair<double, double>> wins;
  double c_lo = (-g.C - band) / g.R;
  double c_hi = (-g.C + band) / g.R;
  if (c_lo > 1.0 || c_hi < -1.0) return wins;
  double xi_in = c_hi >= 1.0 ? 0.0 : std::acos(c_hi);   // smallest |xi|
  double xi_out = c_lo <= -1.0 ? kPi : std::acos(c_lo); // largest |xi|
  // |xi| in [xi_in, xi_out], both signs; map xi -> u = xi - base + wrap.
  std::vector<std::pair<double, double>> xi_wins;
  if (xi_in <= 0.0)
    xi_wins.emplace_back(-xi_out, xi_out);
  else {
    xi_wins.emplace_back(xi_in, xi_out);
    xi_wins.emplace_back(-xi_out, -xi_in);
  }
  for (double wrap : {-2.0 * kPi, 0.0, 2.0 * kPi}) {
    for (const auto& xw : xi_wins) {
      double lo = std::max(-a, xw.first - g.base + wrap);
      double hi = std::min(a, xw.second - g.base + wrap);
      if (hi > lo) wins.emplace_back(lo, hi);
    }
  }
  std::sort(wins.begin(), wins.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& w : wins) {
    if (!merged.empty() && w.first <= merged.back().second + 1e-15)
      merged.back().second = std::max(merged.back().second, w.second);
    else
      merged.push_back(w);
  }
  return merged;
}

// Width cap resolving the perturbation profile itself (smooth kinds only;
// the lattice kind instead contributes exact cell-edge breakpoints).
double profile_width_cap(const PerturbationProfile& prof, double sqe) {
  switch (prof.kind()) {
    case ProfileKind::kSinusoid:
      return 0.25 * sqe * kPi / std::max(1e-9, prof.params().frequency);
    case ProfileKind::kSawtooth:
      return 0.125 * sqe / std::max(1e-9, prof.params().frequency);
    case ProfileKind::kTruncatedWeierstrass: {
      double top = prof.params().frequency *
                   std::pow(prof.params().weier_b,
                            static_cast<double>(prof.params().terms - 1));
      return 0.25 * sqe * kPi / std::max(1e-9, top);
    }
    default:
      return 1e300;
  }
}

struct ModeIntegrator {
  const Phantom* ph = nullptr;
  const KernelSet* ks = nullptr;
  Vec2 x;
  double eps = 0.0;
  double sqe = 0.0;

  std::complex<double> integrate(int m, double alpha) const {
    const BaseCurve& c = ph->curve();
    const PerturbationProfile& prof = ph->profile();
    const double a = c.arc_halfwidth;
    const double R = c.radius;
    LayerGeometry g;
    g.alpha_vec = unit_vec(alpha);
    g.C = g.alpha_vec.dot(c.center - x);
    g.R = R;
    g.base = c.phase - alpha;

    // Oscillatory modes die past the tabulated |t| range; keep only the u
    // band where the argument can reach it. The zero mode has a genuine
    // 1/t^2 tail and integrates over the whole arc.
    std::vector<std::pair<double, double>> wins;
    if (m >= 1)
      wins = band_windows(g, (ks->fourier_mode(m).t_max + 2.0) * eps, a);
    else
      wins.emplace_back(-a, a);

    const bool lattice =
        prof.kind() == ProfileKind::kPiecewiseConstantLattice;
    const double cell = prof.lattice_step() * sqe;
    const double w_prof = profile_width_cap(prof, sqe);
    const double w_osc = m >= 1 ? 0.7 * eps / (m * R) : 1e300;
    const GaussRule& gr = gauss_rule(12);
    const GaussRule& gi = gauss_rule(8);
    const double jump = ph->jump();

    NeumaierSum acc_re, acc_im;
    long panel_guard = 0;
    for (const auto& win : wins) {
      double u = win.first;
      while (u < win.second) {
        if (++panel_guard > 4000000)
          throw QuadratureFailure("mode integral: panel budget exhausted");
        double cap = std::min(w_prof, w_osc);
        if (m == 0) {
          // graded toward the roots of the line functional
          cap = std::min(cap, 2.0 * eps + 0.25 * std::abs(g.rtilde(u)) / R);
        }
        double next = std::min(win.second, u + cap);
        if (lattice) {
          // never straddle a profile cell edge: the layer depth jumps there
          double edge = (std::floor(u / cell + 1e-12) + 1.0) * cell;
          if (edge > u + 1e-15 && edge < next) next = edge;
        }
        double mid = 0.5 * (u + next), half = 0.5 * (next - u);
        for (size_t iu = 0; iu < gr.x.size(); ++iu) {
          double uu = mid + half * gr.x[iu];
          double h0 = prof.eval_H0(uu / sqe);
          if (h0 == 0.0) continue;
          double carg = g.rtilde(uu) / eps;
          double d = g.normal_dot(uu);
          int n_in = 1 + static_cast<int>(std::abs(m * d * h0) / 0.7);
          std::complex<double> inner{0.0, 0.0};
          for (int s = 0; s < n_in; ++s) {
            double t0 = h0 * s / n_in, t1 = h0 * (s + 1) / n_in;
            double tm = 0.5 * (t0 + t1), th = 0.5 * (t1 - t0);
            for (size_t it = 0; it < gi.x.size(); ++it) {
              double th_hat = tm + th * gi.x[it];
              inner += (gi.w[it] * th * (R - eps * th_hat)) *
                       ks->psi_fourier(m, carg + th_hat * d);
            }
          }
          double wu = gr.w[iu] * half;
          acc_re.add(wu * inner.real());
          acc_im.add(wu * inner.imag());
        }
        u = next;
      }
    }
    double scale = jump / eps;
    return {scale * acc_re.value(), scale * acc_im.value()};
  }
};

}  // namespace

std::complex<double> compute_Am(const Phantom& ph, const KernelSet& ks,
                                Vec2 x, int m, double alpha, double eps,
                                double tol) {
  (void)tol;  // meshing is structural; the argument is kept for call-site symmetry
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ValidationError("compute_Am: eps must be positive and finite");
  if (m < 0) return std::conj(compute_Am(ph, ks, x, -m, alpha, eps, tol));
  ModeIntegrator mi{&ph, &ks, x, eps, std::sqrt(eps)};
  return mi.integrate(m, alpha);
}

double reconstruct_via_modes(const Phantom& ph, const KernelSet& ks,
                             const SinogramGrid& grid, Vec2 x, int M) {
  if (M < 0) throw ValidationError("reconstruct_via_modes: M must be >= 0");
  const double eps = grid.eps;
  ModeIntegrator mi{&ph, &ks, x, eps, std::sqrt(eps)};
  NeumaierSum acc;
  for (long k = grid.k_lo; k <= grid.k_hi; ++k) {
    double alpha = grid.alpha(k);
    double qx = (unit_vec(alpha).dot(x) - grid.p_bar) / eps;
    std::complex<double> a0 = mi.integrate(0, alpha);
    acc.add(a0.real());
    for (int m = 1; m <= M; ++m) {
      std::complex<double> am = mi.integrate(m, alpha);
      acc.add(2.0 * (cis(-m * qx) * am).real());
    }
  }
  return -grid.dalpha() / (2.0 * kPi) * acc.value();
}

int mode_cutoff(double eps, double beta, int cap) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ValidationError("mode_cutoff: need 0 < eps < 1");
  double gamma = 1.0 / (2.0 * (beta - 1.0));
  int M = static_cast<int>(std::ceil(std::pow(eps, -gamma)));
  return std::max(1, std::min(cap, M));
}

DiagnosticSums diagnostic_sums(const Phantom& ph, const KernelSet& ks,
                               const SinogramGrid& grid, Vec2 x0,
                               int threads, int cap) {
  DiagnosticSums out;
  out.eps = grid.eps;
  out.M = mode_cutoff(grid.eps, ks.beta(), cap);
  out.k_lo = grid.k_lo;
  const double eps = grid.eps;
  const double da = grid.dalpha();
  const long nk = grid.k_hi - grid.k_lo + 1;
  const int M = out.M;

  // Per-angle contributions, reduced deterministically afterwards.
  out.am_table.assign(static_cast<size_t>(nk),
                      std::vector<std::complex<double>>(M + 1));
  std::vector<double> cell_var(static_cast<size_t>(nk), 0.0);
  std::vector<std::string> errors(static_cast<size_t>(nk));

  const GaussRule& gc = gauss_rule(8);
  parallel_for(static_cast<size_t>(nk), threads, [&](size_t ki) {
    try {
      long k = grid.k_lo + static_cast<long>(ki);
      double alpha = grid.alpha(static_cast<int>(k));
      ModeIntegrator mi{&ph, &ks, x0, eps, std::sqrt(eps)};
      for (int m = 0; m <= M; ++m) out.am_table[ki][m] = mi.integrate(m, alpha);
      double a0_center = out.am_table[ki][0].real();
      double half = 0.5 * da;
      NeumaierSum cell;
      for (size_t g = 0; g < gc.x.size(); ++g) {
        double a0 = mi.integrate(0, alpha + half * gc.x[g]).real();
        cell.add(gc.w[g] * half * std::abs(a0 - a0_center));
      }
      cell_var[ki] = cell.value();
    } catch (const std::exception& ex) {
      errors[ki] = ex.what();
    }
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw QuadratureFailure("diagnostic_sums: " + e);

  out.mode_abs.assign(M, 0.0);
  NeumaierSum s1;
  for (int m = 1; m <= M; ++m) {
    NeumaierSum zr, zi;
    for (long ki = 0; ki < nk; ++ki) {
      double alpha = grid.alpha(static_cast<int>(grid.k_lo + ki));
      double qx = (unit_vec(alpha).dot(x0) - grid.p_bar) / eps;
      std::complex<double> z =
          cis(-m * qx) * out.am_table[static_cast<size_t>(ki)][m];
      zr.add(z.real());
      zi.add(z.imag());
    }
    out.mode_abs[m - 1] = std::hypot(zr.value(), zi.value());
    s1.add(out.mode_abs[m - 1]);
  }
  out.sum_I = 2.0 * da * s1.value();
  NeumaierSum s2;
  for (long ki = 0; ki < nk; ++ki) s2.add(cell_var[static_cast<size_t>(ki)]);
  out.sum_II = s2.value();

  double scale = std::sqrt(eps) * std::log(1.0 / eps);
  out.sum_I_normalized = out.sum_I / scale;
  out.sum_II_normalized = out.sum_II / scale;
  return out;
}

}  // namespace roughtomo
