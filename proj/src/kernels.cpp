#include "roughtomo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughtomo/phantom.hpp"
#include "roughtomo/quadrature.hpp"

namespace roughtomo {

namespace {

constexpr double kPi = std::numbers::pi;

// e(x) = exp(2 pi i x)
inline std::complex<double> cis(double x) {
  return {std::cos(2.0 * kPi * x), std::sin(2.0 * kPi * x)};
}

using detail::cubic_weights;

}  // namespace

// ---------------------------------------------------------------------------
// KernelConfig

int KernelConfig::resolved_aperture_degree() const {
  return aperture_degree > 0 ? aperture_degree
                             : static_cast<int>(std::ceil(beta)) + 2;
}

int KernelConfig::resolved_interp_degree() const {
  return interp_degree > 0 ? interp_degree : static_cast<int>(std::ceil(beta));
}

void KernelConfig::validate() const {
  if (!(beta >= 2.0 && beta <= 8.0))
    throw ValidationError("kernels.beta: need 2 <= beta <= 8 (mode-decay exponent)");
  int dw = resolved_aperture_degree(), dp = resolved_interp_degree();
  int need_w = static_cast<int>(std::ceil(beta)) + 2;
  if (dw < need_w)
    throw ValidationError(
        "kernels.aperture_degree: aperture must have ceil(beta)+1 continuous "
        "derivatives, so degree >= ceil(beta)+2");
  int need_p = static_cast<int>(std::ceil(beta));
  if (dp < need_p)
    throw ValidationError(
        "kernels.interp_degree: interpolation-kernel decay requires degree >= "
        "ceil(beta)");
  if (dw > 14 || dp > 14)
    throw ValidationError("kernels: spline degrees above 14 are not supported");
  if (!(q_tab >= 16.0 && q_tab <= 512.0))
    throw ValidationError("kernels.q_tab: need 16 <= q_tab <= 512");
  if (!(psi_step > 0.0 && psi_step <= 1.0 / 64.0))
    throw ValidationError("kernels.psi_step: need 0 < step <= 1/64");
  if (!(dtb_step > 0.0 && dtb_step <= 1.0 / 64.0))
    throw ValidationError("kernels.dtb_step: need 0 < step <= 1/64");
  if (!(fourier_t_max >= 8.0 && fourier_t_max <= 64.0))
    throw ValidationError("kernels.fourier_t_max: need 8 <= t_max <= 64");
  if (!(fourier_step > 0.0 && fourier_step <= 1.0 / 16.0))
    throw ValidationError("kernels.fourier_step: need 0 < step <= 1/16");
  if (m_cap < 8 || m_cap > 256)
    throw ValidationError("kernels.m_cap: need 8 <= m_cap <= 256");
}

// ---------------------------------------------------------------------------
// FilteredKernelExact: Psi(u) = (1/pi) pv int phi'(q) / (q - u) dq.
//
// Per polynomial piece [a,b] with ascending coefficients c_j in z = q - a and
// omega = u - a:
//   pv int_0^L z^j/(z-omega) dz = S_j + omega^j log|(L-omega)/omega|,
//   S_j = sum_{i<j} omega^{j-1-i} L^{i+1}/(i+1).
// The log coefficients of adjacent pieces cancel at shared knots because phi'
// is continuous, so nudging omega off exact knots is benign. long double
// keeps the cancellation for |u| up to the table edge (error ~1e-12 at u=64).

FilteredKernelExact::FilteredKernelExact(const BSpline& phi, double series_switch)
    : switch_(series_switch), support_(phi.support_radius()) {
  BSpline dphi = phi.derivative_spline();
  pieces_.reserve(dphi.piece_count());
  for (int i = 0; i < dphi.piece_count(); ++i) {
    Piece pc;
    pc.a = dphi.knot(i);
    pc.b = dphi.knot(i + 1);
    for (double c : dphi.piece_coeffs(i)) pc.c.push_back(c);
    pieces_.push_back(std::move(pc));
  }
  a2_ = 1.0 / kPi;  // unit mass of phi
  a4_ = 3.0 * phi.moment(2) / kPi;
  a6_ = 5.0 * phi.moment(4) / kPi;
  a8_ = 7.0 * phi.moment(6) / kPi;
}

double FilteredKernelExact::series_tail(double u) const {
  double i2 = 1.0 / (u * u);
  return (((a8_ * i2 + a6_) * i2 + a4_) * i2 + a2_) * i2;
}

double FilteredKernelExact::operator()(double u) const {
  double au = std::abs(u);  // even: phi even
  if (au > switch_) return series_tail(au);
  constexpr long double kTiny = 1e-18L;
  long double acc = 0.0L;
  for (const Piece& pc : pieces_) {
    long double om = static_cast<long double>(au) - pc.a;
    long double L = pc.b - pc.a;
    long double d0 = om, d1 = L - om;
    if (std::abs(d0) < kTiny) d0 = kTiny;
    if (std::abs(d1) < kTiny) d1 = kTiny;
    long double lg = std::log(std::abs(d1)) - std::log(std::abs(d0));
    size_t nc = pc.c.size();
    long double ompow[8], Lpow[8];
    ompow[0] = 1.0L;
    Lpow[0] = 1.0L;
    for (size_t j = 1; j <= nc && j < 8; ++j) {
      ompow[j] = ompow[j - 1] * om;
      Lpow[j] = Lpow[j - 1] * L;
    }
    long double piece = 0.0L;
    for (size_t j = 0; j < nc; ++j) {
      long double S = 0.0L;  // sum_{i<j} om^{j-1-i} L^{i+1}/(i+1)
      for (size_t i = 0; i < j; ++i)
        S += ompow[j - 1 - i] * Lpow[i + 1] / (i + 1.0L);
      piece += pc.c[j] * (S + ompow[j] * lg);
    }
    acc += piece;
  }
  return static_cast<double>(acc) / kPi;
}

// ---------------------------------------------------------------------------
// Table helpers

namespace {

// The table stores the de-oscillated envelope g_m(t) = e(m t) psi_m(t)
// = int Psi(t+s) w(s) e(-m s) ds, whose t-derivatives are bounded uniformly
// in m, so one grid step serves every mode. The phase factor is restored
// after interpolation.
std::complex<double> mode_table_interp(const FourierModeTable& tb, int m,
                                       double t) {
  double s = (t + tb.t_max) / tb.step;
  int i = static_cast<int>(s);
  int n = static_cast<int>(tb.v.size());
  i = std::max(1, std::min(i, n - 3));
  double f = s - i;
  double wgt[4];
  cubic_weights(f, wgt);
  std::complex<double> env = wgt[0] * tb.v[i - 1] + wgt[1] * tb.v[i] +
                             wgt[2] * tb.v[i + 1] + wgt[3] * tb.v[i + 2];
  return cis(-m * t) * env;
}

std::complex<double> mode_far_eval(const FourierModeTable& tb, int m, double t) {
  // psi_m(t) ~ e(-m t) sum_j coef[j] / t^(j+2)
  double it = 1.0 / t;
  std::complex<double> s{0.0, 0.0};
  for (size_t j = tb.coef.size(); j-- > 0;) s = (s + tb.coef[j]) * it;
  s *= it;  // one extra power: coef[0] sits at t^-2
  return cis(-m * t) * s;
}

}  // namespace

// ---------------------------------------------------------------------------
// KernelSet build

KernelSet KernelSet::build(const KernelConfig& cfg, int threads) {
  cfg.validate();
  KernelSet ks;
  ks.cfg_ = cfg;
  ks.w_ = BSpline::centered(cfg.resolved_aperture_degree());
  ks.phi_ = BSpline::centered(cfg.resolved_interp_degree());
  ks.dphi_ = ks.phi_.derivative_spline();
  ks.phi_w_ = BSpline::centered(cfg.resolved_aperture_degree() +
                                cfg.resolved_interp_degree() + 1);
  ks.psi_exact_ = FilteredKernelExact(ks.phi_, cfg.q_tab);

  // --- Psi table ---------------------------------------------------------
  {
    SymmetricTable& tb = ks.psi_tab_;
    tb.step = cfg.psi_step;
    tb.q_max = cfg.q_tab;
    int n = static_cast<int>(std::lround(cfg.q_tab / cfg.psi_step)) + 3;
    tb.v.assign(n, 0.0);
    parallel_for(n, threads, [&](size_t i) { tb.v[i] = ks.psi_exact_(i * tb.step); });
    tb.a2 = 1.0 / kPi;
    tb.a4 = 3.0 * ks.phi_.moment(2) / kPi;
    tb.a6 = 5.0 * ks.phi_.moment(4) / kPi;
    tb.a8 = 7.0 * ks.phi_.moment(6) / kPi;
    double sup = 0.0;
    for (double x : tb.v) sup = std::max(sup, std::abs(x));
    double worst = 0.0;
    int ncells = static_cast<int>(std::lround(cfg.q_tab / cfg.psi_step));
    std::vector<double> errs(ncells, 0.0);
    parallel_for(ncells, threads, [&](size_t i) {
      double q = (i + 0.5) * tb.step;
      errs[i] = std::abs(tb(q) - ks.psi_exact_(q));
    });
    for (double e : errs) worst = std::max(worst, e);
    tb.cert_abs = worst;
    tb.cert_rel = worst / sup;
    if (worst > 1e-6)
      throw AccuracyFailure("filtered-kernel table certificate failed");
  }

  // --- G = Psi * w table ---------------------------------------------------
  {
    SymmetricTable& tb = ks.g_tab_;
    tb.step = cfg.psi_step;
    tb.q_max = 16.0;
    double wsr = ks.w_.support_radius();
    auto g_exact = [&](double q) {
      std::vector<double> bp;
      for (int i = 0; i <= ks.w_.piece_count(); ++i) bp.push_back(ks.w_.knot(i));
      // kinks of Psi(q - sigma) at sigma = q - (phi' knots)
      for (int i = 0; i <= ks.dphi_.piece_count(); ++i) {
        double s = q - ks.dphi_.knot(i);
        if (s > -wsr && s < wsr) bp.push_back(s);
      }
      return integrate_adaptive(
          [&](double s) { return ks.psi_exact_(q - s) * ks.w_(s); }, bp, 5e-12);
    };
    int n = static_cast<int>(std::lround(tb.q_max / tb.step)) + 3;
    tb.v.assign(n, 0.0);
    parallel_for(n, threads, [&](size_t i) { tb.v[i] = g_exact(i * tb.step); });
    tb.a2 = 1.0 / kPi;
    tb.a4 = 3.0 * ks.phi_w_.moment(2) / kPi;
    tb.a6 = 5.0 * ks.phi_w_.moment(4) / kPi;
    tb.a8 = 7.0 * ks.phi_w_.moment(6) / kPi;
    double sup = 0.0;
    for (double x : tb.v) sup = std::max(sup, std::abs(x));
    // Spot-check midpoints (full scan would double the build cost).
    double worst = 0.0;
    int ncells = static_cast<int>(std::lround(tb.q_max / tb.step));
    for (int i = 1; i < ncells; i += 37) {
      double q = (i + 0.5) * tb.step;
      worst = std::max(worst, std::abs(tb(q) - g_exact(q)));
    }
    // Far-expansion consistency at the table edge.
    worst = std::max(worst, std::abs(tb.v[n - 3] - g_exact((n - 3) * tb.step)));
    tb.cert_abs = worst;
    tb.cert_rel = worst / sup;
    if (worst > 1e-6)
      throw AccuracyFailure("aperture-convolved kernel table certificate failed");
  }

  // --- radial transition kernel K -----------------------------------------
  {
    RadialKernel& k = ks.k_;
    k.step = cfg.dtb_step;
    k.radius = ks.phi_w_.support_radius();
    double r_meas = k.radius + 2.0;
    int n_all = static_cast<int>(std::lround(r_meas / k.step)) + 3;
    int n_keep = static_cast<int>(std::lround(k.radius / k.step)) + 3;
    std::vector<double> pre(n_all, 0.0);
    auto k_angular = [&](double r) {
      std::vector<double> bp{0.0, 0.5 * kPi};
      for (double c = 0.5; c < r; c += 0.5) bp.push_back(std::acos(c / r));
      return -integrate_adaptive(
                 [&](double a) { return ks.g_tab_(r * std::cos(a)); }, bp,
                 1e-11) /
             kPi;
    };
    parallel_for(n_all, threads, [&](size_t i) { pre[i] = k_angular(i * k.step); });
    double tail = 0.0;
    for (int i = 0; i < n_all; ++i)
      if (i * k.step > k.radius) tail = std::max(tail, std::abs(pre[i]));
    k.tail_max = tail;
    if (tail > 1e-5)
      throw AccuracyFailure("transition kernel does not vanish past its support");
    k.v.assign(pre.begin(), pre.begin() + n_keep);
    for (int i = 0; i < n_keep; ++i)
      if (i * k.step >= k.radius) k.v[i] = 0.0;

    // X-ray consistency: line integrals of K reproduce (phi*w).
    double resid = 0.0;
    for (double p : {0.0, 0.33, 0.71, 1.2, 2.5, 4.0, 5.5}) {
      double smax = std::sqrt(std::max(0.0, k.radius * k.radius - p * p));
      double line = 2.0 * integrate_adaptive(
                              [&](double s) { return k(std::hypot(p, s)); }, 0.0,
                              std::max(smax, 1e-6), 1e-10);
      resid = std::max(resid, std::abs(line - ks.phi_w_(p)));
    }
    k.radon_residual = resid;
    if (resid > 1e-5)
      throw AccuracyFailure("transition kernel X-ray consistency failed");
    k.mass = 2.0 * kPi *
             integrate_adaptive([&](double r) { return k(r) * r; }, 0.0,
                                k.radius, 1e-11);
  }

  // --- Fourier mode tables -------------------------------------------------
  {
    int mc = cfg.m_cap;
    ks.modes_.assign(mc + 1, FourierModeTable{});
    int nt = 2 * static_cast<int>(std::lround(cfg.fourier_t_max / cfg.fourier_step)) + 1;
    for (int m = 0; m <= mc; ++m) {
      ks.modes_[m].t_max = cfg.fourier_t_max;
      ks.modes_[m].step = cfg.fourier_step;
      ks.modes_[m].v.assign(nt, {0.0, 0.0});
    }
    // psi_m(t) = int_0^1 psi(q,t) e(m q) dq: trapezoid on the 1-periodic
    // lattice sum (spectrally accurate), projected onto all modes at once.
    const int N = 4096;
    std::vector<std::complex<double>> base(N);
    for (int i = 0; i < N; ++i) base[i] = cis(static_cast<double>(i) / N);
    parallel_for(nt, threads, [&](size_t ti) {
      double t = -cfg.fourier_t_max + ti * cfg.fourier_step;
      std::vector<std::complex<double>> acc(mc + 1, {0.0, 0.0});
      for (int i = 0; i < N; ++i) {
        double q = static_cast<double>(i) / N;
        double f = ks.eval_psi(q, t);
        std::complex<double> z = base[i], zp = {f, 0.0};
        for (int m = 0; m <= mc; ++m) {
          acc[m] += zp;
          zp *= z;
        }
      }
      for (int m = 0; m <= mc; ++m)
        ks.modes_[m].v[ti] = cis(m * t) * acc[m] / static_cast<double>(N);
    });

    // Far-field coefficients from the Psi power tail and the aperture's
    // oscillatory moments W_i(m) = int sigma^i w(sigma) e(-m sigma) dsigma.
    double a2 = 1.0 / kPi, a4 = 3.0 * ks.phi_.moment(2) / kPi,
           a6 = 5.0 * ks.phi_.moment(4) / kPi, a8 = 7.0 * ks.phi_.moment(6) / kPi;
    for (int m = 0; m <= mc; ++m) {
      std::vector<std::complex<double>> W(7, {0.0, 0.0});
      double wsr = ks.w_.support_radius();
      int per = std::max(1, 2 * (m + 1));  // panels per unit for oscillation
      int npan = static_cast<int>(std::ceil(2.0 * wsr * per));
      const GaussRule& gr = gauss_rule(12);
      for (int pnl = 0; pnl < npan; ++pnl) {
        double a = -wsr + 2.0 * wsr * pnl / npan;
        double b = -wsr + 2.0 * wsr * (pnl + 1) / npan;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (size_t g = 0; g < gr.x.size(); ++g) {
          double s = mid + half * gr.x[g];
          double wv = ks.w_(s) * gr.w[g] * half;
          std::complex<double> ph = cis(-m * s) * wv;
          double sp = 1.0;
          for (int i = 0; i < 7; ++i) {
            W[i] += ph * sp;
            sp *= s;
          }
        }
      }
      auto& coef = ks.modes_[m].coef;
      coef.assign(7, {0.0, 0.0});
      coef[0] = a2 * W[0];
      coef[1] = -2.0 * a2 * W[1];
      coef[2] = 3.0 * a2 * W[2] + a4 * W[0];
      coef[3] = -4.0 * a2 * W[3] - 4.0 * a4 * W[1];
      coef[4] = 5.0 * a2 * W[4] + 10.0 * a4 * W[2] + a6 * W[0];
      coef[5] = -6.0 * a2 * W[5] - 20.0 * a4 * W[3] - 6.0 * a6 * W[1];
      coef[6] = 7.0 * a2 * W[6] + 35.0 * a4 * W[4] + 21.0 * a6 * W[2] + a8 * W[0];
    }

    // Cross-validate table and far expansion against direct quadrature.
    double worst = 0.0;
    std::vector<int> check_m;
    for (int m : {0, 1, 3, 8, 16, 32, mc})
      if (m <= mc && (check_m.empty() || check_m.back() != m))
        check_m.push_back(m);
    for (int m : check_m) {
      double wm = 0.0;
      for (double t : {0.3, -7.77, 7.77}) {
        std::complex<double> d = ks.psi_fourier_direct(m, t);
        wm = std::max(wm, std::abs(ks.psi_fourier(m, t) - d));
      }
      double edge = cfg.fourier_t_max + 1.0;
      std::complex<double> d = ks.psi_fourier_direct(m, edge);
      wm = std::max(wm, std::abs(mode_far_eval(ks.modes_[m], m, edge) - d));
      ks.modes_[m].cert_abs = wm;
      worst = std::max(worst, wm);
    }
    if (worst > 3e-7)
      throw AccuracyFailure("Fourier mode table certificate failed");
  }

  return ks;
}

double KernelSet::eval_psi(double q, double t) const {
  double wsr = w_.support_radius();
  double lo = q + t - wsr, hi = q + t + wsr;
  int j0 = static_cast<int>(std::ceil(lo)), j1 = static_cast<int>(std::floor(hi));
  double s = 0.0;
  for (int j = j0; j <= j1; ++j) s += psi_tab_(q - j) * w_(j - q - t);
  return s;
}

std::complex<double> KernelSet::psi_fourier_direct(int m, double t) const {
  // Integrand support: |q + t| <= w support radius.
  std::vector<double> bp;
  for (int i = 0; i <= w_.piece_count(); ++i) bp.push_back(-t - w_.knot(i));
  std::sort(bp.begin(), bp.end());
  // Split for the oscillation of e(m q).
  std::vector<double> fine;
  double dq = 1.0 / (4.0 * (std::abs(m) + 1.0));
  for (size_t i = 0; i + 1 < bp.size(); ++i) {
    int nsub = std::max(1, static_cast<int>(std::ceil((bp[i + 1] - bp[i]) / dq)));
    for (int k = 0; k < nsub; ++k)
      fine.push_back(bp[i] + (bp[i + 1] - bp[i]) * k / nsub);
  }
  fine.push_back(bp.back());
  double re = integrate_adaptive(
      [&](double q) {
        return psi_exact_(q) * w_(-q - t) * std::cos(2.0 * kPi * m * q);
      },
      fine, 1e-11);
  double im = integrate_adaptive(
      [&](double q) {
        return psi_exact_(q) * w_(-q - t) * std::sin(2.0 * kPi * m * q);
      },
      fine, 1e-11);
  return {re, im};
}

const FourierModeTable& KernelSet::fourier_mode(int m) const {
  int am = m < 0 ? -m : m;
  if (am >= static_cast<int>(modes_.size()))
    throw ValidationError("fourier_mode: |m| exceeds the table cap");
  return modes_[am];
}

std::complex<double> KernelSet::psi_fourier(int m, double t) const {
  int am = m < 0 ? -m : m;
  std::complex<double> val;
  if (am >= static_cast<int>(modes_.size())) {
    val = psi_fourier_direct(am, t);
  } else {
    const FourierModeTable& tb = modes_[am];
    if (std::abs(t) > tb.t_max - 2.0 * tb.step)
      val = mode_far_eval(tb, am, t);
    else
      val = mode_table_interp(tb, am, t);
  }
  return m < 0 ? std::conj(val) : val;
}

// ---------------------------------------------------------------------------
// Transition-behavior prediction

std::vector<double> dtb_predict(const KernelSet& ks, const Phantom& ph,
                                Vec2 x0, const std::vector<Vec2>& xcheck,
                                double eps) {
  const BaseCurve& c = ph.curve();
  const double R = c.radius, a = c.arc_halfwidth;
  const double RK = ks.dtb_radius();
  const double hbar = ph.profile().sup_bound();
  const double sqe = std::sqrt(eps);
  const double jump = ph.jump();
  std::vector<double> out(xcheck.size(), 0.0);

  for (size_t idx = 0; idx < xcheck.size(); ++idx) {
    Vec2 x = x0 + xcheck[idx] * eps;
    Vec2 rel = x - c.center;
    double rho = rel.norm();
    double reach = eps * (RK + hbar);
    if (rho < 1e-12) continue;  // center: farther than reach for any sane setup
    // |x - y(u)|^2 = rho^2 + R^2 - 2 R rho cos(u + phase - psi0)
    double cmin = (rho * rho + R * R - reach * reach) / (2.0 * R * rho);
    if (cmin > 1.0) continue;
    double delta = std::acos(std::max(-1.0, cmin));
    double psi0 = std::atan2(rel.y, rel.x);
    double ucen = psi0 - c.phase;
    // wrap ucen into (-pi, pi]
    ucen = std::remainder(ucen, 2.0 * kPi);
    double ulo = std::max(-a, ucen - delta), uhi = std::min(a, ucen + delta);
    if (!(uhi > ulo)) continue;

    std::vector<double> bp{ulo, uhi};
    const PerturbationProfile& prof = ph.profile();
    if (prof.kind() == ProfileKind::kPiecewiseConstantLattice) {
      double du = prof.lattice_step() * sqe;
      for (double u = std::ceil(ulo / du) * du; u < uhi; u += du)
        bp.push_back(u);
    }
    // resolve the eps-scale kernel variation
    std::vector<double> grid;
    std::sort(bp.begin(), bp.end());
    double step = eps / 4.0;
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
      int nsub = std::max(1, static_cast<int>(std::ceil((bp[i + 1] - bp[i]) / step)));
      for (int k = 0; k < nsub; ++k)
        grid.push_back(bp[i] + (bp[i + 1] - bp[i]) * k / nsub);
    }
    grid.push_back(bp.back());

    auto inner = [&](double u) {
      double h0 = prof.eval_H0(u / sqe);
      if (h0 == 0.0) return 0.0;
      Vec2 y = c.point(u), th = c.normal(u);
      return gauss_panel(
          [&](double that) {
            Vec2 d = x - y - th * (eps * that);
            return ks.dtb_kernel(d.norm() / eps) * (R - eps * that);
          },
          0.0, h0, 8);
    };
    NeumaierSum s;
    for (size_t i = 0; i + 1 < grid.size(); ++i)
      s.add(gauss_panel(inner, grid[i], grid[i + 1], 8));
    out[idx] = jump / eps * s.value();
  }
  return out;
}

}  // namespace roughtomo
