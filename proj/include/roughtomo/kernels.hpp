#pragma once

// Kernel machinery: aperture/interpolation B-splines, the filtered kernel
// Psi (Hilbert transform of phi'), the convolved profile G = Psi * w, the
// lattice sum psi(q,t) and its Fourier coefficients, and the radial kernel
// K that governs the discrete transition behavior of the reconstruction.
//
// Everything here is built once (tables + asymptotic coefficients) and is
// immutable and concurrency-safe afterwards.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "roughtomo/bspline.hpp"
#include "roughtomo/errors.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

class Phantom;  // phantom.hpp; needed only by dtb_predict below

struct KernelConfig {
  double beta = 4.0;          // target decay exponent for the mollifier pair
  int aperture_degree = 0;    // 0 = derive: ceil(beta) + 2
  int interp_degree = 0;      // 0 = derive: ceil(beta)
  double q_tab = 64.0;        // filtered-kernel table half-width
  double psi_step = 1.0 / 256.0;   // filtered-kernel / G table spacing
  double dtb_step = 1.0 / 256.0;   // radial K table spacing
  double fourier_t_max = 16.0;     // psi_fourier table half-width in t
  double fourier_step = 1.0 / 64.0;
  int m_cap = 64;                  // tables built for |m| <= m_cap

  int resolved_aperture_degree() const;
  int resolved_interp_degree() const;
  void validate() const;  // throws ValidationError naming the violated assumption
};

// Closed-form evaluator for Psi(u) = (1/pi) pv-integral of phi'(q)/(q-u) dq.
// Exact (up to rounding) on |u| <= series_switch, 4-term moment series beyond.
class FilteredKernelExact {
 public:
  FilteredKernelExact() = default;
  FilteredKernelExact(const BSpline& phi, double series_switch);

  double operator()(double u) const;
  double series_tail(double u) const;  // the asymptotic branch on its own
  double series_switch() const { return switch_; }
  // Coefficient of 1/u^2 in the far expansion; equals 1/pi for unit-mass phi.
  double tail_coefficient() const { return a2_; }

 private:
  struct Piece {
    long double a, b;
    std::vector<long double> c;  // ascending powers of (q - a)
  };
  std::vector<Piece> pieces_;
  double switch_ = 64.0;
  double support_ = 0.0;
  double a2_ = 0.0, a4_ = 0.0, a6_ = 0.0, a8_ = 0.0;
};

namespace detail {
// 4-point Lagrange weights for fractional offset f in [0,1) between the
// middle pair of four consecutive uniform nodes.
inline void cubic_weights(double f, double w[4]) {
  w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
  w[1] = (f * f - 1.0) * (f - 2.0) / 2.0;
  w[2] = -f * (f + 1.0) * (f - 2.0) / 2.0;
  w[3] = f * (f * f - 1.0) / 6.0;
}
}  // namespace detail

// Uniform-grid table with 4-point (cubic) Lagrange interpolation, symmetric
// about zero, plus an even power-law tail a2/q^2 + a4/q^4 + ... past q_max.
struct SymmetricTable {
  std::vector<double> v;  // values at q = i*step, i = 0..n-1 (even function)
  double step = 0.0;
  double q_max = 0.0;
  double a2 = 0.0, a4 = 0.0, a6 = 0.0, a8 = 0.0;
  // Interpolation-accuracy certificate: max abs error at cell midpoints
  // against the exact builder, and the same normalized by the sup of |f|.
  double cert_abs = 0.0, cert_rel = 0.0;

  double operator()(double q) const {
    double aq = q < 0.0 ? -q : q;
    if (aq >= q_max) {
      double i2 = 1.0 / (aq * aq);
      return (((a8 * i2 + a6) * i2 + a4) * i2 + a2) * i2;
    }
    double s = aq / step;
    int i = static_cast<int>(s);
    double wgt[4];
    detail::cubic_weights(s - i, wgt);
    int n = static_cast<int>(v.size());
    auto at = [&](int k) {
      int j = k < 0 ? -k : k;  // even reflection through zero
      return v[j < n ? j : n - 1];
    };
    return wgt[0] * at(i - 1) + wgt[1] * at(i) + wgt[2] * at(i + 1) +
           wgt[3] * at(i + 2);
  }
  bool empty() const { return v.empty(); }
};

// Radial kernel table on [0, radius], zero beyond (enforced after build).
struct RadialKernel {
  std::vector<double> v;
  double step = 0.0;
  double radius = 0.0;
  double tail_max = 0.0;        // max |k| measured on (radius, radius+2] pre-zeroing
  double radon_residual = 0.0;  // max |X-ray of k - (phi*w)| over sampled lines
  double mass = 0.0;            // 2*pi * integral of k(r) r dr

  double operator()(double r) const {
    double ar = r < 0.0 ? -r : r;
    if (ar >= radius) return 0.0;
    double s = ar / step;
    int i = static_cast<int>(s);
    double wgt[4];
    detail::cubic_weights(s - i, wgt);
    int n = static_cast<int>(v.size());
    auto at = [&](int k) {
      int j = k < 0 ? -k : k;
      return j < n ? v[j] : 0.0;
    };
    return wgt[0] * at(i - 1) + wgt[1] * at(i) + wgt[2] * at(i + 1) +
           wgt[3] * at(i + 2);
  }
};

// One Fourier coefficient's t-table plus far-field expansion
//   psi_m(t) ~ e(-m t) * sum_j coef[j] / t^(j+2),  |t| > t_max,
// with psi_{-m}(t) = conj(psi_m(t)).
struct FourierModeTable {
  // De-oscillated envelope e(m t) psi_m(t) at t = -t_max .. t_max step `step`;
  // its derivatives are m-uniformly bounded, so cubic interpolation works at
  // one grid step for every mode. The e(-m t) phase is reattached on lookup.
  std::vector<std::complex<double>> v;
  double t_max = 0.0, step = 0.0;
  std::vector<std::complex<double>> coef;  // far-field, powers t^-2 .. t^-8
  double cert_abs = 0.0;  // midpoint interpolation error vs direct quadrature
};

class KernelSet {
 public:
  static KernelSet build(const KernelConfig& cfg, int threads = 1);

  const KernelConfig& config() const { return cfg_; }
  const BSpline& aperture() const { return w_; }
  const BSpline& interp() const { return phi_; }
  const BSpline& aperture_interp_conv() const { return phi_w_; }

  double eval_w(double p) const { return w_(p); }
  double eval_phi(double u) const { return phi_(u); }
  // (phi * w)(p): exact, a centered B-spline of degree n + d + 1.
  double eval_phi_w(double p) const { return phi_w_(p); }

  // Psi through the table (fast path) and through the closed form (oracle).
  double psi_filtered(double q) const { return psi_tab_(q); }
  double psi_filtered_exact(double q) const { return psi_exact_(q); }
  double tail_coefficient() const { return psi_exact_.tail_coefficient(); }
  const SymmetricTable& psi_table() const { return psi_tab_; }

  // G = (Psi * w), the profile whose angular average yields K.
  double eval_conv(double q) const { return g_tab_(q); }
  const SymmetricTable& conv_table() const { return g_tab_; }

  // psi(q, t) = sum_j Psi(q - j) w(j - q - t); 1-periodic in q.
  double eval_psi(double q, double t) const;

  // Fourier coefficient psi_m(t); table + far expansion for |m| <= m_cap,
  // direct quadrature beyond. psi_fourier_direct is the quadrature oracle.
  std::complex<double> psi_fourier(int m, double t) const;
  std::complex<double> psi_fourier_direct(int m, double t) const;
  const FourierModeTable& fourier_mode(int m) const;

  // Radial kernel K(|x|) of the transition behavior; zero outside dtb_radius.
  double dtb_kernel(double r) const { return k_.operator()(r); }
  double dtb_radius() const { return k_.radius; }
  const RadialKernel& dtb_table() const { return k_; }

  double beta() const { return cfg_.beta; }

 private:
  KernelConfig cfg_;
  BSpline w_, phi_, dphi_, phi_w_;
  FilteredKernelExact psi_exact_;
  SymmetricTable psi_tab_;
  SymmetricTable g_tab_;
  RadialKernel k_;
  std::vector<FourierModeTable> modes_;  // index m = 0..m_cap
};

// Transition-behavior prediction at x = x0 + eps * xcheck for each offset in
// `xcheck`: (jump/eps) * strip integral of K(|x - y|/eps) over the perturbed
// layer, in curve coordinates. Points farther than dtb_radius*eps (plus the
// layer thickness) from the perturbed strip receive exactly zero.
std::vector<double> dtb_predict(const KernelSet& ks, const Phantom& ph,
                                Vec2 x0, const std::vector<Vec2>& xcheck,
                                double eps);

}  // namespace roughtomo
