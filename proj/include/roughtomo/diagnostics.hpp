#pragma once

// Angular Fourier diagnostics: the per-angle coefficients A_m(alpha, eps) of
// the reconstruction's interpolation-lattice expansion, the mode-resolved
// consistency identity, and the two aggregate sums whose decay the remainder
// bound predicts.

#include <complex>
#include <vector>

#include "roughtomo/kernels.hpp"
#include "roughtomo/phantom.hpp"
#include "roughtomo/sinogram.hpp"

namespace roughtomo {

// A_m(alpha, eps) = eps^{-2} * integral of psi_m(alpha_vec.(y - x)/eps) f^p(y) dy
// over the perturbation layer, evaluated in curve coordinates. A_0 is real;
// A_{-m} = conj(A_m).
std::complex<double> compute_Am(const Phantom& ph, const KernelSet& ks,
                                Vec2 x, int m, double alpha, double eps,
                                double tol = 0.0);

// Reconstruction through the mode expansion:
//   f_rec(x) ~= -(d_alpha / 2 pi) sum_{|m| <= M} sum_k e(-m (alpha_k.x - p_bar)/eps) A_m(alpha_k)
// Exact up to mode truncation; used as a consistency oracle for reconstruct_at.
double reconstruct_via_modes(const Phantom& ph, const KernelSet& ks,
                             const SinogramGrid& grid, Vec2 x, int M);

struct DiagnosticSums {
  double eps = 0.0;
  int M = 0;                       // mode cutoff ceil(eps^{-gamma}), capped
  std::vector<double> mode_abs;    // |sum_k e(-m alpha_k.x0 / eps) A_m(alpha_k)|, m=1..M
  double sum_I = 0.0;              // d_alpha * sum over m != 0
  double sum_II = 0.0;             // sum_k integral over the angle cell of |A_0 - A_0(alpha_k)|
  double sum_I_normalized = 0.0;   // sum_I / (sqrt(eps) log(1/eps))
  double sum_II_normalized = 0.0;
  // Raw coefficients A_m(alpha_k), am_table[k - k_lo][m], m = 0..M.
  std::vector<std::vector<std::complex<double>>> am_table;
  int k_lo = 0;
};

int mode_cutoff(double eps, double beta, int cap = 64);

DiagnosticSums diagnostic_sums(const Phantom& ph, const KernelSet& ks,
                               const SinogramGrid& grid, Vec2 x0,
                               int threads = 1, int cap = 64);

}  // namespace roughtomo
