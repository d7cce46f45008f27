#pragma once

// Filtered-backprojection style reconstruction from the discrete samples and
// the remainder analysis against the predicted transition behavior.

#include <vector>

#include "roughtomo/kernels.hpp"
#include "roughtomo/phantom.hpp"
#include "roughtomo/sinogram.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

// f_rec(x) = -(d_alpha / (2 pi eps)) * sum_k sum_j Psi((alpha_k . x - p_j)/eps) v[k][j],
// compensated accumulation in fixed k-major order (bitwise deterministic).
double reconstruct_at(const Sinogram& s, const KernelSet& ks, Vec2 x);

// Same sum with the interpolation row padded by `extra` cells of zeros on
// both sides of each stored row -- used to certify tail truncation.
double reconstruct_at_padded(const Sinogram& s, const KernelSet& ks, Vec2 x,
                             int extra);

struct LocalPatch {
  Vec2 x0{0.0, 0.0};
  double eps = 0.0;
  std::vector<Vec2> xcheck;  // offsets: x = x0 + eps * xcheck
  int side = 0;              // grid is side x side, row-major, x2 outer

  static LocalPatch make(Vec2 x0, double eps, double box_halfwidth,
                         double step);
};

struct RemainderField {
  LocalPatch patch;
  std::vector<double> f_rec;
  std::vector<double> dtb;
  std::vector<double> remainder;  // f_rec - dtb
  double sup_norm = 0.0;          // max |remainder| over the patch
  double max_dtb = 0.0;
  double max_frec = 0.0;
};

RemainderField remainder_field(const Phantom& ph, const Sinogram& s,
                               const KernelSet& ks, const LocalPatch& patch,
                               int threads = 1);

}  // namespace roughtomo
