#include "roughtomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roughtomo {

namespace {
constexpr double kPi = std::numbers::pi;
}

double reconstruct_at(const Sinogram& s, const KernelSet& ks, Vec2 x) {
  return reconstruct_at_padded(s, ks, x, 0);
}

double reconstruct_at_padded(const Sinogram& s, const KernelSet& ks, Vec2 x,
                             int extra) {
  const SinogramGrid& g = s.grid;
  const double eps = g.eps;
  const SymmetricTable& psi = ks.psi_table();
  NeumaierSum acc;
  for (int k = g.k_lo; k <= g.k_hi; ++k) {
    const SinogramRow& row = s.rows[k - g.k_lo];
    if (row.v.empty()) continue;
    Vec2 av = unit_vec(g.alpha(k));
    double qx = (av.dot(x) - g.p_bar) / eps;
    // Psi((alpha_k.x - p_j)/eps) = Psi(qx - j)
    int n = static_cast<int>(row.v.size());
    for (int i = -extra; i < n + extra; ++i) {
      double vj = (i >= 0 && i < n) ? row.v[i] : 0.0;
      if (vj == 0.0) continue;
      acc.add(psi(qx - (row.j0 + i)) * vj);
    }
  }
  return -(g.dalpha() / (2.0 * kPi * eps)) * acc.value();
}

LocalPatch LocalPatch::make(Vec2 x0, double eps, double box_halfwidth,
                            double step) {
  if (!(box_halfwidth > 0.0) || !(step > 0.0) || step > box_halfwidth)
    throw ValidationError("patch: need 0 < step <= box halfwidth");
  LocalPatch p;
  p.x0 = x0;
  p.eps = eps;
  int m = static_cast<int>(std::lround(box_halfwidth / step));
  p.side = 2 * m + 1;
  p.xcheck.reserve(static_cast<size_t>(p.side) * p.side);
  for (int iy = -m; iy <= m; ++iy)
    for (int ix = -m; ix <= m; ++ix)
      p.xcheck.push_back({ix * step, iy * step});
  return p;
}

RemainderField remainder_field(const Phantom& ph, const Sinogram& s,
                               const KernelSet& ks, const LocalPatch& patch,
                               int threads) {
  RemainderField f;
  f.patch = patch;
  size_t n = patch.xcheck.size();
  f.f_rec.assign(n, 0.0);
  f.dtb = dtb_predict(ks, ph, patch.x0, patch.xcheck, patch.eps);
  parallel_for(n, threads, [&](size_t i) {
    Vec2 x = patch.x0 + patch.xcheck[i] * patch.eps;
    f.f_rec[i] = reconstruct_at(s, ks, x);
  });
  f.remainder.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    f.remainder[i] = f.f_rec[i] - f.dtb[i];
    f.sup_norm = std::max(f.sup_norm, std::abs(f.remainder[i]));
    f.max_dtb = std::max(f.max_dtb, std::abs(f.dtb[i]));
    f.max_frec = std::max(f.max_frec, std::abs(f.f_rec[i]));
  }
  return f;
}

}  // namespace roughtomo
