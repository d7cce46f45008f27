#pragma once

// Discrete sampled data: aperture-averaged line integrals on the lattice
// (alpha_k, p_j) = (alpha_bar + k*kappa*eps, p_bar + j*eps), stored sparsely
// per angle over the support of the phantom's rough layer.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roughtomo/kernels.hpp"
#include "roughtomo/phantom.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

struct SinogramGrid {
  double eps = 0.0;
  double kappa = 0.0;
  double p_bar = 0.0;
  double alpha_bar = 0.0;
  int k_lo = 0, k_hi = -1;  // angles alpha_k, |alpha_k| <= pi/2
  int j_lo = 0, j_hi = -1;  // global offset range (coverage envelope)

  double dp() const { return eps; }
  double dalpha() const { return kappa * eps; }
  double alpha(int k) const { return alpha_bar + k * dalpha(); }
  double p(int j) const { return p_bar + j * eps; }
  int n_angles() const { return k_hi - k_lo + 1; }

  // Angle range covering [-pi/2, pi/2]; offset range covering the phantom
  // support padded by the aperture and interpolation supports.
  static SinogramGrid make(const Phantom& ph, const KernelSet& ks, double eps,
                           double kappa, double p_bar, double alpha_bar);
  void validate() const;
};

struct SinogramRow {
  int j0 = 0;               // global index of v.front()
  std::vector<double> v;    // contiguous nonzero span
};

struct Sinogram {
  SinogramGrid grid;
  std::vector<SinogramRow> rows;  // rows[k - grid.k_lo]
  bool full_mode = false;
  std::uint64_t phantom_hash = 0;
  double quad_tol = 0.0;

  const SinogramRow& row(int k) const { return rows.at(k - grid.k_lo); }
  double value(int k, int j) const;   // zero outside the stored span
  std::size_t cell_count() const;
  std::uint64_t content_hash() const;
};

// values[k][j] = integral of w(sigma) * Radon(alpha_k, p_j - eps*sigma) dsigma
// (the 1/eps aperture normalization cancels under sigma = (p_j - p)/eps).
// Adaptive Gauss panels aligned to the aperture's knots; absolute tolerance
// per cell `tol`. Throws GridCoverageError if the grid cannot hold the
// padded support of any row.
Sinogram sample_data(const Phantom& ph, const SinogramGrid& grid,
                     const KernelSet& ks, int threads = 1, double tol = 1e-10);

// First/last stored j with |value| above `floor` (row support certificate).
std::pair<int, int> data_row_support(const Sinogram& s, int k,
                                     double floor = 1e-12);

// Binary cache with sidecar manifest (grid, hashes, checksum). load() throws
// ValidationError on checksum or provenance mismatch.
void save_sinogram(const Sinogram& s, const std::filesystem::path& stem);
Sinogram load_sinogram(const std::filesystem::path& stem);
std::filesystem::path cache_stem(const std::filesystem::path& dir,
                                 const Phantom& ph, const SinogramGrid& g,
                                 bool full_mode);

}  // namespace roughtomo
