#pragma once

// Rough edge-perturbation profiles H0 with certified sup and total-variation
// rates. The physical perturbation is H_eps(u) = eps * H0(u / sqrt(eps)):
// amplitude O(eps) normal to the curve, features on the O(sqrt(eps)) scale
// along it, so the variation of H_eps over an arc length L is
// (tv_rate * L / sqrt(eps)) * eps = tv_rate * L * sqrt(eps).

#include <cstdint>
#include <string>
#include <vector>

#include "roughtomo/errors.hpp"

namespace roughtomo {

enum class ProfileKind {
  kZero,
  kSinusoid,
  kSawtooth,
  kTruncatedWeierstrass,
  kPiecewiseConstantLattice,
};

std::string profile_kind_name(ProfileKind k);
ProfileKind profile_kind_from_name(const std::string& name);  // ValidationError

struct ProfileParams {
  double amplitude = 1.0;
  double frequency = 1.0;   // sinusoid / sawtooth
  double weier_a = 0.5;     // amplitude ratio, |a| < 1
  double weier_b = 1.9;     // frequency ratio; requires a*b < 1 for bounded TV
  int terms = 8;            // Weierstrass truncation: n = 0..terms-1
  double lattice_step = 0.25;
  double jump_bound = 0.5;  // max jump between adjacent lattice cells
  std::uint64_t seed = 7;
};

class PerturbationProfile {
 public:
  PerturbationProfile(ProfileKind kind, const ProfileParams& params);

  ProfileKind kind() const { return kind_; }
  const ProfileParams& params() const { return par_; }

  double eval_H0(double x) const;
  double eval_Heps(double u, double eps) const;  // eps * H0(u / sqrt(eps))

  // Exact total variation of H0 over [a, b] where closed forms exist
  // (piecewise-monotone and lattice kinds); dyadic refinement with a
  // recorded convergence defect for the Weierstrass sum.
  double total_variation(double a, double b) const;
  double refinement_error() const { return refine_err_; }

  double sup_bound() const { return sup_; }     // sup |H0|, certified
  double tv_rate() const { return tv_rate_; }   // TV(H0, [x,x+1]) <= tv_rate
  // Largest admissible single jump of H0 (zero for continuous kinds); the
  // lattice walk's steps are clamped so jumps never exceed this.
  double jump_allowance() const { return jump_allow_; }
  // Lipschitz bound |H0'| for the continuous kinds (0 for lattice).
  double deriv_bound() const { return deriv_bound_; }

  // Lattice access (cell value on [i*step, (i+1)*step)); ValidationError for
  // non-lattice kinds. H0 is right-continuous at cell boundaries.
  double lattice_value(std::int64_t i) const;
  double lattice_step() const { return par_.lattice_step; }

  std::uint64_t hash() const;  // stable content hash for cache manifests

 private:
  ProfileKind kind_;
  ProfileParams par_;
  double sup_ = 0.0, tv_rate_ = 0.0, jump_allow_ = 0.0, deriv_bound_ = 0.0;
  mutable double refine_err_ = 0.0;  // defect of the last variation refinement
  std::vector<double> lattice_;   // cells -n_cells_..n_cells_
  std::int64_t n_cells_ = 0;
  std::vector<double> weier_amp_, weier_freq_;

  double weierstrass(double x) const;
  double sawtooth(double x) const;
};

}  // namespace roughtomo
