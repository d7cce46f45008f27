#pragma once

// Phantom geometry: a circular arc with an interior-normal coordinate frame,
// a rough perturbation layer riding on it, and closed-form line integrals of
// the perturbation indicator (the workhorse behind data generation).

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roughtomo/errors.hpp"
#include "roughtomo/perturbation.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

// Arc y(u) = center + radius * e(u + phase), u in [-arc_halfwidth, arc_halfwidth],
// where e(b) = (cos b, sin b). The interior unit normal is theta(u) = -e(u + phase)
// (pointing from the curve toward the center), and curve coordinates are
// x = y(u) + t * theta(u), i.e. t = radius - |x - center| > 0 inside.
struct BaseCurve {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  double arc_halfwidth = 0.3;  // must lie in (0, pi/4)
  double phase = 0.0;

  Vec2 point(double u) const;
  Vec2 normal(double u) const;    // interior unit normal theta(u)
  Vec2 tangent(double u) const;   // unit tangent y'(u)/radius
  void validate() const;          // ValidationError on bad radius/halfwidth
};

// (u, t) of a point near the arc; CoordinateFailure at the center where the
// frame degenerates, or when the angular coordinate falls outside the arc by
// more than `slack`.
std::pair<double, double> curve_coords(const BaseCurve& c, Vec2 x,
                                       double slack = 1e-9);
Vec2 curve_point_from(const BaseCurve& c, double u, double t);

enum class PhantomMode { kPerturbationOnly, kFull };

class Phantom {
 public:
  Phantom(BaseCurve curve, PerturbationProfile profile, double jump,
          PhantomMode mode = PhantomMode::kPerturbationOnly);

  const BaseCurve& curve() const { return curve_; }
  const PerturbationProfile& profile() const { return profile_; }
  double jump() const { return jump_; }
  PhantomMode mode() const { return mode_; }

  // Normal displacement of the perturbed edge at arc parameter u.
  double edge_height(double u, double eps) const {
    return profile_.eval_Heps(u, eps);
  }
  // Layer half-thickness bound: |H_eps| <= eps * sup_bound.
  double layer_bound(double eps) const { return eps * profile_.sup_bound(); }

  // The perturbation part f_eps^p at a point (+jump where material was added,
  // -jump where removed, 0 elsewhere), and the full phantom including the
  // base disk when mode == kFull.
  double eval_fpe(Vec2 x, double eps) const;
  double eval_full(Vec2 x, double eps) const;

  // Line integral of the perturbation part over the line with unit normal
  // alpha_vec(alpha) = (cos alpha, sin alpha) and offset p. Closed form for
  // the lattice profile; bracketed root solves per monotone micro-interval
  // for the continuous kinds. Exact up to root-finding tolerance.
  double radon_perturbation(double alpha, double p, double eps) const;
  // Chord length of the base disk times jump (kFull mode's smooth part).
  double radon_disk(double alpha, double p) const;
  double radon(double alpha, double p, double eps) const;

  // Interval certain to contain the support of p -> radon(alpha, p, eps).
  std::pair<double, double> p_support(double alpha, double eps) const;

  // Total mass of the perturbation part: jump * signed strip area
  // integral of H_eps(u) (radius - H_eps(u)/2) du over the arc.
  double strip_mass(double eps) const;

  std::uint64_t hash() const;

 private:
  BaseCurve curve_;
  PerturbationProfile profile_;
  double jump_;
  PhantomMode mode_;

  double radon_lattice(double pa, double shift, double alpha, double eps) const;
  double radon_continuous(double pa, double shift, double alpha, double eps) const;
};

enum class CaseLabel { kOnCurve, kTangent, kTransverse };
std::string case_label_name(CaseLabel c);
CaseLabel case_label_from_name(const std::string& s);

struct DiophantineScreen;  // numtheory.hpp

struct EvalPoint {
  Vec2 x0{0.0, 0.0};
  CaseLabel label = CaseLabel::kOnCurve;
  double kappa = 0.0;          // angular-step ratio, d_alpha = kappa * eps
  double s1 = 0.0;             // kappa * |x0|, the screened combination
  double s2 = 0.0;             // kappa * |tangent . x0| (on-curve case only)
  double tangency_margin = 0.0;  // distance from x0 to the arc's tangent lines
                                 // through the origin (genericity condition)
  double eta_hat = 0.0;        // irrationality exponent estimate for s1
  double screen_stat = 0.0;    // min_m m^(eta_hat + 1/2) <m s1>
};

struct PointSpec {
  CaseLabel label = CaseLabel::kOnCurve;
  double kappa = 0.0;          // 0 = auto: golden ratio / |x0|
  double tangent_offset = 0.9; // case B: x0 = y(0) - offset * tangent
  Vec2 interior_offset{0.1, 0.07};  // case C: x0 = center + offset
  int screen_M = 512;
};

// Build and screen the evaluation point for the requested case. Throws
// GenericityFailure when the Diophantine or geometric screen rejects it.
EvalPoint select_point(const Phantom& ph, const PointSpec& spec);

}  // namespace roughtomo
