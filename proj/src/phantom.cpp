#include "roughtomo/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughtomo/numtheory.hpp"
#include "roughtomo/quadrature.hpp"

namespace roughtomo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGolden = 1.6180339887498948482;

double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double fa, double fb) {
  // f(a), f(b) of opposite sign; plain bisection (root only gates interval
  // endpoints of an integral, 1e-16 relative is plenty).
  for (int it = 0; it < 80 && b - a > 1e-17 * (1.0 + std::abs(a)); ++it) {
    double m = 0.5 * (a + b), fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  (void)fb;
  return 0.5 * (a + b);
}

}  // namespace

// ---------------------------------------------------------------------------
// BaseCurve

Vec2 BaseCurve::point(double u) const {
  return center + unit_vec(u + phase) * radius;
}

Vec2 BaseCurve::normal(double u) const { return unit_vec(u + phase) * -1.0; }

Vec2 BaseCurve::tangent(double u) const { return unit_vec(u + phase).perp(); }

void BaseCurve::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ValidationError("curve.radius: must be positive and finite");
  if (!(arc_halfwidth > 0.0 && arc_halfwidth < 0.25 * kPi))
    throw ValidationError("curve.arc_halfwidth: need 0 < halfwidth < pi/4");
}

std::pair<double, double> curve_coords(const BaseCurve& c, Vec2 x, double slack) {
  Vec2 rel = x - c.center;
  double r = rel.norm();
  if (r < 1e-12)
    throw CoordinateFailure("curve_coords: point at the curvature center");
  double u = std::remainder(std::atan2(rel.y, rel.x) - c.phase, 2.0 * kPi);
  if (std::abs(u) > c.arc_halfwidth + slack)
    throw CoordinateFailure("curve_coords: point outside the arc sector");
  return {u, c.radius - r};
}

Vec2 curve_point_from(const BaseCurve& c, double u, double t) {
  return c.point(u) + c.normal(u) * t;
}

// ---------------------------------------------------------------------------
// Phantom

Phantom::Phantom(BaseCurve curve, PerturbationProfile profile, double jump,
                 PhantomMode mode)
    : curve_(curve), profile_(std::move(profile)), jump_(jump), mode_(mode) {
  curve_.validate();
  if (!(jump_ > 0.0) || !std::isfinite(jump_))
    throw ValidationError("phantom.jump: must be positive and finite");
}

double Phantom::eval_fpe(Vec2 x, double eps) const {
  Vec2 rel = x - curve_.center;
  double r = rel.norm();
  if (r < 1e-12) return 0.0;
  double u = std::remainder(std::atan2(rel.y, rel.x) - curve_.phase, 2.0 * kPi);
  if (std::abs(u) > curve_.arc_halfwidth) return 0.0;
  double t = curve_.radius - r;
  double h = profile_.eval_Heps(u, eps);
  if (h > 0.0 && t > 0.0 && t <= h) return jump_;
  if (h < 0.0 && t < 0.0 && t >= h) return -jump_;
  return 0.0;
}

double Phantom::eval_full(Vec2 x, double eps) const {
  double base = ((x - curve_.center).norm() < curve_.radius) ? jump_ : 0.0;
  return base + eval_fpe(x, eps);
}

double Phantom::radon_disk(double alpha, double p) const {
  double P = p - unit_vec(alpha).dot(curve_.center);
  double R = curve_.radius;
  if (std::abs(P) >= R) return 0.0;
  return jump_ * 2.0 * std::sqrt(R * R - P * P);
}

double Phantom::radon(double alpha, double p, double eps) const {
  double v = radon_perturbation(alpha, p, eps);
  if (mode_ == PhantomMode::kFull) v += radon_disk(alpha, p);
  return v;
}

// The line with normal angle alpha and offset p meets the circle of radius
// R - t at cos(xi) = +-(p - alpha_vec.center)/(R - t) where xi is the polar
// angle against alpha_vec.  Along the line, arclength converts to xi via
// dl = Pa sec^2(xi) dxi, so each maximal sub-interval of the rough layer
// contributes jump * chi * Pa * (tan xi_hi - tan xi_lo) exactly.  The layer
// condition 0 < t*(u) <= H (or H <= t* < 0) is resolved per lattice cell in
// closed form, or by bracketed root finding for the continuous profiles.
double Phantom::radon_perturbation(double alpha, double p, double eps) const {
  if (profile_.kind() == ProfileKind::kZero) return 0.0;
  const double R = curve_.radius;
  double P = p - unit_vec(alpha).dot(curve_.center);
  double hbar = layer_bound(eps) * (1.0 + 1e-12) + 1e-300;
  if (hbar > 0.45 * R)
    throw ValidationError("radon_perturbation: layer too thick for the frame");
  double Pa = std::abs(P);
  if (Pa >= R + hbar || Pa < 1e-300) return 0.0;
  double shift = (P >= 0.0) ? 0.0 : kPi;
  if (profile_.kind() == ProfileKind::kPiecewiseConstantLattice)
    return radon_lattice(Pa, shift, alpha, eps);
  return radon_continuous(Pa, shift, alpha, eps);
}

namespace {

struct XiWindow {
  double lo, hi;  // xi interval within (-pi/2, pi/2)
};

// Intersection of the admissible band cos(xi) in [c_lo, c_hi] with sign
// symmetry: one or two xi windows, split at 0 so each is cos-monotone.
void admissible_windows(double c_lo, double c_hi, std::vector<XiWindow>& out) {
  out.clear();
  if (!(c_hi > c_lo)) return;
  double xi_out = std::acos(std::min(1.0, c_lo));   // larger |xi|
  double xi_in = std::acos(std::min(1.0, c_hi));    // smaller |xi|
  if (xi_out <= xi_in) return;
  out.push_back({-xi_out, -xi_in});
  out.push_back({xi_in, xi_out});
}

}  // namespace

// Lattice profile: H is constant per cell, so the inside set per cell is a
// closed-form cos band; tan at band edges is algebraic in the cosine.
double Phantom::radon_lattice(double Pa, double shift, double alpha,
                              double eps) const {
  const double R = curve_.radius;
  const double a = curve_.arc_halfwidth;
  const double sqe = std::sqrt(eps);
  const double du_cell = profile_.lattice_step() * sqe;
  const double hbar = layer_bound(eps) * (1.0 + 1e-12) + 1e-300;

  // xi(u) = u + phase - alpha - shift (+2 pi k), increasing in u.
  double base = std::remainder(curve_.phase - alpha - shift, 2.0 * kPi);
  double c_lo_g = Pa / (R + hbar);
  double c_hi_g = std::min(1.0, Pa / (R - hbar));
  std::vector<XiWindow> wins;
  if (c_hi_g >= 1.0) {
    double xo = std::acos(std::min(1.0, c_lo_g));
    wins.push_back({-xo, 0.0});
    wins.push_back({0.0, xo});
  } else {
    admissible_windows(c_lo_g, c_hi_g, wins);
  }

  NeumaierSum total;
  for (double wrap : {-2.0 * kPi, 0.0, 2.0 * kPi}) {
    double ub = base + wrap;  // xi = u + ub
    for (const XiWindow& w : wins) {
      double ulo = std::max(-a, w.lo - ub);
      double uhi = std::min(a, w.hi - ub);
      if (!(uhi > ulo)) continue;
      // iterate lattice cells covering [ulo, uhi]
      std::int64_t i0 = static_cast<std::int64_t>(std::floor(ulo / du_cell));
      std::int64_t i1 = static_cast<std::int64_t>(std::floor((uhi - 1e-300) / du_cell));
      for (std::int64_t i = i0; i <= i1; ++i) {
        double cu_lo = std::max(ulo, i * du_cell);
        double cu_hi = std::min(uhi, (i + 1) * du_cell);
        if (!(cu_hi > cu_lo)) continue;
        double h = eps * profile_.lattice_value(i);
        if (h == 0.0) continue;
        double chi = h > 0.0 ? 1.0 : -1.0;
        // cos band for 0 < t* <= h (or h <= t* < 0)
        double cb_lo, cb_hi;
        if (h > 0.0) {
          cb_lo = Pa / R;
          cb_hi = Pa / (R - h);
        } else {
          cb_lo = Pa / (R - h);
          cb_hi = Pa / R;
        }
        cb_hi = std::min(1.0, cb_hi);
        if (!(cb_hi > cb_lo)) continue;
        double xi_out = std::acos(std::max(-1.0, std::min(1.0, cb_lo)));
        double xi_in = std::acos(std::max(-1.0, std::min(1.0, cb_hi)));
        // tan at the band edges, algebraic in the cosine (sign applied later)
        double tan_out = std::sqrt(std::max(0.0, 1.0 - cb_lo * cb_lo)) / cb_lo;
        double tan_in = std::sqrt(std::max(0.0, 1.0 - cb_hi * cb_hi)) / cb_hi;
        // the cell's xi range
        double xl = cu_lo + ub, xh = cu_hi + ub;
        for (int side = -1; side <= 1; side += 2) {
          double blo = side < 0 ? -xi_out : xi_in;
          double bhi = side < 0 ? -xi_in : xi_out;
          double lo = std::max(blo, xl), hi = std::min(bhi, xh);
          if (!(hi > lo)) continue;
          double tlo = (lo == blo) ? (side < 0 ? -tan_out : tan_in) : std::tan(lo);
          double thi = (hi == bhi) ? (side < 0 ? -tan_in : tan_out) : std::tan(hi);
          total.add(chi * Pa * (thi - tlo));
        }
      }
    }
  }
  return jump_ * total.value();
}

// Continuous profiles: resolve the inside set by sign changes of
// D(u) = t*(u) - H_eps(u) and of t*(u) across micro-intervals.
double Phantom::radon_continuous(double Pa, double shift, double alpha,
                                 double eps) const {
  const double R = curve_.radius;
  const double a = curve_.arc_halfwidth;
  const double sqe = std::sqrt(eps);
  const double hbar = layer_bound(eps) * (1.0 + 1e-12) + 1e-300;

  double base = std::remainder(curve_.phase - alpha - shift, 2.0 * kPi);
  double c_lo_g = Pa / (R + hbar);
  double c_hi_g = std::min(1.0, Pa / (R - hbar));
  std::vector<XiWindow> wins;
  if (c_hi_g >= 1.0) {
    double xo = std::acos(std::min(1.0, c_lo_g));
    wins.push_back({-xo, 0.0});
    wins.push_back({0.0, xo});
  } else {
    admissible_windows(c_lo_g, c_hi_g, wins);
  }

  // micro-interval scale: fraction of the profile's feature size
  double feature = sqe;
  switch (profile_.kind()) {
    case ProfileKind::kSinusoid:
      feature = sqe * std::min(1.0, kPi / profile_.params().frequency);
      break;
    case ProfileKind::kSawtooth:
      feature = sqe * 0.25 / profile_.params().frequency;
      break;
    case ProfileKind::kTruncatedWeierstrass: {
      double fmax = kPi * std::pow(profile_.params().weier_b,
                                   profile_.params().terms - 1);
      feature = sqe * kPi / fmax;
      break;
    }
    default:
      break;
  }
  double micro = std::max(1e-9, feature / 8.0);

  auto tstar = [&](double xi) { return R - Pa / std::cos(xi); };
  NeumaierSum total;
  for (double wrap : {-2.0 * kPi, 0.0, 2.0 * kPi}) {
    double ub = base + wrap;
    for (const XiWindow& w : wins) {
      double ulo = std::max(-a, w.lo - ub);
      double uhi = std::min(a, w.hi - ub);
      if (!(uhi > ulo)) continue;

      // breakpoints: micro grid plus the t* = 0 crossing if present
      std::vector<double> nodes;
      int nsub = std::max(1, static_cast<int>(std::ceil((uhi - ulo) / micro)));
      nodes.reserve(nsub + 2);
      for (int i = 0; i <= nsub; ++i)
        nodes.push_back(ulo + (uhi - ulo) * i / nsub);
      if (Pa < R) {
        double xi0 = std::acos(Pa / R);
        for (double cand : {xi0 - ub, -xi0 - ub})
          if (cand > ulo && cand < uhi) nodes.push_back(cand);
      }
      std::sort(nodes.begin(), nodes.end());

      auto D = [&](double u) {
        return tstar(u + ub) - profile_.eval_Heps(u, eps);
      };
      auto inside = [&](double u) {
        double t = tstar(u + ub), h = profile_.eval_Heps(u, eps);
        if (h > 0.0 && t > 0.0 && t <= h) return 1;
        if (h < 0.0 && t < 0.0 && t >= h) return -1;
        return 0;
      };

      for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        double u1 = nodes[i], u2 = nodes[i + 1];
        if (!(u2 > u1)) continue;
        // roots of D and of t* partition the micro-interval
        std::vector<double> cuts{u1, u2};
        double d1 = D(u1), dm = D(0.5 * (u1 + u2)), d2 = D(u2);
        if ((d1 < 0) != (dm < 0))
          cuts.push_back(bisect_root(D, u1, 0.5 * (u1 + u2), d1, dm));
        if ((dm < 0) != (d2 < 0))
          cuts.push_back(bisect_root(D, 0.5 * (u1 + u2), u2, dm, d2));
        auto T = [&](double u) { return tstar(u + ub); };
        double t1 = T(u1), t2 = T(u2);
        if ((t1 < 0) != (t2 < 0))
          cuts.push_back(bisect_root(T, u1, u2, t1, t2));
        std::sort(cuts.begin(), cuts.end());
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
          if (!(cuts[c + 1] > cuts[c])) continue;
          int chi = inside(0.5 * (cuts[c] + cuts[c + 1]));
          if (chi == 0) continue;
          double tlo = std::tan(cuts[c] + ub), thi = std::tan(cuts[c + 1] + ub);
          total.add(chi * Pa * (thi - tlo));
        }
      }
    }
  }
  return jump_ * total.value();
}

std::pair<double, double> Phantom::p_support(double alpha, double eps) const {
  const double R = curve_.radius;
  const double a = curve_.arc_halfwidth;
  double hbar = layer_bound(eps) * (1.0 + 1e-12);
  double pc = unit_vec(alpha).dot(curve_.center);
  // cos(phi) over phi in [phase - alpha - a, phase - alpha + a]
  double lo = curve_.phase - alpha - a, hi = curve_.phase - alpha + a;
  double cmin = std::min(std::cos(lo), std::cos(hi));
  double cmax = std::max(std::cos(lo), std::cos(hi));
  // extrema of cos inside the interval
  double k0 = std::ceil(lo / (2.0 * kPi));
  if (2.0 * kPi * k0 <= hi) cmax = 1.0;
  double k1 = std::ceil((lo - kPi) / (2.0 * kPi));
  if (kPi + 2.0 * kPi * k1 <= hi) cmin = -1.0;
  double plo = 1e300, phi_ = -1e300;
  for (double c : {cmin, cmax})
    for (double r : {R - hbar, R + hbar}) {
      plo = std::min(plo, pc + c * r);
      phi_ = std::max(phi_, pc + c * r);
    }
  if (mode_ == PhantomMode::kFull) {
    plo = std::min(plo, pc - R);
    phi_ = std::max(phi_, pc + R);
  }
  return {plo, phi_};
}

double Phantom::strip_mass(double eps) const {
  const double R = curve_.radius;
  const double a = curve_.arc_halfwidth;
  auto integrand = [&](double u) {
    double h = profile_.eval_Heps(u, eps);
    return h * R - 0.5 * h * h;
  };
  if (profile_.kind() == ProfileKind::kZero) return 0.0;
  if (profile_.kind() == ProfileKind::kPiecewiseConstantLattice) {
    double du = profile_.lattice_step() * std::sqrt(eps);
    NeumaierSum s;
    std::int64_t i0 = static_cast<std::int64_t>(std::floor(-a / du));
    std::int64_t i1 = static_cast<std::int64_t>(std::floor(a / du));
    for (std::int64_t i = i0; i <= i1; ++i) {
      double lo = std::max(-a, i * du), hi = std::min(a, (i + 1) * du);
      if (!(hi > lo)) continue;
      double h = eps * profile_.lattice_value(i);
      s.add((h * R - 0.5 * h * h) * (hi - lo));
    }
    return jump_ * s.value();
  }
  std::vector<double> bp;
  double du = std::sqrt(eps) * 0.25;
  for (double u = -a; u < a; u += du) bp.push_back(u);
  bp.push_back(a);
  return jump_ * integrate_adaptive(integrand, bp, 1e-13);
}

std::uint64_t Phantom::hash() const {
  std::uint64_t h = profile_.hash();
  h = fnv1a(&curve_.center, sizeof curve_.center, h);
  h = fnv1a(&curve_.radius, sizeof(double), h);
  h = fnv1a(&curve_.arc_halfwidth, sizeof(double), h);
  h = fnv1a(&curve_.phase, sizeof(double), h);
  h = fnv1a(&jump_, sizeof(double), h);
  h = fnv1a(&mode_, sizeof mode_, h);
  return h;
}

// ---------------------------------------------------------------------------
// Point selection and screening

std::string case_label_name(CaseLabel c) {
  switch (c) {
    case CaseLabel::kOnCurve: return "A";
    case CaseLabel::kTangent: return "B";
    case CaseLabel::kTransverse: return "C";
  }
  return "?";
}

CaseLabel case_label_from_name(const std::string& s) {
  if (s == "A" || s == "a") return CaseLabel::kOnCurve;
  if (s == "B" || s == "b") return CaseLabel::kTangent;
  if (s == "C" || s == "c") return CaseLabel::kTransverse;
  throw ValidationError("point.case: expected A, B, or C");
}

EvalPoint select_point(const Phantom& ph, const PointSpec& spec) {
  const BaseCurve& c = ph.curve();
  EvalPoint pt;
  pt.label = spec.label;
  switch (spec.label) {
    case CaseLabel::kOnCurve:
      pt.x0 = c.point(0.0);
      break;
    case CaseLabel::kTangent: {
      if (!(spec.tangent_offset > 0.05))
        throw ValidationError("point.b_offset: need offset > 0.05");
      pt.x0 = c.point(0.0) - c.tangent(0.0) * spec.tangent_offset;
      break;
    }
    case CaseLabel::kTransverse: {
      double r = spec.interior_offset.norm();
      if (!(r < 0.7 * c.radius))
        throw ValidationError(
            "point.c_dx/c_dy: interior offset must stay well inside the "
            "curvature disk (|offset| < 0.7 radius)");
      pt.x0 = c.center + spec.interior_offset;
      pt.tangency_margin = c.radius - r;
      break;
    }
  }
  double n0 = pt.x0.norm();
  if (n0 < 1e-9)
    throw ValidationError("point: x0 at the origin breaks the angular lattice");
  pt.kappa = spec.kappa > 0.0 ? spec.kappa : kGolden / n0;

  pt.s1 = pt.kappa * n0;
  DiophantineScreen sc1 = screen_scalar(pt.s1, spec.screen_M);
  pt.eta_hat = sc1.eta_hat;
  pt.screen_stat = sc1.min_stat;
  if (!sc1.pass)
    throw GenericityFailure(
        "genericity screen rejected kappa*|x0| (near-resonant lattice): "
        "min stat " +
        std::to_string(sc1.min_stat));

  if (spec.label == CaseLabel::kOnCurve) {
    pt.s2 = pt.kappa * std::abs(c.tangent(0.0).dot(pt.x0));
    DiophantineScreen sc2 = screen_scalar(pt.s2, spec.screen_M);
    if (!sc2.pass)
      throw GenericityFailure(
          "genericity screen rejected the tangential component at x0: "
          "min stat " +
          std::to_string(sc2.min_stat));
  }
  if (spec.label == CaseLabel::kOnCurve || spec.label == CaseLabel::kTangent) {
    // Geometric condition: no tangent line of the arc passes through both
    // the origin and x0.
    double margin = 1e300;
    const int ng = 801;
    for (int i = 0; i < ng; ++i) {
      double u = -c.arc_halfwidth +
                 2.0 * c.arc_halfwidth * i / (ng - 1);
      Vec2 e = unit_vec(u + c.phase);
      double d_origin = std::abs(e.dot(c.point(u)));
      double d_x0 = std::abs(e.dot(pt.x0 - c.point(u)));
      margin = std::min(margin, std::max(d_origin, d_x0));
    }
    pt.tangency_margin = margin;
    if (margin < 1e-3)
      throw GenericityFailure(
          "genericity screen: an arc tangent line through the origin passes "
          "through x0 (margin " +
          std::to_string(margin) + ")");
  }
  return pt;
}

}  // namespace roughtomo
