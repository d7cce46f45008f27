#include "roughtomo/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughtomo/util.hpp"

namespace roughtomo {

namespace {

constexpr std::int64_t kLatticeHalfSpan = 16384;

// Fold v into [-A, A] by a single reflection; 1-Lipschitz, so clamped-walk
// jumps never exceed the raw step size.
double reflect(double v, double A) {
  if (v > A) return 2.0 * A - v;
  if (v < -A) return -2.0 * A - v;
  return v;
}

}  // namespace

std::string profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::kZero: return "zero";
    case ProfileKind::kSinusoid: return "sinusoid";
    case ProfileKind::kSawtooth: return "sawtooth";
    case ProfileKind::kTruncatedWeierstrass: return "weierstrass";
    case ProfileKind::kPiecewiseConstantLattice: return "lattice";
  }
  return "?";
}

ProfileKind profile_kind_from_name(const std::string& name) {
  if (name == "zero") return ProfileKind::kZero;
  if (name == "sinusoid") return ProfileKind::kSinusoid;
  if (name == "sawtooth") return ProfileKind::kSawtooth;
  if (name == "weierstrass") return ProfileKind::kTruncatedWeierstrass;
  if (name == "lattice") return ProfileKind::kPiecewiseConstantLattice;
  throw ValidationError("profile.kind: unknown profile '" + name + "'");
}

PerturbationProfile::PerturbationProfile(ProfileKind kind,
                                         const ProfileParams& params)
    : kind_(kind), par_(params) {
  const double A = par_.amplitude;
  if (!(A >= 0.0) || !std::isfinite(A))
    throw ValidationError("profile.amplitude: must be finite and >= 0");
  switch (kind_) {
    case ProfileKind::kZero:
      sup_ = 0.0;
      break;
    case ProfileKind::kSinusoid:
      if (!(par_.frequency > 0.0))
        throw ValidationError("profile.frequency: must be positive");
      sup_ = A;
      deriv_bound_ = A * par_.frequency;
      tv_rate_ = deriv_bound_;  // |H0'| <= A*freq bounds variation per unit length
      break;
    case ProfileKind::kSawtooth:
      if (!(par_.frequency > 0.0))
        throw ValidationError("profile.frequency: must be positive");
      sup_ = A;
      deriv_bound_ = 4.0 * A * par_.frequency;
      tv_rate_ = deriv_bound_;
      break;
    case ProfileKind::kTruncatedWeierstrass: {
      if (!(std::abs(par_.weier_a) < 1.0))
        throw ValidationError("profile.weier_a: need |a| < 1");
      if (!(par_.weier_b > 1.0))
        throw ValidationError("profile.weier_b: need b > 1");
      if (par_.terms < 1 || par_.terms > 64)
        throw ValidationError("profile.terms: need 1 <= terms <= 64");
      if (!(par_.weier_a * par_.weier_b < 1.0))
        throw ValidationError(
            "profile.weier_a/b: need a*b < 1, otherwise the truncated sum's "
            "variation rate diverges with the term count");
      double amp = 1.0, freq = 1.0, sup = 0.0, dbound = 0.0;
      for (int n = 0; n < par_.terms; ++n) {
        weier_amp_.push_back(A * amp);
        weier_freq_.push_back(std::numbers::pi * freq);
        sup += A * amp;
        dbound += A * amp * std::numbers::pi * freq;
        amp *= par_.weier_a;
        freq *= par_.weier_b;
      }
      sup_ = sup;
      deriv_bound_ = dbound;
      tv_rate_ = dbound;
      break;
    }
    case ProfileKind::kPiecewiseConstantLattice: {
      if (!(par_.lattice_step > 0.0))
        throw ValidationError("profile.lattice_step: must be positive");
      if (!(par_.jump_bound >= 0.0 && par_.jump_bound <= A))
        throw ValidationError("profile.jump_bound: need 0 <= jump <= amplitude");
      lattice_.assign(2 * kLatticeHalfSpan + 1, 0.0);
      auto slot = [&](std::int64_t i) -> double& {
        return lattice_[static_cast<std::size_t>(i + kLatticeHalfSpan)];
      };
      slot(0) = A * (2.0 * seeded_uniform(par_.seed, 0) - 1.0) * 0.5;
      for (std::int64_t i = 1; i <= kLatticeHalfSpan; ++i) {
        double step = par_.jump_bound * (2.0 * seeded_uniform(par_.seed, i) - 1.0);
        slot(i) = reflect(slot(i - 1) + step, A);
      }
      for (std::int64_t i = -1; i >= -kLatticeHalfSpan; --i) {
        double step = par_.jump_bound * (2.0 * seeded_uniform(par_.seed, i) - 1.0);
        slot(i) = reflect(slot(i + 1) + step, A);
      }
      n_cells_ = kLatticeHalfSpan;
      sup_ = A;
      jump_allow_ = par_.jump_bound;
      tv_rate_ = par_.jump_bound / par_.lattice_step;
      break;
    }
  }
}

double PerturbationProfile::weierstrass(double x) const {
  double s = 0.0;
  for (size_t n = 0; n < weier_amp_.size(); ++n)
    s += weier_amp_[n] * std::cos(weier_freq_[n] * x);
  return s;
}

double PerturbationProfile::sawtooth(double x) const {
  // Triangle wave, period 1/frequency, slope +-4*A*frequency, zero ascending
  // at the origin.
  double s = x * par_.frequency;
  s -= std::floor(s);
  double t;
  if (s < 0.25)
    t = 4.0 * s;
  else if (s < 0.75)
    t = 2.0 - 4.0 * s;
  else
    t = 4.0 * s - 4.0;
  return par_.amplitude * t;
}

double PerturbationProfile::lattice_value(std::int64_t i) const {
  if (kind_ != ProfileKind::kPiecewiseConstantLattice)
    throw ValidationError("lattice_value: not a lattice profile");
  i = std::clamp<std::int64_t>(i, -n_cells_, n_cells_);
  return lattice_[static_cast<std::size_t>(i + kLatticeHalfSpan)];
}

double PerturbationProfile::eval_H0(double x) const {
  switch (kind_) {
    case ProfileKind::kZero:
      return 0.0;
    case ProfileKind::kSinusoid:
      return par_.amplitude * std::sin(par_.frequency * x);
    case ProfileKind::kSawtooth:
      return sawtooth(x);
    case ProfileKind::kTruncatedWeierstrass:
      return weierstrass(x);
    case ProfileKind::kPiecewiseConstantLattice:
      return lattice_value(static_cast<std::int64_t>(
          std::floor(x / par_.lattice_step)));
  }
  return 0.0;
}

double PerturbationProfile::eval_Heps(double u, double eps) const {
  if (kind_ == ProfileKind::kZero) return 0.0;
  return eps * eval_H0(u / std::sqrt(eps));
}

double PerturbationProfile::total_variation(double a, double b) const {
  if (!(b >= a)) throw ValidationError("total_variation: need b >= a");
  switch (kind_) {
    case ProfileKind::kZero:
      return 0.0;
    case ProfileKind::kSinusoid:
    case ProfileKind::kSawtooth: {
      // Piecewise monotone: sum |increments| between extrema.
      double period = (kind_ == ProfileKind::kSinusoid)
                          ? std::numbers::pi / par_.frequency
                          : 0.5 / par_.frequency;
      double first_extremum = (kind_ == ProfileKind::kSinusoid)
                                  ? 0.5 * std::numbers::pi / par_.frequency
                                  : 0.25 / par_.frequency;
      std::vector<double> nodes{a};
      double k0 = std::ceil((a - first_extremum) / period);
      for (double x = first_extremum + k0 * period; x < b; x += period)
        if (x > a) nodes.push_back(x);
      nodes.push_back(b);
      double tv = 0.0;
      for (size_t i = 0; i + 1 < nodes.size(); ++i)
        tv += std::abs(eval_H0(nodes[i + 1]) - eval_H0(nodes[i]));
      return tv;
    }
    case ProfileKind::kPiecewiseConstantLattice: {
      // Right-continuous steps: jumps at cell boundaries i*step in (a, b].
      double d = par_.lattice_step;
      std::int64_t i0 = static_cast<std::int64_t>(std::floor(a / d)) + 1;
      std::int64_t i1 = static_cast<std::int64_t>(std::floor(b / d));
      double tv = 0.0;
      for (std::int64_t i = i0; i <= i1; ++i)
        tv += std::abs(lattice_value(i) - lattice_value(i - 1));
      return tv;
    }
    case ProfileKind::kTruncatedWeierstrass: {
      // Dyadic refinement; V_L increases to the true variation.
      double prev = 0.0, cur = 0.0;
      for (int level = 8; level <= 22; ++level) {
        std::size_t n = std::size_t(1) << level;
        if ((b - a) * n > (std::size_t(1) << 24)) break;
        double tv = 0.0, last = weierstrass(a);
        for (std::size_t i = 1; i <= n; ++i) {
          double v = weierstrass(a + (b - a) * i / n);
          tv += std::abs(v - last);
          last = v;
        }
        prev = cur;
        cur = tv;
        if (level > 8 && std::abs(cur - prev) < 1e-7 * std::max(1.0, cur)) break;
      }
      refine_err_ = std::abs(cur - prev);
      return cur;
    }
  }
  return 0.0;
}

std::uint64_t PerturbationProfile::hash() const {
  std::uint64_t h = fnv1a(&kind_, sizeof kind_);
  h = fnv1a(&par_.amplitude, sizeof(double), h);
  h = fnv1a(&par_.frequency, sizeof(double), h);
  h = fnv1a(&par_.weier_a, sizeof(double), h);
  h = fnv1a(&par_.weier_b, sizeof(double), h);
  h = fnv1a(&par_.terms, sizeof(int), h);
  h = fnv1a(&par_.lattice_step, sizeof(double), h);
  h = fnv1a(&par_.jump_bound, sizeof(double), h);
  h = fnv1a(&par_.seed, sizeof(std::uint64_t), h);
  return h;
}

}  // namespace roughtomo
