#include <doctest.h>

#include <cmath>
#include <numbers>

#include "roughtomo/errors.hpp"
#include "roughtomo/perturbation.hpp"
#include "roughtomo/util.hpp"

namespace rt = roughtomo;

namespace {

rt::ProfileParams params() { return rt::ProfileParams{}; }

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("sinusoid: values, sup, exact variation") {
  rt::ProfileParams p = params();
  p.amplitude = 0.8;
  p.frequency = 2.0;
  rt::PerturbationProfile prof(rt::ProfileKind::kSinusoid, p);
  CHECK(prof.eval_H0(0.3) ==
        doctest::Approx(0.8 * std::sin(0.6)).epsilon(1e-15));
  CHECK(prof.sup_bound() == doctest::Approx(0.8));
  // One half-period 0 -> pi/freq: up A and back down, total 2A.
  double half = std::numbers::pi / p.frequency;
  CHECK(prof.total_variation(0.0, half) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(prof.total_variation(0.0, 5.0 * half) ==
        doctest::Approx(8.0).epsilon(1e-12));
  // Rate certificate on assorted intervals.
  for (double l : {0.37, 1.0, 4.2}) {
    CHECK(prof.total_variation(-1.1, -1.1 + l) <=
          prof.tv_rate() * l + prof.jump_allowance() + 1e-12);
  }
}

TEST_CASE("sawtooth: exact one-period variation") {
  rt::ProfileParams p = params();
  p.amplitude = 0.5;
  p.frequency = 3.0;
  rt::PerturbationProfile prof(rt::ProfileKind::kSawtooth, p);
  CHECK(prof.sup_bound() == doctest::Approx(0.5));
  CHECK(prof.eval_H0(0.0) == doctest::Approx(0.0));
  CHECK(prof.eval_H0(0.25 / 3.0) == doctest::Approx(0.5).epsilon(1e-13));
  // One period: up A, down 2A, up A again => 4A.
  CHECK(prof.total_variation(0.0, 1.0 / 3.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("truncated weierstrass: single term has cosine variation") {
  rt::ProfileParams p = params();
  p.amplitude = 0.7;
  p.terms = 1;
  rt::PerturbationProfile prof(rt::ProfileKind::kTruncatedWeierstrass, p);
  // One term: 0.7 cos(pi x); TV over [0, 2] is 4 * 0.7.
  CHECK(prof.eval_H0(0.0) == doctest::Approx(0.7).epsilon(1e-15));
  double tv = prof.total_variation(0.0, 2.0);
  CHECK(std::abs(tv - 2.8) <= 1e-5 + prof.refinement_error());
}

TEST_CASE("truncated weierstrass: certificates hold for the default series") {
  rt::PerturbationProfile prof(rt::ProfileKind::kTruncatedWeierstrass,
                               params());
  // sup bound: sum of term amplitudes, attained at x = 0.
  double s = 0.0, amp = 1.0;
  for (int n = 0; n < params().terms; ++n, amp *= params().weier_a) s += amp;
  CHECK(prof.sup_bound() == doctest::Approx(s).epsilon(1e-14));
  CHECK(prof.eval_H0(0.0) == doctest::Approx(s).epsilon(1e-14));
  double tv = prof.total_variation(0.0, 3.0);
  CHECK(tv > 0.0);
  CHECK(tv <= prof.tv_rate() * 3.0 + 1e-9);
  // divergent-variation parameters are rejected up front
  rt::ProfileParams bad = params();
  bad.weier_a = 0.6;
  bad.weier_b = 2.0;  // a*b >= 1
  CHECK_THROWS_AS(
      rt::PerturbationProfile(rt::ProfileKind::kTruncatedWeierstrass, bad),
      rt::ValidationError);
}

TEST_CASE("lattice: cell structure, jump bound, determinism") {
  rt::ProfileParams p = params();
  rt::PerturbationProfile prof(rt::ProfileKind::kPiecewiseConstantLattice, p);
  // Piecewise constant on cells of width lattice_step.
  CHECK(prof.eval_H0(0.01) == prof.eval_H0(0.24));
  CHECK(prof.eval_H0(-0.01) == prof.eval_H0(-0.24));
  CHECK(prof.eval_H0(0.26) == prof.lattice_value(1));
  // Adjacent-cell jumps bounded by jump_bound, values bounded by amplitude.
  double worst_jump = 0.0, worst_val = 0.0;
  for (int i = -2000; i < 2000; ++i) {
    worst_jump = std::max(worst_jump, std::abs(prof.lattice_value(i + 1) -
                                               prof.lattice_value(i)));
    worst_val = std::max(worst_val, std::abs(prof.lattice_value(i)));
  }
  CHECK(worst_jump <= p.jump_bound + 1e-15);
  CHECK(worst_val <= p.amplitude + 1e-15);
  // Exact variation: sum of jumps across interior boundaries.
  double tv = prof.total_variation(-0.1, 1.1);
  double expect = 0.0;
  for (int i = 0; i <= 4; ++i)
    expect += std::abs(prof.lattice_value(i) - prof.lattice_value(i - 1));
  CHECK(tv == doctest::Approx(expect).epsilon(1e-15));
  // Same seed reproduces; a different seed does not.
  rt::PerturbationProfile again(rt::ProfileKind::kPiecewiseConstantLattice, p);
  rt::ProfileParams p2 = p;
  p2.seed = 12345;
  rt::PerturbationProfile other(rt::ProfileKind::kPiecewiseConstantLattice, p2);
  bool same = true, differs = false;
  for (int i = -100; i <= 100; ++i) {
    same = same && (prof.lattice_value(i) == again.lattice_value(i));
    differs = differs || (prof.lattice_value(i) != other.lattice_value(i));
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("rescaled edge: eval_Heps(u, eps) = eps * H0(u / sqrt(eps))") {
  rt::PerturbationProfile prof(rt::ProfileKind::kSinusoid, params());
  for (double eps : {0.25, 1.0 / 64.0}) {
    for (double u : {0.0, 0.013, -0.2}) {
      CHECK(prof.eval_Heps(u, eps) ==
            doctest::Approx(eps * prof.eval_H0(u / std::sqrt(eps)))
                .epsilon(1e-15));
    }
  }
}

TEST_CASE("zero profile and parameter validation") {
  rt::PerturbationProfile z(rt::ProfileKind::kZero, params());
  CHECK(z.sup_bound() == 0.0);
  CHECK(z.eval_H0(0.4) == 0.0);
  CHECK(z.total_variation(-3.0, 3.0) == 0.0);

  rt::ProfileParams bad = params();
  bad.amplitude = -1.0;
  CHECK_THROWS_AS(rt::PerturbationProfile(rt::ProfileKind::kSinusoid, bad),
                  rt::ValidationError);
  bad = params();
  bad.frequency = 0.0;
  CHECK_THROWS_AS(rt::PerturbationProfile(rt::ProfileKind::kSinusoid, bad),
                  rt::ValidationError);
  bad = params();
  bad.jump_bound = 2.0;  // exceeds amplitude
  CHECK_THROWS_AS(
      rt::PerturbationProfile(rt::ProfileKind::kPiecewiseConstantLattice, bad),
      rt::ValidationError);
  CHECK_THROWS_AS(rt::profile_kind_from_name("fractal"), rt::ValidationError);
  CHECK(rt::profile_kind_from_name("lattice") ==
        rt::ProfileKind::kPiecewiseConstantLattice);
}

}  // TEST_SUITE
