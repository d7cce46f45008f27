#include <doctest.h>

#include <cmath>
#include <numbers>

#include "roughtomo/errors.hpp"
#include "roughtomo/phantom.hpp"
#include "roughtomo/quadrature.hpp"
#include "test_helpers.hpp"

TEST_SUITE("phantom") {

TEST_CASE("curve coordinates round-trip and validate") {
  const rt::BaseCurve& c = shared_phantom().curve();
  for (double u : {-0.29, -0.1, 0.0, 0.17, 0.3}) {
    for (double t : {-0.05, 0.0, 0.02, 0.2}) {
      rt::Vec2 y = rt::curve_point_from(c, u, t);
      auto [uu, tt] = rt::curve_coords(c, y);
      CHECK(std::abs(uu - u) <= 1e-12);
      CHECK(std::abs(tt - t) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(rt::curve_coords(c, c.center), rt::CoordinateFailure);
  CHECK_THROWS_AS(
      rt::curve_coords(c, rt::curve_point_from(c, c.arc_halfwidth + 0.2, 0.0)),
      rt::CoordinateFailure);
  // Unit tangent/normal frame.
  CHECK(std::abs(c.normal(0.1).norm() - 1.0) <= 1e-14);
  CHECK(std::abs(c.tangent(0.1).norm() - 1.0) <= 1e-14);
  CHECK(std::abs(c.normal(0.1).dot(c.tangent(0.1))) <= 1e-14);
}

TEST_CASE("rough-layer indicator: signs, support, arc clipping") {
  const rt::Phantom& ph = shared_phantom();
  const rt::BaseCurve& c = ph.curve();
  const double eps = 1.0 / 16.0;
  int seen = 0;
  for (double u = -0.29; u <= 0.29; u += 0.037) {
    double h = ph.edge_height(u, eps);
    if (h == 0.0) continue;
    ++seen;
    rt::Vec2 mid = rt::curve_point_from(c, u, 0.5 * h);
    CHECK(ph.eval_fpe(mid, eps) ==
          (h > 0.0 ? ph.jump() : -ph.jump()));
    // Outside the layer on both sides.
    CHECK(ph.eval_fpe(rt::curve_point_from(c, u, h > 0 ? h + 0.01 : h - 0.01),
                      eps) == 0.0);
    CHECK(ph.eval_fpe(rt::curve_point_from(c, u, (h > 0 ? -0.01 : 0.01)), eps) ==
          0.0);
  }
  CHECK(seen > 10);
  // Outside the arc sector the perturbation vanishes (no throw).
  CHECK(ph.eval_fpe(rt::curve_point_from(c, c.arc_halfwidth + 0.1, 0.001), eps) ==
        0.0);
  // Full mode adds the unperturbed disk.
  rt::RunConfig cfg = test_config();
  cfg.mode = rt::PhantomMode::kFull;
  rt::Phantom full = rt::make_phantom(cfg);
  CHECK(full.eval_full(c.center, eps) == full.jump());
  CHECK(full.eval_full(c.center + rt::Vec2{2.0 * c.radius, 0.0}, eps) == 0.0);
}

TEST_CASE("disk line integrals: exact chord length") {
  rt::RunConfig cfg = test_config();
  cfg.mode = rt::PhantomMode::kFull;
  rt::Phantom ph = rt::make_phantom(cfg);
  const rt::BaseCurve& c = ph.curve();
  for (double alpha : {0.0, 0.9, -1.2}) {
    for (double poff : {0.0, 0.35, -0.8, 0.999, 1.2}) {
      double p = rt::unit_vec(alpha).dot(c.center) + poff;
      double expect =
          std::abs(poff) < c.radius
              ? ph.jump() * 2.0 * std::sqrt(c.radius * c.radius - poff * poff)
              : 0.0;
      CHECK(std::abs(ph.radon_disk(alpha, p) - expect) <= 1e-13);
    }
  }
}

TEST_CASE("perturbation line integrals match a dense sampling oracle") {
  const rt::Phantom& ph = shared_phantom();
  const rt::BaseCurve& c = ph.curve();
  const double eps = 1.0 / 16.0;
  double worst = 0.0, scale = 0.0;
  int probes = 0;
  for (double u0 : {-0.2, 0.0, 0.12}) {
    for (double da : {0.0, 0.35, -0.6}) {
      rt::Vec2 y = rt::curve_point_from(c, u0, 0.5 * ph.edge_height(u0, eps));
      double alpha = std::atan2(y.y, y.x) + da;  // line through the layer
      rt::Vec2 av = rt::unit_vec(alpha);
      double p = av.dot(y);
      double val = ph.radon(alpha, p, eps);
      // Midpoint sampling along the line; f^p is piecewise constant, so the
      // error is O(#transitions * step).
      const int n = 600000;
      rt::Vec2 perp = av.perp();
      double L = c.radius + 0.5;
      rt::NeumaierSum acc;
      for (int i = 0; i < n; ++i) {
        double s = -L + 2.0 * L * (i + 0.5) / n;
        acc.add(ph.eval_fpe(av * p + perp * s, eps));
      }
      double oracle = acc.value() * (2.0 * L / n);
      worst = std::max(worst, std::abs(val - oracle));
      scale = std::max(scale, std::abs(val));
      ++probes;
    }
  }
  CHECK(probes == 9);
  CHECK(scale > 1e-4);          // the probe lines do cross the layer
  CHECK(worst <= 2e-4);         // sampling-oracle resolution
}

TEST_CASE("offset support window brackets the data") {
  const rt::Phantom& ph = shared_phantom();
  const double eps = 1.0 / 32.0;
  for (double alpha : {-0.7, 0.1, 1.3}) {
    auto [lo, hi] = ph.p_support(alpha, eps);
    CHECK(hi > lo);
    CHECK(ph.radon(alpha, lo - 1e-6, eps) == 0.0);
    CHECK(ph.radon(alpha, hi + 1e-6, eps) == 0.0);
    CHECK(ph.radon(alpha, hi + 0.5, eps) == 0.0);
  }
}

TEST_CASE("mass consistency: line integrals integrate to the strip mass") {
  const rt::Phantom& ph = shared_phantom();
  const double eps = 1.0 / 16.0;
  double mass = ph.strip_mass(eps);
  CHECK(std::abs(mass) > 1e-6);  // generic profile: nonzero net area
  for (double alpha : {0.05, 0.95}) {
    auto [lo, hi] = ph.p_support(alpha, eps);
    double total = rt::integrate_adaptive(
        [&](double p) { return ph.radon(alpha, p, eps); }, lo, hi, 1e-10);
    CHECK(std::abs(total - mass) <= 1e-7);
  }
}

TEST_CASE("evaluation points: labels, screening, margins") {
  const rt::Phantom& ph = shared_phantom();
  rt::PointSpec spec;  // case A by default
  rt::EvalPoint a = rt::select_point(ph, spec);
  CHECK(a.label == rt::CaseLabel::kOnCurve);
  CHECK(rt::case_label_name(a.label) == "A");
  // On the curve: coordinates say t = 0.
  auto [ua, ta] = rt::curve_coords(ph.curve(), a.x0);
  CHECK(std::abs(ua) <= 1e-12);
  CHECK(std::abs(ta) <= 1e-12);
  CHECK(a.kappa * a.x0.norm() == doctest::Approx(std::numbers::phi).epsilon(1e-12));
  CHECK(a.screen_stat >= 1e-3);
  CHECK(a.eta_hat > 0.5);
  CHECK(a.eta_hat < 2.0);

  spec.label = rt::CaseLabel::kTangent;
  rt::EvalPoint b = rt::select_point(ph, spec);
  CHECK(b.label == rt::CaseLabel::kTangent);
  CHECK(b.tangency_margin > 0.0);

  spec.label = rt::CaseLabel::kTransverse;
  rt::EvalPoint cpt = rt::select_point(ph, spec);
  CHECK(cpt.label == rt::CaseLabel::kTransverse);
  CHECK((cpt.x0 - ph.curve().center).norm() < ph.curve().radius);
}

}  // TEST_SUITE
