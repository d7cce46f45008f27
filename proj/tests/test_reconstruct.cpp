#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "roughtomo/diagnostics.hpp"
#include "roughtomo/reconstruct.hpp"
#include "test_helpers.hpp"

namespace {

rt::EvalPoint point_for(const rt::Phantom& ph,
                        rt::CaseLabel label = rt::CaseLabel::kOnCurve) {
  rt::PointSpec spec;
  spec.label = label;
  return rt::select_point(ph, spec);
}

rt::Sinogram data_for(const rt::Phantom& ph, double eps) {
  rt::RunConfig cfg = test_config();
  rt::EvalPoint pt = point_for(ph);
  rt::SinogramGrid g = rt::SinogramGrid::make(ph, shared_kernels(), eps,
                                              pt.kappa, cfg.p_bar,
                                              cfg.alpha_bar);
  return rt::sample_data(ph, g, shared_kernels(), 3);
}

}  // namespace

TEST_SUITE("reconstruct") {

TEST_CASE("zero data reconstructs to zero; padding changes nothing") {
  rt::RunConfig cfg = test_config();
  cfg.profile_kind = rt::ProfileKind::kZero;
  rt::Phantom ph = rt::make_phantom(cfg);
  rt::Sinogram s = data_for(ph, 1.0 / 16.0);
  rt::Vec2 x = point_for(ph).x0;
  CHECK(rt::reconstruct_at(s, shared_kernels(), x) == 0.0);

  // Nonzero data: widening the stored rows with zero cells is a no-op
  // (all nonzero samples are inside the stored span by construction).
  const rt::Phantom& rough = shared_phantom();
  rt::Sinogram s2 = data_for(rough, 1.0 / 16.0);
  rt::Vec2 x2 = point_for(rough).x0;
  double base = rt::reconstruct_at(s2, shared_kernels(), x2);
  double padded = rt::reconstruct_at_padded(s2, shared_kernels(), x2, 12);
  CHECK(base == padded);
  CHECK(base != 0.0);
}

TEST_CASE("unperturbed disk reconstructs its plateau") {
  rt::RunConfig cfg = test_config();
  cfg.profile_kind = rt::ProfileKind::kZero;
  cfg.mode = rt::PhantomMode::kFull;
  rt::Phantom disk = rt::make_phantom(cfg);
  rt::Sinogram s = data_for(disk, 1.0 / 16.0);
  const rt::BaseCurve& c = disk.curve();
  double inside = rt::reconstruct_at(s, shared_kernels(), c.center);
  double outside = rt::reconstruct_at(
      s, shared_kernels(), c.center + rt::Vec2{0.0, 2.0 * c.radius});
  CHECK(std::abs(inside - disk.jump()) <= 0.05);
  CHECK(std::abs(outside) <= 0.05);
}

TEST_CASE("reconstruction is linear in the samples") {
  const rt::Phantom& ph = shared_phantom();
  rt::Sinogram s = data_for(ph, 1.0 / 16.0);
  rt::Vec2 x = point_for(ph).x0 + rt::Vec2{0.01, -0.02};
  double f1 = rt::reconstruct_at(s, shared_kernels(), x);
  rt::Sinogram doubled = s;
  for (auto& row : doubled.rows)
    for (double& v : row.v) v *= 2.0;
  double f2 = rt::reconstruct_at(doubled, shared_kernels(), x);
  CHECK(std::abs(f2 - 2.0 * f1) <= 1e-12 * std::max(1.0, std::abs(f1)));
}

TEST_CASE("remainder field: definition, sup norm, thread invariance") {
  const rt::Phantom& ph = shared_phantom();
  const double eps = 1.0 / 16.0;
  rt::Sinogram s = data_for(ph, eps);
  rt::EvalPoint pt = point_for(ph);
  rt::LocalPatch patch = rt::LocalPatch::make(pt.x0, eps, 1.0, 0.5);
  CHECK(patch.side == 5);
  CHECK(patch.xcheck.size() == 25);
  rt::RemainderField f1 = rt::remainder_field(ph, s, shared_kernels(), patch, 1);
  rt::RemainderField f3 = rt::remainder_field(ph, s, shared_kernels(), patch, 3);
  double sup = 0.0;
  bool identical = true;
  for (size_t i = 0; i < patch.xcheck.size(); ++i) {
    CHECK(f1.remainder[i] == f1.f_rec[i] - f1.dtb[i]);
    sup = std::max(sup, std::abs(f1.remainder[i]));
    identical = identical && (f1.f_rec[i] == f3.f_rec[i]) &&
                (f1.dtb[i] == f3.dtb[i]);
  }
  CHECK(f1.sup_norm == sup);
  CHECK(identical);
}

TEST_CASE("mode expansion agrees with the direct reconstruction") {
  const rt::Phantom& ph = shared_phantom();
  const rt::KernelSet& ks = shared_kernels();
  const double eps = 1.0 / 16.0;
  rt::Sinogram s = data_for(ph, eps);
  rt::EvalPoint pt = point_for(ph);
  double worst = 0.0;
  for (rt::Vec2 off : {rt::Vec2{0.0, 0.0}, rt::Vec2{1.3, -0.7}}) {
    rt::Vec2 x = pt.x0 + off * eps;
    double direct = rt::reconstruct_at(s, ks, x);
    double modes = rt::reconstruct_via_modes(ph, ks, s.grid, x, 16);
    worst = std::max(worst, std::abs(direct - modes));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("angular mode diagnostics: reductions are consistent") {
  const rt::Phantom& ph = shared_phantom();
  const rt::KernelSet& ks = shared_kernels();
  const double eps = 1.0 / 32.0;
  CHECK(rt::mode_cutoff(eps, ks.beta()) == 2);
  CHECK(rt::mode_cutoff(eps, ks.beta(), 1) == 1);
  rt::EvalPoint pt = point_for(ph);
  rt::SinogramGrid g = rt::SinogramGrid::make(ph, ks, eps, pt.kappa,
                                              test_config().p_bar,
                                              test_config().alpha_bar);
  rt::DiagnosticSums d = rt::diagnostic_sums(ph, ks, g, pt.x0, 3);
  CHECK(d.M == 2);
  CHECK(static_cast<int>(d.mode_abs.size()) == d.M);
  REQUIRE(d.am_table.size() == static_cast<size_t>(g.n_angles()));
  CHECK(d.k_lo == g.k_lo);
  // A_0 is real; coefficients are finite.
  double worst_imag = 0.0;
  for (const auto& row : d.am_table) {
    REQUIRE(static_cast<int>(row.size()) == d.M + 1);
    worst_imag = std::max(worst_imag, std::abs(row[0].imag()));
  }
  CHECK(worst_imag <= 1e-12);
  // Rebuild the aggregate sums from the stored coefficients.
  for (int m = 1; m <= d.M; ++m) {
    rt::NeumaierSum re, im;
    for (int k = g.k_lo; k <= g.k_hi; ++k) {
      double qx = (rt::unit_vec(g.alpha(k)).dot(pt.x0) - g.p_bar) / eps;
      std::complex<double> ph_k{std::cos(2.0 * std::numbers::pi * m * qx),
                                -std::sin(2.0 * std::numbers::pi * m * qx)};
      std::complex<double> z = ph_k * d.am_table[k - g.k_lo][m];
      re.add(z.real());
      im.add(z.imag());
    }
    CHECK(std::abs(std::hypot(re.value(), im.value()) - d.mode_abs[m - 1]) <=
          1e-12 * std::max(1.0, d.mode_abs[m - 1]));
  }
  CHECK(d.sum_I > 0.0);
  CHECK(d.sum_II > 0.0);
  CHECK(d.sum_I_normalized ==
        doctest::Approx(d.sum_I / (std::sqrt(eps) * std::log(1.0 / eps)))
            .epsilon(1e-12));
  // Spot-check one stored coefficient against a fresh evaluation.
  int kmid = (g.k_lo + g.k_hi) / 2;
  std::complex<double> fresh =
      rt::compute_Am(ph, ks, pt.x0, 1, g.alpha(kmid), eps);
  CHECK(std::abs(fresh - d.am_table[kmid - g.k_lo][1]) <= 1e-13);
}

TEST_CASE("away from the layer the prediction window is empty") {
  const rt::Phantom& ph = shared_phantom();
  const double eps = 1.0 / 32.0;
  for (rt::CaseLabel label : {rt::CaseLabel::kTangent, rt::CaseLabel::kTransverse}) {
    rt::EvalPoint pt = point_for(ph, label);
    rt::LocalPatch patch = rt::LocalPatch::make(pt.x0, eps, 4.0, 1.0);
    std::vector<double> dtb =
        rt::dtb_predict(shared_kernels(), ph, patch.x0, patch.xcheck, eps);
    double mx = 0.0;
    for (double v : dtb) mx = std::max(mx, std::abs(v));
    CHECK(mx == 0.0);
  }
}

}  // TEST_SUITE
