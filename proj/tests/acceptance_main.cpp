// Acceptance battery: eight numbered criteria covering kernel identities,
// decay envelopes, scalar model integrals, the epsilon sweeps for the
// three point cases, independent quadrature oracles, and artifact
// determinism. Each criterion prints exactly one PASS/FAIL line with its
// measured quantities; the process exits nonzero when any criterion fails.
// All tolerances are pinned here, next to the check they gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roughtomo/config.hpp"
#include "roughtomo/diagnostics.hpp"
#include "roughtomo/errors.hpp"
#include "roughtomo/numtheory.hpp"
#include "roughtomo/orchestrate.hpp"
#include "roughtomo/quadrature.hpp"
#include "roughtomo/reconstruct.hpp"
#include "roughtomo/report.hpp"
#include "roughtomo/sinogram.hpp"
#include "roughtomo/util.hpp"

namespace {

using namespace roughtomo;

constexpr int kThreads = 3;
const std::filesystem::path kCacheDir = "acc_cache";

std::string g3(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

// ---------------------------------------------------------------------------
// Shared fixtures, built on first use so a failure in one criterion does not
// charge its setup cost to the others.

const RunConfig& base_cfg() {
  static RunConfig cfg = [] {
    RunConfig c = default_config();
    c.threads = kThreads;
    return c;
  }();
  return cfg;
}

const KernelSet& shared_ks() {
  static KernelSet ks = KernelSet::build(base_cfg().kernels, kThreads);
  return ks;
}

const Phantom& shared_ph() {
  static Phantom ph = make_phantom(base_cfg());
  return ph;
}

const EvalPoint& shared_pt() {
  static EvalPoint pt = select_point(shared_ph(), base_cfg().point);
  return pt;
}

// Sweep configurations: the pinned epsilon ladder 2^-5 .. 2^-10 for every
// case, lattice profile by default, the sinusoid variant for criterion 4.
RunConfig sweep_cfg(CaseLabel label, bool sinusoid) {
  RunConfig c = base_cfg();
  c.point.label = label;
  c.eps_list = {1.0 / 32,  1.0 / 64,  1.0 / 128,
                1.0 / 256, 1.0 / 512, 1.0 / 1024};
  if (sinusoid) {
    c.profile_kind = ProfileKind::kSinusoid;
    c.profile.amplitude = 0.75;
    c.profile.frequency = 3.0;
  }
  return c;
}

// 0 = on-curve lattice (with aggregate diagnostics), 1 = on-curve sinusoid,
// 2 = tangent lattice, 3 = transverse lattice. Reports are cached so the
// on-curve lattice sweep is shared between criteria 4 and 6.
const SweepReport& sweep_report(int which) {
  static std::optional<SweepReport> cache[4];
  if (!cache[which]) {
    RunConfig c;
    bool diag = false;
    switch (which) {
      case 0:
        c = sweep_cfg(CaseLabel::kOnCurve, false);
        diag = true;
        break;
      case 1:
        c = sweep_cfg(CaseLabel::kOnCurve, true);
        break;
      case 2:
        c = sweep_cfg(CaseLabel::kTangent, false);
        break;
      default:
        c = sweep_cfg(CaseLabel::kTransverse, false);
        break;
    }
    Pipeline pipe(c, kCacheDir);
    cache[which] = pipe.run_sweep(diag);
  }
  return *cache[which];
}

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Criterion 1: exact kernel identities. Partition of unity and linear
// reproduction for the interpolation spline, unit aperture mass, periodicity
// of the lattice sum, and the line-integral identity that ties the radial
// kernel back to (phi * w).

CriterionResult criterion1() {
  const KernelSet& ks = shared_ks();
  const std::uint64_t seed = 0xACC30001ull;

  double dev_pu = 0.0, dev_lin = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double u = -8.0 + 16.0 * seeded_uniform(seed, i);
    double s0 = 0.0, s1 = 0.0;
    int base = static_cast<int>(std::floor(u));
    for (int j = base - 4; j <= base + 4; ++j) {
      double f = ks.eval_phi(u - j);
      s0 += f;
      s1 += j * f;
    }
    dev_pu = std::max(dev_pu, std::abs(s0 - 1.0));
    dev_lin = std::max(dev_lin, std::abs(s1 - u));
  }

  // Per-piece Gauss panels are exact for the spline's polynomials; adaptive
  // refinement has nothing to offer at this tolerance.
  const BSpline& w = ks.aperture();
  NeumaierSum mass;
  for (int i = 0; i < w.piece_count(); ++i)
    mass.add(gauss_panel([&](double p) { return w(p); }, w.knot(i),
                         w.knot(i + 1), 12));
  double dev_mass = std::abs(mass.value() - 1.0);

  double dev_per = 0.0;
  for (int i = 0; i < 200; ++i) {
    double q = -3.0 + 6.0 * seeded_uniform(seed + 1, 2 * i);
    double t = -18.0 + 36.0 * seeded_uniform(seed + 1, 2 * i + 1);
    double v = ks.eval_psi(q, t);
    dev_per = std::max(dev_per, std::abs(ks.eval_psi(q + 1.0, t) - v));
    dev_per = std::max(dev_per, std::abs(ks.eval_psi(q - 2.0, t) - v));
  }

  double R = ks.dtb_radius();
  double dev_xray = 0.0;
  for (int i = 0; i < 20; ++i) {
    double p = (2.0 * seeded_uniform(seed + 2, i) - 1.0) * (R - 0.2);
    double edge = std::sqrt(std::max(R * R - p * p, 0.0));
    std::vector<double> sbp;
    for (double b = -R; b <= R + 1e-12; b += 0.25) sbp.push_back(b);
    sbp.push_back(-edge);
    sbp.push_back(edge);
    std::sort(sbp.begin(), sbp.end());
    double xr = integrate_adaptive(
        [&](double s) { return ks.dtb_kernel(std::hypot(p, s)); }, sbp, 1e-10);
    dev_xray = std::max(dev_xray, std::abs(xr - ks.eval_phi_w(p)));
  }

  bool pass = dev_pu <= 1e-12 && dev_lin <= 1e-12 && dev_mass <= 1e-12 &&
              dev_per <= 1e-10 && dev_xray < 1e-6;
  std::string d = "partition " + g3(dev_pu) + "/1e-12, linearity " +
                  g3(dev_lin) + "/1e-12, mass " + g3(dev_mass) +
                  "/1e-12, periodicity " + g3(dev_per) +
                  "/1e-10, line integral " + g3(dev_xray) + "/1e-6";
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 2: decay-envelope uniformity of the Fourier coefficients.
// c(m) = max over t in [-20,20] (step 1/16) of |psi_m(t)| (1+m)^beta (1+t^2)
// must stay within a factor-10 band over m = 1..64.

CriterionResult criterion2() {
  const KernelSet& ks = shared_ks();
  double beta = ks.beta();
  double cmin = 0.0, cmax = 0.0;
  int mmin = 0, mmax = 0;
  for (int m = 1; m <= 64; ++m) {
    double c = 0.0;
    for (int i = -320; i <= 320; ++i) {
      double t = i / 16.0;
      double a = std::abs(ks.psi_fourier(m, t));
      c = std::max(c, a * std::pow(1.0 + m, beta) * (1.0 + t * t));
    }
    if (m == 1 || c > cmax) {
      cmax = c;
      mmax = m;
    }
    if (m == 1 || c < cmin) {
      cmin = c;
      mmin = m;
    }
  }
  double band = cmin > 0.0 ? cmax / cmin
                           : std::numeric_limits<double>::infinity();
  bool pass = band <= 10.0;
  std::string d = "weighted peak band " + g3(band) + "/10 (max " + g3(cmax) +
                  " at m=" + std::to_string(mmax) + ", min " + g3(cmin) +
                  " at m=" + std::to_string(mmin) + ")";
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 3: scalar model integrals. Every family's measured/envelope
// ratios must stay within a factor-10 band across its parameter sweep.

CriterionResult criterion3() {
  ModelSuiteResult suite = model_integral_suite();
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, band] : suite.ratio_bands) {
    if (band > worst) {
      worst = band;
      worst_name = name;
    }
  }
  bool pass = suite.all_within(10.0);
  std::string d = std::to_string(suite.ratio_bands.size()) +
                  " families, worst band " + g3(worst) + "/10 (" + worst_name +
                  ")";
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 4: on-curve remainder scaling for both the lattice and the
// sinusoid profile. r(eps) = sup|f_rec - prediction| / (sqrt(eps) log(1/eps))
// must stay within a factor-4 band and the log-log decay slope of the sup
// norm must be at least 0.4.

std::string sweep_digest(const char* tag, const SweepReport& rep,
                         double& band) {
  band = rep.min_ratio > 0.0 ? rep.max_ratio / rep.min_ratio
                             : std::numeric_limits<double>::infinity();
  return std::string(tag) + " band " + g3(band) + "/4 slope " +
         g3(rep.slope) + "/0.4";
}

CriterionResult criterion4() {
  const SweepReport& lat = sweep_report(0);
  const SweepReport& sin = sweep_report(1);
  double band_l = 0.0, band_s = 0.0;
  std::string d = sweep_digest("lattice", lat, band_l) + "; " +
                  sweep_digest("sinusoid", sin, band_s);
  bool pass = band_l <= 4.0 && lat.slope >= 0.4 && band_s <= 4.0 &&
              sin.slope >= 0.4;
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 5: tangent and transverse cases. The transition prediction must
// vanish identically near those points, and sup|f_rec| must follow the same
// sqrt(eps) log(1/eps) envelope within a factor-4 band with slope >= 0.4.

CriterionResult criterion5() {
  const SweepReport& tb = sweep_report(2);
  const SweepReport& tc = sweep_report(3);
  double max_dtb = 0.0;
  for (const SweepRecord& r : tb.records) max_dtb = std::max(max_dtb, r.max_dtb);
  for (const SweepRecord& r : tc.records) max_dtb = std::max(max_dtb, r.max_dtb);
  double band_b = 0.0, band_c = 0.0;
  std::string d = sweep_digest("tangent", tb, band_b) + "; " +
                  sweep_digest("transverse", tc, band_c) +
                  "; max prediction " + g3(max_dtb) + "/1e-8";
  bool pass = band_b <= 4.0 && tb.slope >= 0.4 && band_c <= 4.0 &&
              tc.slope >= 0.4 && max_dtb < 1e-8;
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 6: aggregate mode sums on the on-curve lattice sweep. With the
// cutoff M(eps) = ceil(eps^(-1/6)) capped at 64, both normalized sums must
// stay within factor-4 bands across the sweep.

CriterionResult criterion6() {
  const SweepReport& lat = sweep_report(0);
  double lo1 = 0.0, hi1 = 0.0, lo2 = 0.0, hi2 = 0.0;
  bool first = true;
  for (const SweepRecord& r : lat.records) {
    if (!r.diag) return {false, "diagnostics missing from sweep"};
    // Independent integer-arithmetic form of the cutoff: the least M with
    // M^6 >= 1/eps (every eps in the ladder is an exact power of two).
    double inv = 1.0 / r.eps;
    int expect = 1;
    while (expect < 64 && std::pow(static_cast<double>(expect), 6) < inv)
      ++expect;
    if (r.diag->M != expect)
      return {false, "mode cutoff " + std::to_string(r.diag->M) +
                         " != " + std::to_string(expect) + " at eps " +
                         g3(r.eps)};
    double s1 = r.diag->sum_I_normalized;
    double s2 = r.diag->sum_II_normalized;
    if (!(s1 > 0.0) || !(s2 > 0.0))
      return {false, "non-positive normalized sum at eps " + g3(r.eps)};
    if (first) {
      lo1 = hi1 = s1;
      lo2 = hi2 = s2;
      first = false;
    } else {
      lo1 = std::min(lo1, s1);
      hi1 = std::max(hi1, s1);
      lo2 = std::min(lo2, s2);
      hi2 = std::max(hi2, s2);
    }
  }
  double band1 = hi1 / lo1, band2 = hi2 / lo2;
  bool pass = band1 <= 4.0 && band2 <= 4.0;
  std::string d = "sum I band " + g3(band1) + "/4, sum II band " + g3(band2) +
                  "/4";
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 7: independent quadrature oracles.
//
// (a) The reconstruction at a point equals the principal-value filtration of
//     the interpolated data profile G_k(p) = sum_j phi((p - p_j)/eps) v_kj:
//     f(x) = -(d_alpha / (2 pi)) sum_k (1/pi) pv-int G_k'(p) / (p - a_k.x) dp,
//     evaluated here with adaptive quadrature and a symmetric singularity
//     window (no use of the tabulated filtered kernel).
// (b) A data cell equals the curve-coordinate double integral
//     (1/eps) int du int dt w((a_k.y(u,t) - p_j)/eps) f^p(u,t) (R - t)
//     over the perturbation layer (no use of the closed-form line integrals).

double recon_oracle(const Sinogram& s, const KernelSet& ks,
                    const BSpline& dphi, Vec2 x) {
  const SinogramGrid& g = s.grid;
  double eps = g.eps;
  double phir = ks.interp().support_radius();
  NeumaierSum total;
  for (int k = g.k_lo; k <= g.k_hi; ++k) {
    const SinogramRow& row = s.row(k);
    if (row.v.empty()) continue;
    Vec2 av = unit_vec(g.alpha(k));
    double sv = av.dot(x);
    auto gprime = [&](double p) {
      double q0 = (p - g.p_bar) / eps;  // (p - p_j)/eps = q0 - j
      int jlo = static_cast<int>(std::ceil(q0 - phir));
      int jhi = static_cast<int>(std::floor(q0 + phir));
      double acc = 0.0;
      for (int j = jlo; j <= jhi; ++j) acc += dphi(q0 - j) * s.value(k, j);
      return acc / eps;
    };
    double delta = 0.5 * eps;
    double plo = g.p(row.j0) - (phir + 1.0) * eps;
    double phi_hi = g.p(row.j0 + static_cast<int>(row.v.size()) - 1) +
                    (phir + 1.0) * eps;
    double lo = std::min(plo, sv - delta - eps);
    double hi = std::max(phi_hi, sv + delta + eps);
    auto panels = [&](double a, double b) {
      std::vector<double> v;
      int n = std::max(
          1, std::min(20000, static_cast<int>(std::ceil((b - a) / (0.5 * eps)))));
      v.reserve(n + 1);
      for (int i = 0; i <= n; ++i) v.push_back(a + (b - a) * i / n);
      return v;
    };
    auto away = [&](double p) { return gprime(p) / (p - sv); };
    double outer = integrate_adaptive(away, panels(lo, sv - delta), 5e-10) +
                   integrate_adaptive(away, panels(sv + delta, hi), 5e-10);
    double gs = gprime(sv);
    double inner = integrate_adaptive(
        [&](double p) { return (gprime(p) - gs) / (p - sv); },
        {sv - delta, sv, sv + delta}, 1e-11);
    total.add((outer + inner) / std::numbers::pi);
  }
  return -(g.dalpha() / (2.0 * std::numbers::pi)) * total.value();
}

double cell_oracle(const Phantom& ph, const SinogramGrid& g,
                   const KernelSet& ks, int k, int j) {
  double eps = g.eps;
  const BaseCurve& c = ph.curve();
  double a = c.arc_halfwidth;
  double R = c.radius;
  Vec2 av = unit_vec(g.alpha(k));
  double pj = g.p(j);

  // u panel edges: exact lattice cell boundaries, refined to <= eps/2 so the
  // aperture bump (width O(eps) in u) always spans whole panels.
  std::vector<double> edges;
  edges.push_back(-a);
  const PerturbationProfile& prof = ph.profile();
  if (prof.kind() == ProfileKind::kPiecewiseConstantLattice) {
    double cell = std::sqrt(eps) * prof.lattice_step();
    for (std::int64_t i = static_cast<std::int64_t>(std::floor(-a / cell)) + 1;
         i * cell < a; ++i) {
      double e = i * cell;
      if (e > -a && e < a) edges.push_back(e);
    }
  }
  edges.push_back(a);
  std::sort(edges.begin(), edges.end());
  std::vector<double> ubp;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double e0 = edges[i], e1 = edges[i + 1];
    int n = std::max(
        1, std::min(4000, static_cast<int>(std::ceil((e1 - e0) / (0.5 * eps)))));
    for (int q = 0; q < n; ++q) ubp.push_back(e0 + (e1 - e0) * q / n);
  }
  ubp.push_back(a);

  double jump = ph.jump();
  auto outer = [&](double u) {
    double h = ph.edge_height(u, eps);
    if (h == 0.0) return 0.0;
    double t0 = std::min(0.0, h), t1 = std::max(0.0, h);
    double sgn = h > 0.0 ? 1.0 : -1.0;
    double inner = integrate_adaptive(
        [&](double t) {
          Vec2 y = curve_point_from(c, u, t);
          return ks.eval_w((av.dot(y) - pj) / eps) * (R - t);
        },
        t0, t1, 1e-15);
    return sgn * jump * inner;
  };
  return integrate_adaptive(outer, ubp, 1e-13) / eps;
}

CriterionResult criterion7() {
  const KernelSet& ks = shared_ks();
  const Phantom& ph = shared_ph();
  const EvalPoint& pt = shared_pt();
  const RunConfig& cfg = base_cfg();
  const std::uint64_t seed = 0xACC30007ull;
  BSpline dphi = ks.interp().derivative_spline();

  double worst_rec = 0.0, worst_cell = 0.0;
  for (int it = 0; it < 10; ++it) {
    double eps = std::pow(2.0, -(5.0 + 3.0 * seeded_uniform(seed, 10 * it)));
    SinogramGrid grid =
        SinogramGrid::make(ph, ks, eps, pt.kappa, cfg.p_bar, cfg.alpha_bar);
    Sinogram s = sample_data(ph, grid, ks, kThreads);

    Vec2 xck{-4.0 + 8.0 * seeded_uniform(seed, 10 * it + 1),
             -4.0 + 8.0 * seeded_uniform(seed, 10 * it + 2)};
    Vec2 x = pt.x0 + xck * eps;
    double frec = reconstruct_at(s, ks, x);
    double oracle = recon_oracle(s, ks, dphi, x);
    double rel = std::abs(frec - oracle) / std::max(std::abs(oracle), 1e-2);
    worst_rec = std::max(worst_rec, rel);

    int k = grid.k_lo +
            static_cast<int>(seeded_uniform(seed, 10 * it + 3) *
                             grid.n_angles());
    k = std::min(k, grid.k_hi);
    const SinogramRow& row = s.row(k);
    double row_max = 0.0;
    for (double v : row.v) row_max = std::max(row_max, std::abs(v));
    int len = static_cast<int>(row.v.size());
    int jq = row.j0;
    double best = -1.0;
    for (int tries = 0; tries < 100; ++tries) {
      int cand = row.j0 + static_cast<int>(
                              seeded_uniform(seed, 10 * it + 4 + tries) * len);
      cand = std::min(cand, row.j0 + len - 1);
      double mag = std::abs(s.value(k, cand));
      if (mag > best) {
        best = mag;
        jq = cand;
      }
      if (mag >= 0.1 * row_max) break;
    }
    double v = s.value(k, jq);
    double vo = cell_oracle(ph, grid, ks, k, jq);
    double relc = std::abs(v - vo) /
                  std::max(std::abs(vo), 1e-3 * std::max(row_max, 1e-30));
    worst_cell = std::max(worst_cell, relc);
  }
  bool pass = worst_rec <= 1e-5 && worst_cell <= 1e-6;
  std::string d = "reconstruction rel " + g3(worst_rec) + "/1e-5, cell rel " +
                  g3(worst_cell) + "/1e-6 (10 draws each)";
  return {pass, d};
}

// ---------------------------------------------------------------------------
// Criterion 8: artifact determinism. A small sweep rerun in fresh output
// directories, and again with a different thread count, must produce
// byte-identical CSV and JSON artifacts.

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CriterionResult criterion8() {
  namespace fs = std::filesystem;
  auto run_once = [&](const fs::path& out, int threads) {
    fs::remove_all(out);
    fs::create_directories(out);
    RunConfig c = default_config();
    c.eps_list = {1.0 / 16, 1.0 / 32};
    c.patch_box = 2.0;
    c.patch_step = 0.5;
    c.aggregates = true;
    c.mode_cap = 4;
    c.out_dir = out;
    c.threads = threads;
    Pipeline pipe(c, out / "cache");  // private cache: generation runs fresh
    SweepReport rep = pipe.run_sweep(true);
    Manifest man;
    for (std::size_t i = 0; i < rep.records.size(); ++i)
      pipe.write_field_csv(rep.records[i].field, static_cast<int>(i), man);
    pipe.write_sweep_csv(rep, man);
    pipe.write_diag_csv(rep, man);
    pipe.write_point_json(man);
    pipe.write_echo(man);
    man.write(out / "manifest.txt");
  };
  run_once("acc_out_r1", 3);
  run_once("acc_out_r2", 3);
  run_once("acc_out_r3", 1);

  const char* names[] = {"remainder_eps_0.csv", "remainder_eps_1.csv",
                         "sweep_summary.csv",   "diagnostics.csv",
                         "diag_modes.csv",      "am_table.csv",
                         "point.json"};
  std::string mismatch;
  int checked = 0;
  for (const char* n : names) {
    std::string r1 = read_bytes(fs::path("acc_out_r1") / n);
    std::string r2 = read_bytes(fs::path("acc_out_r2") / n);
    std::string r3 = read_bytes(fs::path("acc_out_r3") / n);
    ++checked;
    if (r1 != r2) {
      mismatch = std::string(n) + " differs across reruns";
      break;
    }
    if (r1 != r3) {
      mismatch = std::string(n) + " differs across thread counts";
      break;
    }
  }
  bool pass = mismatch.empty();
  std::string d = pass ? std::to_string(checked) +
                             " artifacts byte-identical across rerun and "
                             "threads 1 vs 3"
                       : mismatch;
  return {pass, d};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* what;
    CriterionResult (*fn)();
  };
  const Entry entries[] = {
      {1,
       "interpolation partition/linearity, aperture mass, lattice-sum "
       "periodicity, radial-kernel line integrals",
       criterion1},
      {2, "Fourier-coefficient decay envelope uniformity", criterion2},
      {3, "scalar model-integral scaling bands", criterion3},
      {4, "on-curve remainder envelope band and slope (lattice, sinusoid)",
       criterion4},
      {5, "tangent/transverse decay with vanishing transition prediction",
       criterion5},
      {6, "aggregate mode-sum decay bands", criterion6},
      {7, "reconstruction and data cells vs independent quadrature oracles",
       criterion7},
      {8, "rerun and thread-count determinism of artifacts", criterion8},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = e.fn();
    } catch (const std::exception& ex) {
      r = {false, std::string("exception: ") + ex.what()};
    }
    double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("%s criterion %d: %s (%s) [%.1fs]\n",
                r.pass ? "PASS" : "FAIL", e.id, e.what, r.detail.c_str(), dt);
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  int total = static_cast<int>(sizeof(entries) / sizeof(entries[0]));
  std::printf("acceptance: %d/%d criteria passed\n", total - failures, total);
  return failures == 0 ? 0 : kAccuracyError;
}
