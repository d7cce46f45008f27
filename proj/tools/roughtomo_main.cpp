// roughtomo: reconstruction of rough-edged functions from sampled line
// integrals, with the discrete transition-behavior prediction and the
// remainder diagnostics around it.
//
// Subcommands:
//   gen          generate (and cache) sampled data for every eps in the sweep
//   reconstruct  reconstruct the local patch and write per-eps field CSVs
//   dtb          evaluate the transition-behavior prediction on the patch
//   sweep        full pipeline: data, reconstruction, prediction, summary
//   verify       self-contained accuracy certificates (exit 0 iff all pass)
//   diag         angular Fourier diagnostics (mode sums and A_m tables)
//
// All artifacts are deterministic: byte-identical across reruns and thread
// counts. Timings go to stdout only, never into files.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roughtomo/config.hpp"
#include "roughtomo/diagnostics.hpp"
#include "roughtomo/errors.hpp"
#include "roughtomo/numtheory.hpp"
#include "roughtomo/orchestrate.hpp"
#include "roughtomo/quadrature.hpp"
#include "roughtomo/report.hpp"
#include "roughtomo/util.hpp"

namespace rt = roughtomo;

namespace {

constexpr const char* kVersion = "roughtomo 1.0.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string cache_dir;
  int threads = 0;          // 0 = keep value from config
  std::int64_t seed = -1;   // negative = keep value from config
};

void add_common(CLI::App* cmd, CommonOpts& opt) {
  cmd->add_option("--config", opt.config_path,
                  "Configuration file (INI); defaults when omitted");
  cmd->add_option("--out", opt.out_dir, "Output directory (overrides config)");
  cmd->add_option("--threads", opt.threads,
                  "Worker threads (overrides config)");
  cmd->add_option("--cache", opt.cache_dir,
                  "Sinogram cache directory (empty = no cache)");
  cmd->add_option("--seed", opt.seed,
                  "Profile seed override (lattice profiles)");
}

rt::RunConfig resolve_config(const CommonOpts& opt) {
  rt::RunConfig cfg = opt.config_path.empty()
                          ? rt::default_config()
                          : rt::load_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.threads > 0) cfg.threads = opt.threads;
  if (opt.seed >= 0) cfg.profile.seed = static_cast<std::uint64_t>(opt.seed);
  cfg.validate();
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void print_point(const rt::EvalPoint& pt) {
  std::printf("point: case %s  x0 = (%.12g, %.12g)  kappa = %.12g\n",
              rt::case_label_name(pt.label).c_str(), pt.x0.x, pt.x0.y,
              pt.kappa);
  std::printf("       s1 = %.12g (eta_hat %.3f, screen %.5g)  s2 = %.12g\n",
              pt.s1, pt.eta_hat, pt.screen_stat, pt.s2);
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const CommonOpts& opt) {
  rt::RunConfig cfg = resolve_config(opt);
  std::filesystem::path cache = opt.cache_dir.empty()
                                    ? cfg.out_dir / "cache"
                                    : std::filesystem::path(opt.cache_dir);
  std::filesystem::create_directories(cfg.out_dir);
  rt::RunLock lock(cfg.out_dir);
  rt::Pipeline pipe(cfg, cache);
  print_point(pipe.point());
  rt::Manifest man;
  man.add_note("version", kVersion);
  pipe.write_echo(man);
  pipe.write_point_json(man);
  for (double eps : cfg.eps_list) {
    double secs = 0.0;
    rt::Sinogram s = pipe.data_for(eps, &secs);
    std::printf("gen: eps = %-12.10g cells = %-9zu %s (%.2f s)\n", eps,
                s.cell_count(), secs == 0.0 ? "cached" : "sampled", secs);
    std::filesystem::path stem =
        rt::cache_stem(cache, pipe.phantom(), s.grid,
                       pipe.phantom().mode() == rt::PhantomMode::kFull);
    std::filesystem::path bin = stem, sidecar = stem;
    bin += ".bin";
    sidecar += ".manifest";
    man.add_file(bin);
    man.add_file(sidecar);
  }
  man.write(cfg.out_dir / "manifest.txt");
  std::printf("gen: ok\n");
  return rt::kOk;
}

// ---------------------------------------------------------------------------
// reconstruct

int cmd_reconstruct(const CommonOpts& opt) {
  rt::RunConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(cfg.out_dir);
  rt::RunLock lock(cfg.out_dir);
  rt::Pipeline pipe(cfg, opt.cache_dir);
  print_point(pipe.point());
  rt::Manifest man;
  man.add_note("version", kVersion);
  pipe.write_echo(man);
  pipe.write_point_json(man);
  int index = 0;
  for (double eps : cfg.eps_list) {
    double gen_secs = 0.0;
    rt::Sinogram s = pipe.data_for(eps, &gen_secs);
    auto t0 = std::chrono::steady_clock::now();
    rt::RemainderField f = pipe.field_for(s);
    std::printf(
        "reconstruct: eps = %-12.10g sup|f_rec - dtb| = %-12.6g "
        "(gen %.2f s, recon %.2f s)\n",
        eps, f.sup_norm, gen_secs, seconds_since(t0));
    pipe.write_field_csv(f, index++, man);
  }
  man.write(cfg.out_dir / "manifest.txt");
  std::printf("reconstruct: ok\n");
  return rt::kOk;
}

// ---------------------------------------------------------------------------
// dtb

int cmd_dtb(const CommonOpts& opt) {
  rt::RunConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(cfg.out_dir);
  rt::RunLock lock(cfg.out_dir);
  rt::Pipeline pipe(cfg, opt.cache_dir);
  print_point(pipe.point());
  rt::Manifest man;
  man.add_note("version", kVersion);
  pipe.write_echo(man);
  pipe.write_point_json(man);
  int index = 0;
  for (double eps : cfg.eps_list) {
    rt::LocalPatch patch = rt::LocalPatch::make(pipe.point().x0, eps,
                                                cfg.patch_box, cfg.patch_step);
    std::vector<double> dtb = rt::dtb_predict(pipe.kernels(), pipe.phantom(),
                                              patch.x0, patch.xcheck, eps);
    double mx = 0.0;
    for (double v : dtb) mx = std::max(mx, std::abs(v));
    std::printf("dtb: eps = %-12.10g max |prediction| = %.10g\n", eps, mx);
    std::filesystem::path p =
        cfg.out_dir / ("dtb_eps_" + std::to_string(index++) + ".csv");
    rt::CsvWriter csv(p, {"eps", "x1", "x2", "dtb"});
    for (size_t i = 0; i < patch.xcheck.size(); ++i) {
      rt::Vec2 x = patch.x0 + patch.xcheck[i] * eps;
      csv.row({eps, x.x, x.y, dtb[i]});
    }
    csv.close();
    man.add_file(p);
  }
  man.write(cfg.out_dir / "manifest.txt");
  std::printf("dtb: ok\n");
  return rt::kOk;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const CommonOpts& opt) {
  rt::RunConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(cfg.out_dir);
  rt::RunLock lock(cfg.out_dir);
  rt::Pipeline pipe(cfg, opt.cache_dir);
  print_point(pipe.point());
  auto t0 = std::chrono::steady_clock::now();
  rt::SweepReport rep = pipe.run_sweep(cfg.aggregates);
  rt::Manifest man;
  man.add_note("version", kVersion);
  pipe.write_echo(man);
  pipe.write_point_json(man);
  int index = 0;
  for (const rt::SweepRecord& r : rep.records) {
    std::printf(
        "sweep: eps = %-12.10g sup = %-12.6g envelope = %-12.6g "
        "ratio = %-9.5g (gen %.2f s, recon %.2f s)\n",
        r.eps, r.sup_norm, r.envelope, r.ratio, r.gen_seconds,
        r.recon_seconds);
    pipe.write_field_csv(r.field, index++, man);
  }
  pipe.write_sweep_csv(rep, man);
  if (cfg.aggregates) pipe.write_diag_csv(rep, man);
  man.write(cfg.out_dir / "manifest.txt");
  std::printf("sweep: slope = %.5f  ratio band [%.5g, %.5g]  (%.1f s)\n",
              rep.slope, rep.min_ratio, rep.max_ratio, seconds_since(t0));
  return rt::kOk;
}

// ---------------------------------------------------------------------------
// diag

int cmd_diag(const CommonOpts& opt) {
  rt::RunConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(cfg.out_dir);
  rt::RunLock lock(cfg.out_dir);
  rt::Pipeline pipe(cfg, opt.cache_dir);
  print_point(pipe.point());
  rt::SweepReport rep;
  rep.point = pipe.point();
  for (double eps : cfg.eps_list) {
    auto t0 = std::chrono::steady_clock::now();
    rt::SinogramGrid grid = pipe.grid_for(eps);
    rt::SweepRecord rec;
    rec.eps = eps;
    rec.diag = rt::diagnostic_sums(pipe.phantom(), pipe.kernels(), grid,
                                   pipe.point().x0, cfg.threads,
                                   cfg.mode_cap > 0 ? cfg.mode_cap : 64);
    std::printf(
        "diag: eps = %-12.10g M = %-3d S_I/env = %-10.6g S_II/env = %-10.6g "
        "(%.2f s)\n",
        eps, rec.diag->M, rec.diag->sum_I_normalized,
        rec.diag->sum_II_normalized, seconds_since(t0));
    rep.records.push_back(std::move(rec));
  }
  rt::Manifest man;
  man.add_note("version", kVersion);
  pipe.write_echo(man);
  pipe.write_point_json(man);
  pipe.write_diag_csv(rep, man);
  man.write(cfg.out_dir / "manifest.txt");
  std::printf("diag: ok\n");
  return rt::kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

int cmd_verify(const CommonOpts& opt) {
  rt::RunConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(cfg.out_dir);
  rt::RunLock lock(cfg.out_dir);
  rt::KernelSet ks = rt::KernelSet::build(cfg.kernels, cfg.threads);
  const rt::BSpline& phi = ks.interp();
  const rt::BSpline& w = ks.aperture();

  std::vector<VerifyCheck> checks;
  auto push = [&](const std::string& name, double measured, double threshold) {
    checks.push_back({name, measured, threshold, measured <= threshold});
  };
  const std::uint64_t seed = 0x5eedbead5eedbeadull;

  // 1-2. Interpolation-kernel exactness on constants and linears.
  {
    double worst0 = 0.0, worst1 = 0.0;
    int sr = static_cast<int>(std::ceil(phi.support_radius()));
    for (int i = 0; i < 1000; ++i) {
      double u = 16.0 * (rt::seeded_uniform(seed, i) - 0.5);
      rt::NeumaierSum s0, s1;
      for (int j = static_cast<int>(std::floor(u)) - sr - 1;
           j <= static_cast<int>(std::ceil(u)) + sr + 1; ++j) {
        double v = phi(u - j);
        s0.add(v);
        s1.add(j * v);
      }
      worst0 = std::max(worst0, std::abs(s0.value() - 1.0));
      worst1 = std::max(worst1, std::abs(s1.value() - u));
    }
    push("interp_partition_of_unity", worst0, 1e-12);
    push("interp_linear_exactness", worst1, 1e-12);
  }

  // 3. Aperture mass: integral of w over its support equals 1.
  {
    int pieces = w.degree() + 1;
    rt::NeumaierSum s;
    for (int i = 0; i < pieces; ++i)
      s.add(rt::gauss_panel([&](double p) { return w(p); }, w.knot(i),
                            w.knot(i + 1), 12));
    push("aperture_unit_mass", std::abs(s.value() - 1.0), 1e-12);
  }

  // 4. Lattice-sum periodicity: psi(q + 1, t) = psi(q, t).
  {
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
      double q = 3.0 * (rt::seeded_uniform(seed, 1000 + 2 * i) - 0.5);
      double t = 12.0 * (rt::seeded_uniform(seed, 1001 + 2 * i) - 0.5);
      worst = std::max(worst,
                       std::abs(ks.eval_psi(q + 1.0, t) - ks.eval_psi(q, t)));
    }
    push("lattice_sum_periodicity", worst, 1e-10);
  }

  // 5. Transition-kernel consistency: the X-ray transform of K along a line
  // at offset p reproduces (phi * w)(p).
  {
    double worst = 0.0;
    double rk = ks.dtb_radius();
    for (int i = 0; i < 20; ++i) {
      double p = (rk + 0.3) * rt::seeded_uniform(seed, 2000 + i);
      double xray = 0.0;
      if (p < rk) {
        double len = std::sqrt(rk * rk - p * p);
        xray = rt::integrate_adaptive(
            [&](double s) { return ks.dtb_kernel(std::hypot(p, s)); }, -len,
            len, 1e-9);
      }
      worst = std::max(worst, std::abs(xray - ks.eval_phi_w(p)));
    }
    push("transition_kernel_xray", worst, 1e-6);
  }

  // 6. Filtered-kernel tail: q^2 Psi(q) approaches the moment coefficient.
  {
    double c = ks.tail_coefficient();
    double q0 = ks.config().q_tab;
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
      double q = q0 * (1.0 + i / 40.0);  // [q_tab, 2 q_tab]
      worst = std::max(worst,
                       std::abs(q * q * ks.psi_filtered_exact(q) - c));
    }
    push("filtered_kernel_tail_fit", worst / std::abs(c), 1e-3);
  }

  // 7. Profile variation certificate: TV(H0,[0,L]) <= rate*L + jump allowance.
  {
    rt::PerturbationProfile prof(cfg.profile_kind, cfg.profile);
    double worst = 0.0;
    for (double L : {1.0, 5.0, 17.3}) {
      double tv = prof.total_variation(0.0, L);
      double bound = prof.tv_rate() * L + prof.jump_allowance();
      worst = std::max(worst, tv - bound);
    }
    push("profile_variation_certificate", std::max(worst, 0.0), 1e-9);
  }

  // 8. Model integral families: measured/envelope ratio band per family.
  double band_limit = 10.0;
  rt::ModelSuiteResult suite = rt::model_integral_suite();
  for (const auto& [name, band] : suite.ratio_bands)
    push("model_band_" + name, band, band_limit);

  // Report.
  rt::Manifest man;
  man.add_note("version", kVersion);
  std::filesystem::path p = cfg.out_dir / "verify_report.csv";
  rt::CsvWriter csv(p, {"check", "measured", "threshold", "pass"});
  bool all = true;
  for (const VerifyCheck& c : checks) {
    all = all && c.pass;
    std::printf("%s  %-32s measured = %-13.6g threshold = %g\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                c.threshold);
    csv.row_mixed({c.name, rt::format_g17(c.measured),
                   rt::format_g17(c.threshold), c.pass ? "1" : "0"});
  }
  csv.close();
  man.add_file(p);
  {
    std::filesystem::path e = cfg.out_dir / "config_echo.ini";
    std::FILE* f = std::fopen(e.string().c_str(), "wb");
    if (!f) throw rt::ValidationError("cannot write '" + e.string() + "'");
    std::string echo = rt::echo_config(cfg);
    std::fwrite(echo.data(), 1, echo.size(), f);
    std::fclose(f);
    man.add_file(e);
  }
  man.write(cfg.out_dir / "manifest.txt");
  if (!all) {
    std::printf("verify: FAILED\n");
    return rt::kAccuracyError;
  }
  std::printf("verify: all certificates passed\n");
  return rt::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Reconstruction of rough-edged functions from sampled line integrals"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts o_gen, o_rec, o_dtb, o_sweep, o_verify, o_diag;
  CLI::App* c_gen = app.add_subcommand("gen", "Generate & cache sampled data");
  add_common(c_gen, o_gen);
  CLI::App* c_rec =
      app.add_subcommand("reconstruct", "Reconstruct the local patch");
  add_common(c_rec, o_rec);
  CLI::App* c_dtb =
      app.add_subcommand("dtb", "Evaluate the transition-behavior prediction");
  add_common(c_dtb, o_dtb);
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "Full sweep: data, reconstruction, summary");
  add_common(c_sweep, o_sweep);
  CLI::App* c_verify =
      app.add_subcommand("verify", "Run accuracy certificates");
  add_common(c_verify, o_verify);
  CLI::App* c_diag =
      app.add_subcommand("diag", "Angular Fourier diagnostics");
  add_common(c_diag, o_diag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? rt::kOk : rt::kUsageError;
  }

  const CommonOpts* opt = nullptr;
  std::string stage;
  int (*run)(const CommonOpts&) = nullptr;
  if (c_gen->parsed()) {
    opt = &o_gen; stage = "gen"; run = cmd_gen;
  } else if (c_rec->parsed()) {
    opt = &o_rec; stage = "reconstruct"; run = cmd_reconstruct;
  } else if (c_dtb->parsed()) {
    opt = &o_dtb; stage = "dtb"; run = cmd_dtb;
  } else if (c_sweep->parsed()) {
    opt = &o_sweep; stage = "sweep"; run = cmd_sweep;
  } else if (c_verify->parsed()) {
    opt = &o_verify; stage = "verify"; run = cmd_verify;
  } else if (c_diag->parsed()) {
    opt = &o_diag; stage = "diag"; run = cmd_diag;
  } else {
    std::fprintf(stderr, "error: no subcommand\n");
    return rt::kUsageError;
  }

  try {
    return run(*opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error (%s): %s\n", stage.c_str(), e.what());
    std::filesystem::path out =
        opt->out_dir.empty() ? std::filesystem::path("out")
                             : std::filesystem::path(opt->out_dir);
    try {
      rt::write_failure(out, stage, e);
    } catch (...) {
      // best effort: the failure record must not mask the original error
    }
    return rt::exit_code_for(e);
  }
}
