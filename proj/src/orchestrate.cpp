#include "roughtomo/orchestrate.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <utility>

#include <json.hpp>

namespace roughtomo {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

KernelSet build_kernels(const RunConfig& cfg) {
  cfg.validate();
  return KernelSet::build(cfg.kernels, cfg.threads);
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg, std::filesystem::path cache_dir)
    : cfg_(std::move(cfg)),
      cache_dir_(std::move(cache_dir)),
      ks_(build_kernels(cfg_)),
      ph_(make_phantom(cfg_)) {
  PointSpec spec = cfg_.point;
  if (cfg_.kappa > 0.0) spec.kappa = cfg_.kappa;
  pt_ = select_point(ph_, spec);
}

SinogramGrid Pipeline::grid_for(double eps) const {
  return SinogramGrid::make(ph_, ks_, eps, pt_.kappa, cfg_.p_bar,
                            cfg_.alpha_bar);
}

Sinogram Pipeline::data_for(double eps, double* gen_seconds) {
  SinogramGrid grid = grid_for(eps);
  bool full = ph_.mode() == PhantomMode::kFull;
  if (gen_seconds) *gen_seconds = 0.0;
  if (!cache_dir_.empty()) {
    std::filesystem::path stem = cache_stem(cache_dir_, ph_, grid, full);
    std::filesystem::path bin = stem;
    bin += ".bin";
    if (std::filesystem::exists(bin)) {
      try {
        return load_sinogram(stem);
      } catch (const ValidationError&) {
        // stale or corrupt cache entry: fall through and regenerate
      }
    }
    auto t0 = std::chrono::steady_clock::now();
    Sinogram s = sample_data(ph_, grid, ks_, cfg_.threads);
    if (gen_seconds) *gen_seconds = seconds_since(t0);
    save_sinogram(s, stem);
    return s;
  }
  auto t0 = std::chrono::steady_clock::now();
  Sinogram s = sample_data(ph_, grid, ks_, cfg_.threads);
  if (gen_seconds) *gen_seconds = seconds_since(t0);
  return s;
}

RemainderField Pipeline::field_for(const Sinogram& s) {
  LocalPatch patch =
      LocalPatch::make(pt_.x0, s.grid.eps, cfg_.patch_box, cfg_.patch_step);
  return remainder_field(ph_, s, ks_, patch, cfg_.threads);
}

SweepReport Pipeline::run_sweep(bool with_diagnostics) {
  SweepReport rep;
  rep.point = pt_;
  std::vector<double> xs, ys;
  for (double eps : cfg_.eps_list) {
    SweepRecord rec;
    rec.eps = eps;
    Sinogram s = data_for(eps, &rec.gen_seconds);
    rec.cells = s.cell_count();
    auto t0 = std::chrono::steady_clock::now();
    rec.field = field_for(s);
    rec.recon_seconds = seconds_since(t0);
    rec.sup_norm = rec.field.sup_norm;
    rec.envelope = std::sqrt(eps) * std::log(1.0 / eps);
    rec.ratio = rec.envelope > 0.0 ? rec.sup_norm / rec.envelope : 0.0;
    rec.max_dtb = rec.field.max_dtb;
    rec.max_frec = rec.field.max_frec;
    if (with_diagnostics)
      rec.diag = diagnostic_sums(ph_, ks_, s.grid, pt_.x0, cfg_.threads,
                                 cfg_.mode_cap > 0 ? cfg_.mode_cap : 64);
    if (rec.sup_norm > 0.0) {
      xs.push_back(eps);
      ys.push_back(rec.sup_norm);
    }
    rep.records.push_back(std::move(rec));
  }
  rep.slope = fit_log_slope(xs, ys);
  bool first = true;
  for (const SweepRecord& r : rep.records) {
    if (first) {
      rep.max_ratio = rep.min_ratio = r.ratio;
      first = false;
    } else {
      rep.max_ratio = std::max(rep.max_ratio, r.ratio);
      rep.min_ratio = std::min(rep.min_ratio, r.ratio);
    }
  }
  return rep;
}

void Pipeline::write_field_csv(const RemainderField& f, int index,
                               Manifest& man) const {
  std::filesystem::path p =
      cfg_.out_dir / ("remainder_eps_" + std::to_string(index) + ".csv");
  CsvWriter csv(p, {"eps", "x1", "x2", "f_rec", "dtb", "remainder"});
  for (size_t i = 0; i < f.patch.xcheck.size(); ++i) {
    Vec2 x = f.patch.x0 + f.patch.xcheck[i] * f.patch.eps;
    csv.row({f.patch.eps, x.x, x.y, f.f_rec[i], f.dtb[i], f.remainder[i]});
  }
  csv.close();
  man.add_file(p);
}

void Pipeline::write_sweep_csv(const SweepReport& rep, Manifest& man) const {
  std::filesystem::path p = cfg_.out_dir / "sweep_summary.csv";
  // No wall-clock columns: every artifact must be byte-identical across reruns.
  CsvWriter csv(p, {"eps", "sup_norm", "envelope", "ratio", "max_dtb",
                    "max_frec", "cells"});
  for (const SweepRecord& r : rep.records)
    csv.row({r.eps, r.sup_norm, r.envelope, r.ratio, r.max_dtb, r.max_frec,
             static_cast<double>(r.cells)});
  csv.close();
  man.add_file(p);
  man.add_note("slope", format_g17(rep.slope));
  man.add_note("max_ratio", format_g17(rep.max_ratio));
  man.add_note("min_ratio", format_g17(rep.min_ratio));
}

void Pipeline::write_diag_csv(const SweepReport& rep, Manifest& man) const {
  std::filesystem::path p = cfg_.out_dir / "diagnostics.csv";
  CsvWriter csv(p, {"eps", "M", "sum_I", "sum_II", "sum_I_normalized",
                    "sum_II_normalized"});
  std::filesystem::path pm = cfg_.out_dir / "diag_modes.csv";
  CsvWriter modes(pm, {"eps", "m", "mode_abs"});
  std::filesystem::path pa = cfg_.out_dir / "am_table.csv";
  CsvWriter am(pa, {"eps", "k", "m", "re", "im"});
  bool any = false;
  for (const SweepRecord& r : rep.records) {
    if (!r.diag) continue;
    any = true;
    const DiagnosticSums& d = *r.diag;
    csv.row({d.eps, static_cast<double>(d.M), d.sum_I, d.sum_II,
             d.sum_I_normalized, d.sum_II_normalized});
    for (int m = 1; m <= d.M; ++m)
      modes.row({d.eps, static_cast<double>(m), d.mode_abs[m - 1]});
    for (size_t ki = 0; ki < d.am_table.size(); ++ki)
      for (int m = 0; m <= d.M; ++m)
        am.row({d.eps, static_cast<double>(d.k_lo + static_cast<int>(ki)),
                static_cast<double>(m), d.am_table[ki][m].real(),
                d.am_table[ki][m].imag()});
  }
  csv.close();
  modes.close();
  am.close();
  if (any) {
    man.add_file(p);
    man.add_file(pm);
    man.add_file(pa);
  }
}

void Pipeline::write_point_json(Manifest& man) const {
  nlohmann::json j;
  j["label"] = case_label_name(pt_.label);
  j["x0"] = {pt_.x0.x, pt_.x0.y};
  j["kappa"] = pt_.kappa;
  j["s1"] = pt_.s1;
  j["s2"] = pt_.s2;
  j["tangency_margin"] = pt_.tangency_margin;
  j["eta_hat"] = pt_.eta_hat;
  j["screen_stat"] = pt_.screen_stat;
  std::filesystem::path p = cfg_.out_dir / "point.json";
  std::filesystem::create_directories(cfg_.out_dir);
  std::ofstream out(p, std::ios::trunc);
  if (!out)
    throw ValidationError("cannot write '" + p.string() + "'");
  out << j.dump(2) << '\n';
  out.close();
  man.add_file(p);
}

void Pipeline::write_echo(Manifest& man) const {
  std::filesystem::path p = cfg_.out_dir / "config_echo.ini";
  std::filesystem::create_directories(cfg_.out_dir);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ValidationError("cannot write '" + p.string() + "'");
  out << echo_config(cfg_);
  out.close();
  man.add_file(p);
}

double fit_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ValidationError("fit_log_slope: mismatched series");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  size_t n = lx.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return 0.0;
  return sxy / sxx;
}

}  // namespace roughtomo
