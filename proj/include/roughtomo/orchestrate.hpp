#pragma once

// Pipeline assembly shared by the command-line tool and the acceptance
// battery: build kernels/phantom/point from a RunConfig, generate or load
// cached data, reconstruct patches across the epsilon sweep, and emit CSVs.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roughtomo/config.hpp"
#include "roughtomo/diagnostics.hpp"
#include "roughtomo/reconstruct.hpp"
#include "roughtomo/report.hpp"
#include "roughtomo/sinogram.hpp"

namespace roughtomo {

struct SweepRecord {
  double eps = 0.0;
  double sup_norm = 0.0;       // max |f_rec - dtb| over the patch
  double envelope = 0.0;       // sqrt(eps) * log(1/eps)
  double ratio = 0.0;          // sup_norm / envelope
  double max_dtb = 0.0;
  double max_frec = 0.0;
  std::size_t cells = 0;
  double gen_seconds = 0.0;
  double recon_seconds = 0.0;
  RemainderField field;        // full patch values backing the CSV artifacts
  std::optional<DiagnosticSums> diag;
};

struct SweepReport {
  EvalPoint point;
  std::vector<SweepRecord> records;
  double slope = 0.0;          // least-squares slope of log sup_norm vs log eps
  double max_ratio = 0.0, min_ratio = 0.0;
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg,
                    std::filesystem::path cache_dir = {});

  const RunConfig& config() const { return cfg_; }
  const KernelSet& kernels() const { return ks_; }
  const Phantom& phantom() const { return ph_; }
  const EvalPoint& point() const { return pt_; }

  SinogramGrid grid_for(double eps) const;
  // Generate (or load from cache when available) the samples for one eps.
  Sinogram data_for(double eps, double* gen_seconds = nullptr);

  RemainderField field_for(const Sinogram& s);
  SweepReport run_sweep(bool with_diagnostics);

  // Writers: CSV per epsilon plus a sweep summary and manifest in out_dir.
  void write_field_csv(const RemainderField& f, int index, Manifest& man) const;
  void write_sweep_csv(const SweepReport& rep, Manifest& man) const;
  void write_diag_csv(const SweepReport& rep, Manifest& man) const;
  void write_point_json(Manifest& man) const;
  void write_echo(Manifest& man) const;

 private:
  RunConfig cfg_;
  std::filesystem::path cache_dir_;
  KernelSet ks_;
  Phantom ph_;
  EvalPoint pt_;
};

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace roughtomo
