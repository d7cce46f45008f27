#pragma once

// Run configuration: INI-style file with [section] blocks, parsed into a
// validated RunConfig. Every run echoes its fully-resolved configuration
// next to the outputs, and the echo parses back to an identical RunConfig.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roughtomo/errors.hpp"
#include "roughtomo/kernels.hpp"
#include "roughtomo/perturbation.hpp"
#include "roughtomo/phantom.hpp"

namespace roughtomo {

struct RunConfig {
  // [profile]
  ProfileKind profile_kind = ProfileKind::kPiecewiseConstantLattice;
  ProfileParams profile;

  // [phantom]
  double radius = 1.0;
  double arc_halfwidth = 0.3;
  double x0_angle = 0.2;      // polar angle of the on-curve point x0
  double normal_tilt = 0.6;   // tilt of the interior normal at x0
  double jump = 1.0;
  PhantomMode mode = PhantomMode::kPerturbationOnly;

  // [kernels]
  KernelConfig kernels;

  // [grid]
  double kappa = 0.0;         // 0 = auto: golden ratio / |x0|
  double p_bar = 0.0;
  double alpha_bar = 1.7320508075688772e-3;  // sqrt(3) * 1e-3
  std::vector<double> eps_list;              // strictly decreasing

  // [point]
  PointSpec point;

  // [patch]
  double patch_box = 4.0;
  double patch_step = 0.25;

  // [diagnostics]
  bool aggregates = false;
  int mode_cap = 0;           // 0 = auto: ceil(eps^{-1/(2(beta-1))})
  bool model_suite = false;

  // [output]
  std::filesystem::path out_dir = "out";
  int threads = 1;

  void validate() const;  // ValidationError naming key and violated assumption
};

RunConfig default_config();
RunConfig parse_config_text(const std::string& text);   // ValidationError w/ line
RunConfig load_config(const std::filesystem::path& path);
std::string echo_config(const RunConfig& cfg);          // canonical round-trip form

// Derived helpers shared by the pipeline.
BaseCurve make_curve(const RunConfig& cfg);
Phantom make_phantom(const RunConfig& cfg);
double resolve_kappa(const RunConfig& cfg, Vec2 x0);

}  // namespace roughtomo
