#include "roughtomo/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "roughtomo/report.hpp"
#include "roughtomo/util.hpp"

namespace roughtomo {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw ValidationError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line, const std::string& key) {
  const char* c = v.c_str();
  char* end = nullptr;
  double x = std::strtod(c, &end);
  if (end == c || *end != '\0' || !std::isfinite(x))
    fail_at(line, key + ": expected a finite number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& v, int line, const std::string& key) {
  const char* c = v.c_str();
  char* end = nullptr;
  long long x = std::strtoll(c, &end, 10);
  if (end == c || *end != '\0')
    fail_at(line, key + ": expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail_at(line, key + ": expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line,
                               const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(item, line, key));
  }
  if (out.empty()) fail_at(line, key + ": expected a comma-separated list");
  return out;
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.eps_list = {0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125,
                  0.0009765625};  // 2^-5 .. 2^-10
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg = default_config();
  std::stringstream ss(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail_at(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"profile", "phantom", "kernels", "grid",
                                    "point",   "patch",   "diagnostics",
                                    "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) fail_at(line, "unknown section [" + section + "]");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail_at(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) fail_at(line, "expected key = value");
    std::string full = section + "." + key;

    if (full == "profile.kind") {
      cfg.profile_kind = profile_kind_from_name(val);
    } else if (full == "profile.amplitude") {
      cfg.profile.amplitude = parse_double(val, line, full);
    } else if (full == "profile.frequency") {
      cfg.profile.frequency = parse_double(val, line, full);
    } else if (full == "profile.weier_a") {
      cfg.profile.weier_a = parse_double(val, line, full);
    } else if (full == "profile.weier_b") {
      cfg.profile.weier_b = parse_double(val, line, full);
    } else if (full == "profile.terms") {
      cfg.profile.terms = static_cast<int>(parse_int(val, line, full));
    } else if (full == "profile.lattice_step") {
      cfg.profile.lattice_step = parse_double(val, line, full);
    } else if (full == "profile.jump_bound") {
      cfg.profile.jump_bound = parse_double(val, line, full);
    } else if (full == "profile.seed") {
      long long v = parse_int(val, line, full);
      if (v < 0) fail_at(line, full + ": seed must be non-negative");
      cfg.profile.seed = static_cast<std::uint64_t>(v);
    } else if (full == "phantom.radius") {
      cfg.radius = parse_double(val, line, full);
    } else if (full == "phantom.arc_halfwidth") {
      cfg.arc_halfwidth = parse_double(val, line, full);
    } else if (full == "phantom.x0_angle") {
      cfg.x0_angle = parse_double(val, line, full);
    } else if (full == "phantom.normal_tilt") {
      cfg.normal_tilt = parse_double(val, line, full);
    } else if (full == "phantom.jump") {
      cfg.jump = parse_double(val, line, full);
    } else if (full == "phantom.mode") {
      if (val == "perturbation")
        cfg.mode = PhantomMode::kPerturbationOnly;
      else if (val == "full")
        cfg.mode = PhantomMode::kFull;
      else
        fail_at(line, "phantom.mode: expected 'perturbation' or 'full'");
    } else if (full == "kernels.beta") {
      cfg.kernels.beta = parse_double(val, line, full);
    } else if (full == "kernels.aperture_degree") {
      cfg.kernels.aperture_degree = static_cast<int>(parse_int(val, line, full));
    } else if (full == "kernels.interp_degree") {
      cfg.kernels.interp_degree = static_cast<int>(parse_int(val, line, full));
    } else if (full == "kernels.q_tab") {
      cfg.kernels.q_tab = parse_double(val, line, full);
    } else if (full == "kernels.psi_step") {
      cfg.kernels.psi_step = parse_double(val, line, full);
    } else if (full == "kernels.dtb_step") {
      cfg.kernels.dtb_step = parse_double(val, line, full);
    } else if (full == "kernels.fourier_t_max") {
      cfg.kernels.fourier_t_max = parse_double(val, line, full);
    } else if (full == "kernels.fourier_step") {
      cfg.kernels.fourier_step = parse_double(val, line, full);
    } else if (full == "kernels.m_cap") {
      cfg.kernels.m_cap = static_cast<int>(parse_int(val, line, full));
    } else if (full == "grid.kappa") {
      cfg.kappa = parse_double(val, line, full);
    } else if (full == "grid.p_bar") {
      cfg.p_bar = parse_double(val, line, full);
    } else if (full == "grid.alpha_bar") {
      cfg.alpha_bar = parse_double(val, line, full);
    } else if (full == "grid.eps_list") {
      cfg.eps_list = parse_list(val, line, full);
    } else if (full == "point.label") {
      cfg.point.label = case_label_from_name(val);
    } else if (full == "point.tangent_offset") {
      cfg.point.tangent_offset = parse_double(val, line, full);
    } else if (full == "point.interior_offset") {
      std::vector<double> v = parse_list(val, line, full);
      if (v.size() != 2) fail_at(line, full + ": expected two numbers");
      cfg.point.interior_offset = {v[0], v[1]};
    } else if (full == "point.screen_M") {
      cfg.point.screen_M = static_cast<int>(parse_int(val, line, full));
    } else if (full == "patch.box") {
      cfg.patch_box = parse_double(val, line, full);
    } else if (full == "patch.step") {
      cfg.patch_step = parse_double(val, line, full);
    } else if (full == "diagnostics.aggregates") {
      cfg.aggregates = parse_bool(val, line, full);
    } else if (full == "diagnostics.mode_cap") {
      cfg.mode_cap = static_cast<int>(parse_int(val, line, full));
    } else if (full == "diagnostics.model_suite") {
      cfg.model_suite = parse_bool(val, line, full);
    } else if (full == "output.dir") {
      cfg.out_dir = val;
    } else if (full == "output.threads") {
      cfg.threads = static_cast<int>(parse_int(val, line, full));
    } else {
      fail_at(line, "unknown key '" + full + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("config: cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void RunConfig::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ValidationError("phantom.radius: must be positive (curvature scale)");
  if (!(arc_halfwidth > 0.0 && arc_halfwidth < 0.25 * std::numbers::pi))
    throw ValidationError(
        "phantom.arc_halfwidth: need 0 < halfwidth < pi/4 so the layer stays "
        "a graph over the arc");
  if (!std::isfinite(x0_angle) || !std::isfinite(normal_tilt))
    throw ValidationError("phantom.x0_angle/normal_tilt: must be finite");
  if (std::abs(normal_tilt) >= 0.5 * std::numbers::pi)
    throw ValidationError(
        "phantom.normal_tilt: |tilt| < pi/2 keeps the origin on the interior "
        "side of the tangent line");
  if (!(jump != 0.0) || !std::isfinite(jump))
    throw ValidationError("phantom.jump: must be nonzero and finite");
  PerturbationProfile probe(profile_kind, profile);  // validates [profile]
  kernels.validate();
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw ValidationError("grid.kappa: must be >= 0 (0 selects the default)");
  if (!std::isfinite(p_bar) || !std::isfinite(alpha_bar))
    throw ValidationError("grid.p_bar/alpha_bar: must be finite");
  if (eps_list.empty())
    throw ValidationError("grid.eps_list: at least one scale is required");
  for (size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 0.25))
      throw ValidationError(
          "grid.eps_list: each scale must lie in (0, 1/4] (asymptotic regime)");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw ValidationError("grid.eps_list: scales must be strictly decreasing");
  }
  double sup = probe.sup_bound();
  for (double e : eps_list)
    if (e * sup > 0.45 * radius)
      throw ValidationError(
          "grid.eps_list: eps * sup|H0| must stay below 0.45 * radius so the "
          "perturbed layer stays inside the annulus");
  if (!(point.tangent_offset > 0.05 && point.tangent_offset < 2.0 * radius))
    throw ValidationError(
        "point.tangent_offset: need 0.05 < offset < 2*radius (case B point "
        "must sit on the tangent line away from the curve)");
  if (point.interior_offset.norm() >= 0.7 * radius)
    throw ValidationError(
        "point.interior_offset: |offset| < 0.7*radius keeps the case C point "
        "strictly interior with a tangency margin");
  if (point.screen_M < 64 || point.screen_M > (1 << 20))
    throw ValidationError("point.screen_M: need 64 <= M <= 2^20");
  if (!(patch_box > 0.0 && patch_box <= 64.0))
    throw ValidationError("patch.box: need 0 < box <= 64 (units of eps)");
  if (!(patch_step > 0.0 && patch_step <= patch_box))
    throw ValidationError("patch.step: need 0 < step <= patch.box");
  if (mode_cap < 0 || mode_cap > 256)
    throw ValidationError("diagnostics.mode_cap: need 0 <= cap <= 256");
  if (threads < 1 || threads > 64)
    throw ValidationError("output.threads: need 1 <= threads <= 64");
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[profile]\n";
  os << "kind = " << profile_kind_name(cfg.profile_kind) << "\n";
  os << "amplitude = " << format_g17(cfg.profile.amplitude) << "\n";
  os << "frequency = " << format_g17(cfg.profile.frequency) << "\n";
  os << "weier_a = " << format_g17(cfg.profile.weier_a) << "\n";
  os << "weier_b = " << format_g17(cfg.profile.weier_b) << "\n";
  os << "terms = " << cfg.profile.terms << "\n";
  os << "lattice_step = " << format_g17(cfg.profile.lattice_step) << "\n";
  os << "jump_bound = " << format_g17(cfg.profile.jump_bound) << "\n";
  os << "seed = " << cfg.profile.seed << "\n";
  os << "\n[phantom]\n";
  os << "radius = " << format_g17(cfg.radius) << "\n";
  os << "arc_halfwidth = " << format_g17(cfg.arc_halfwidth) << "\n";
  os << "x0_angle = " << format_g17(cfg.x0_angle) << "\n";
  os << "normal_tilt = " << format_g17(cfg.normal_tilt) << "\n";
  os << "jump = " << format_g17(cfg.jump) << "\n";
  os << "mode = "
     << (cfg.mode == PhantomMode::kFull ? "full" : "perturbation") << "\n";
  os << "\n[kernels]\n";
  os << "beta = " << format_g17(cfg.kernels.beta) << "\n";
  os << "aperture_degree = " << cfg.kernels.aperture_degree << "\n";
  os << "interp_degree = " << cfg.kernels.interp_degree << "\n";
  os << "q_tab = " << format_g17(cfg.kernels.q_tab) << "\n";
  os << "psi_step = " << format_g17(cfg.kernels.psi_step) << "\n";
  os << "dtb_step = " << format_g17(cfg.kernels.dtb_step) << "\n";
  os << "fourier_t_max = " << format_g17(cfg.kernels.fourier_t_max) << "\n";
  os << "fourier_step = " << format_g17(cfg.kernels.fourier_step) << "\n";
  os << "m_cap = " << cfg.kernels.m_cap << "\n";
  os << "\n[grid]\n";
  os << "kappa = " << format_g17(cfg.kappa) << "\n";
  os << "p_bar = " << format_g17(cfg.p_bar) << "\n";
  os << "alpha_bar = " << format_g17(cfg.alpha_bar) << "\n";
  os << "eps_list = ";
  for (size_t i = 0; i < cfg.eps_list.size(); ++i)
    os << (i ? ", " : "") << format_g17(cfg.eps_list[i]);
  os << "\n";
  os << "\n[point]\n";
  os << "label = " << case_label_name(cfg.point.label) << "\n";
  os << "tangent_offset = " << format_g17(cfg.point.tangent_offset) << "\n";
  os << "interior_offset = " << format_g17(cfg.point.interior_offset.x) << ", "
     << format_g17(cfg.point.interior_offset.y) << "\n";
  os << "screen_M = " << cfg.point.screen_M << "\n";
  os << "\n[patch]\n";
  os << "box = " << format_g17(cfg.patch_box) << "\n";
  os << "step = " << format_g17(cfg.patch_step) << "\n";
  os << "\n[diagnostics]\n";
  os << "aggregates = " << (cfg.aggregates ? "true" : "false") << "\n";
  os << "mode_cap = " << cfg.mode_cap << "\n";
  os << "model_suite = " << (cfg.model_suite ? "true" : "false") << "\n";
  os << "\n[output]\n";
  os << "dir = " << cfg.out_dir.string() << "\n";
  os << "threads = " << cfg.threads << "\n";
  return os.str();
}

BaseCurve make_curve(const RunConfig& cfg) {
  BaseCurve c;
  Vec2 x0 = unit_vec(cfg.x0_angle);
  Vec2 inward = unit_vec(cfg.x0_angle + std::numbers::pi - cfg.normal_tilt);
  c.center = x0 + inward * cfg.radius;
  c.radius = cfg.radius;
  c.arc_halfwidth = cfg.arc_halfwidth;
  c.phase = cfg.x0_angle - cfg.normal_tilt;
  c.validate();
  return c;
}

Phantom make_phantom(const RunConfig& cfg) {
  PerturbationProfile prof(cfg.profile_kind, cfg.profile);
  return Phantom(make_curve(cfg), prof, cfg.jump, cfg.mode);
}

double resolve_kappa(const RunConfig& cfg, Vec2 x0) {
  if (cfg.kappa > 0.0) return cfg.kappa;
  double r = x0.norm();
  if (r < 1e-9)
    throw CoordinateFailure(
        "kappa default needs |x0| > 0: the angular step is tied to the "
        "screened combination kappa * |x0|");
  return std::numbers::phi / r;
}

}  // namespace roughtomo
