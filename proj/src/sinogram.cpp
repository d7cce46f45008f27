#include "roughtomo/sinogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "roughtomo/quadrature.hpp"
#include "roughtomo/report.hpp"

namespace roughtomo {

namespace {
constexpr double kPi = std::numbers::pi;
}

SinogramGrid SinogramGrid::make(const Phantom& ph, const KernelSet& ks,
                                double eps, double kappa, double p_bar,
                                double alpha_bar) {
  if (!(eps > 0.0 && eps < 0.25))
    throw ValidationError("grid.eps: need 0 < eps < 1/4");
  if (!(kappa > 0.0))
    throw ValidationError("grid.kappa: must be positive");
  SinogramGrid g;
  g.eps = eps;
  g.kappa = kappa;
  g.p_bar = p_bar;
  g.alpha_bar = alpha_bar;
  double da = kappa * eps;
  g.k_lo = static_cast<int>(std::ceil((-0.5 * kPi - alpha_bar) / da));
  g.k_hi = static_cast<int>(std::floor((0.5 * kPi - alpha_bar) / da));

  // Envelope of all row supports, padded by the aperture radius (data side)
  // plus the interpolation radius plus one cell (reconstruction side).
  int pad = static_cast<int>(std::ceil(ks.aperture().support_radius() +
                                       ks.interp().support_radius())) +
            1;
  double plo = 1e300, phi = -1e300;
  for (int k = g.k_lo; k <= g.k_hi; ++k) {
    auto [a, b] = ph.p_support(g.alpha(k), eps);
    plo = std::min(plo, a);
    phi = std::max(phi, b);
  }
  g.j_lo = static_cast<int>(std::floor((plo - p_bar) / eps)) - pad;
  g.j_hi = static_cast<int>(std::ceil((phi - p_bar) / eps)) + pad;
  g.validate();
  return g;
}

void SinogramGrid::validate() const {
  if (!(eps > 0.0) || !(kappa > 0.0))
    throw ValidationError("grid: eps and kappa must be positive");
  if (k_hi < k_lo || j_hi < j_lo)
    throw ValidationError("grid: empty angle or offset range");
  if (std::abs(alpha(k_lo)) > 0.5 * kPi + dalpha() ||
      std::abs(alpha(k_hi)) > 0.5 * kPi + dalpha())
    throw ValidationError("grid: angle range exceeds the half-circle");
}

double Sinogram::value(int k, int j) const {
  const SinogramRow& r = row(k);
  int idx = j - r.j0;
  if (idx < 0 || idx >= static_cast<int>(r.v.size())) return 0.0;
  return r.v[idx];
}

std::size_t Sinogram::cell_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.v.size();
  return n;
}

std::uint64_t Sinogram::content_hash() const {
  std::uint64_t h = fnv1a(&grid.eps, sizeof(double));
  h = fnv1a(&grid.kappa, sizeof(double), h);
  for (const auto& r : rows) {
    h = fnv1a(&r.j0, sizeof r.j0, h);
    if (!r.v.empty()) h = fnv1a(r.v.data(), r.v.size() * sizeof(double), h);
  }
  return h;
}

Sinogram sample_data(const Phantom& ph, const SinogramGrid& grid,
                     const KernelSet& ks, int threads, double tol) {
  grid.validate();
  Sinogram s;
  s.grid = grid;
  s.full_mode = ph.mode() == PhantomMode::kFull;
  s.phantom_hash = ph.hash();
  s.quad_tol = tol;
  int nk = grid.n_angles();
  s.rows.assign(nk, SinogramRow{});

  const double eps = grid.eps;
  const double wsr = ks.aperture().support_radius();
  const int pad = static_cast<int>(std::ceil(wsr + ks.interp().support_radius())) + 1;
  const BSpline& w = ks.aperture();

  // aperture knot breakpoints for the sigma quadrature
  std::vector<double> wknots;
  for (int i = 0; i <= w.piece_count(); ++i) wknots.push_back(w.knot(i));

  // Row bounds first (serial: coverage errors surface before the heavy work).
  std::vector<std::pair<int, int>> bounds(nk);
  for (int ki = 0; ki < nk; ++ki) {
    int k = grid.k_lo + ki;
    auto [plo, phi] = ph.p_support(grid.alpha(k), eps);
    int j0 = static_cast<int>(std::floor((plo - grid.p_bar) / eps)) - pad;
    int j1 = static_cast<int>(std::ceil((phi - grid.p_bar) / eps)) + pad;
    if (j0 < grid.j_lo || j1 > grid.j_hi)
      throw GridCoverageError(
          "sample_data: offset lattice does not cover the padded support of "
          "angle row " +
          std::to_string(k));
    bounds[ki] = {j0, j1};
  }

  std::vector<std::string> errors(nk);
  parallel_for(nk, threads, [&](size_t ki) {
    try {
      int k = grid.k_lo + static_cast<int>(ki);
      double alpha = grid.alpha(k);
      auto [j0, j1] = bounds[ki];
      SinogramRow row;
      row.j0 = j0;
      row.v.assign(j1 - j0 + 1, 0.0);
      for (int j = j0; j <= j1; ++j) {
        double pj = grid.p(j);
        // v = int w(sigma) * Radon(alpha, pj - eps*sigma) dsigma.
        // The integrand has square-root kinks where the line is tangent to
        // the phantom's bounding circles: the base circle (every layer band
        // has an edge there, and the disk chord ends there in full mode) and
        // the extreme layer radii.
        std::vector<double> bp = wknots;
        double pc = unit_vec(alpha).dot(ph.curve().center);
        double hb = ph.layer_bound(eps);
        for (double r : {ph.curve().radius - hb, ph.curve().radius,
                         ph.curve().radius + hb}) {
          for (double edge : {pc - r, pc + r}) {
            double sig = (pj - edge) / eps;
            if (sig > -wsr && sig < wsr) bp.push_back(sig);
          }
        }
        row.v[j - j0] = integrate_adaptive(
            [&](double sig) {
              return w(sig) * ph.radon(alpha, pj - eps * sig, eps);
            },
            bp, tol);
      }
      s.rows[ki] = std::move(row);
    } catch (const std::exception& e) {
      errors[ki] = e.what();
    }
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw QuadratureFailure("sample_data: " + e);

  // Coverage certificate: stored rows must decay to ~0 at their ends.
  for (int k = grid.k_lo; k <= grid.k_hi; ++k) {
    const SinogramRow& r = s.row(k);
    if (r.v.size() >= 2) {
      if (std::abs(r.v.front()) > 1e-9 || std::abs(r.v.back()) > 1e-9)
        throw GridCoverageError(
            "sample_data: row support touches the stored window edge at angle " +
            std::to_string(k));
    }
  }
  return s;
}

std::pair<int, int> data_row_support(const Sinogram& s, int k, double floor_) {
  const SinogramRow& r = s.row(k);
  int lo = r.j0 + static_cast<int>(r.v.size());
  int hi = r.j0 - 1;
  for (size_t i = 0; i < r.v.size(); ++i) {
    if (std::abs(r.v[i]) > floor_) {
      lo = std::min(lo, r.j0 + static_cast<int>(i));
      hi = std::max(hi, r.j0 + static_cast<int>(i));
    }
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Cache: <stem>.bin (payload) + <stem>.manifest (provenance + checksum).

namespace {
constexpr std::uint32_t kCacheMagic = 0x52544F4D;  // "RTOM"
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

void save_sinogram(const Sinogram& s, const std::filesystem::path& stem) {
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("save_sinogram: cannot open " + bin.string());
  auto put = [&](const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put(&kCacheMagic, 4);
  put(&kCacheVersion, 4);
  put(&s.grid, sizeof s.grid);
  std::uint8_t fm = s.full_mode ? 1 : 0;
  put(&fm, 1);
  put(&s.phantom_hash, 8);
  put(&s.quad_tol, 8);
  std::uint32_t nrows = static_cast<std::uint32_t>(s.rows.size());
  put(&nrows, 4);
  for (const auto& r : s.rows) {
    std::int32_t j0 = r.j0;
    std::uint32_t n = static_cast<std::uint32_t>(r.v.size());
    put(&j0, 4);
    put(&n, 4);
    if (n) put(r.v.data(), n * sizeof(double));
  }
  out.close();

  std::filesystem::path man = stem;
  man += ".manifest";
  std::ofstream m(man, std::ios::trunc);
  m << "format rtom-cache-v" << kCacheVersion << "\n";
  m << "eps " << s.grid.eps << "\n";
  m << "cells " << s.cell_count() << "\n";
  double max_abs = 0.0;
  for (const auto& r : s.rows)
    for (double v : r.v) max_abs = std::max(max_abs, std::abs(v));
  m << "max_abs " << (max_abs == 0.0 ? "exact-zero" : format_g17(max_abs))
    << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(s.phantom_hash));
  m << "phantom " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(s.content_hash()));
  m << "content " << buf << "\n";
}

Sinogram load_sinogram(const std::filesystem::path& stem) {
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ValidationError("load_sinogram: missing " + bin.string());
  auto get = [&](void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw ValidationError("load_sinogram: truncated " + bin.string());
  };
  std::uint32_t magic = 0, ver = 0;
  get(&magic, 4);
  get(&ver, 4);
  if (magic != kCacheMagic || ver != kCacheVersion)
    throw ValidationError("load_sinogram: bad magic/version");
  Sinogram s;
  get(&s.grid, sizeof s.grid);
  std::uint8_t fm = 0;
  get(&fm, 1);
  s.full_mode = fm != 0;
  get(&s.phantom_hash, 8);
  get(&s.quad_tol, 8);
  std::uint32_t nrows = 0;
  get(&nrows, 4);
  if (nrows > 1u << 24) throw ValidationError("load_sinogram: corrupt row count");
  s.rows.resize(nrows);
  for (auto& r : s.rows) {
    std::int32_t j0 = 0;
    std::uint32_t n = 0;
    get(&j0, 4);
    get(&n, 4);
    if (n > 1u << 28) throw ValidationError("load_sinogram: corrupt row length");
    r.j0 = j0;
    r.v.resize(n);
    if (n) get(r.v.data(), n * sizeof(double));
  }

  // verify against the sidecar manifest
  std::filesystem::path man = stem;
  man += ".manifest";
  std::ifstream m(man);
  if (!m) throw ValidationError("load_sinogram: missing manifest " + man.string());
  std::string key, val;
  std::string content_hex;
  while (m >> key >> val) {
    if (key == "content") content_hex = val;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(s.content_hash()));
  if (content_hex != buf)
    throw ValidationError("load_sinogram: checksum mismatch (corrupt cache)");
  return s;
}

std::filesystem::path cache_stem(const std::filesystem::path& dir,
                                 const Phantom& ph, const SinogramGrid& g,
                                 bool full_mode) {
  std::uint64_t h = ph.hash();
  h = fnv1a(&g, sizeof g, h);
  std::uint8_t fm = full_mode ? 1 : 0;
  h = fnv1a(&fm, 1, h);
  std::ostringstream name;
  name << "sino_" << std::hex << h;
  return dir / name.str();
}

}  // namespace roughtomo
