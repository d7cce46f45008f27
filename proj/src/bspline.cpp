#include "roughtomo/bspline.hpp"

#include <cmath>
#include <stdexcept>

#include "roughtomo/errors.hpp"

namespace roughtomo {

namespace {

// Value of a piece's ascending-coefficient polynomial at local offset z.
double horner(const std::vector<double>& c, double z) {
  double v = 0.0;
  for (size_t i = c.size(); i-- > 0;) v = v * z + c[i];
  return v;
}

}  // namespace

BSpline BSpline::centered(int degree) {
  if (degree < 0 || degree > 18)
    throw ValidationError("BSpline::centered: degree out of range [0,18]");
  BSpline b;
  b.degree_ = 0;
  b.knot0_ = -0.5;
  b.pieces_ = {{1.0}};
  // Convolve with the unit box `degree` times: each step raises the degree by
  // one and adds a piece.  B_d(x) = A(x + 1/2) - A(x - 1/2) with A the
  // antiderivative of B_{d-1}; in local piece coordinates both evaluations
  // share the same offset, so the new piece i is A_i - A_{i-1} with A_{-1} = 0
  // and A_{n} = 1 (total mass).
  for (int d = 1; d <= degree; ++d) {
    int np = d;  // pieces of B_{d-1}
    // Antiderivative polynomials per piece including the running constant.
    std::vector<std::vector<double>> anti(np);
    double running = 0.0;
    for (int i = 0; i < np; ++i) {
      const std::vector<double>& c = b.pieces_[i];
      std::vector<double> a(c.size() + 1);
      a[0] = running;
      for (size_t j = 0; j < c.size(); ++j) a[j + 1] = c[j] / (j + 1.0);
      running = horner(a, 1.0);  // value at the right knot
      anti[i] = std::move(a);
    }
    std::vector<std::vector<double>> next(np + 1);
    for (int i = 0; i <= np; ++i) {
      std::vector<double> hi = (i < np) ? anti[i] : std::vector<double>{running};
      std::vector<double> lo = (i > 0) ? anti[i - 1] : std::vector<double>{0.0};
      if (hi.size() < lo.size()) hi.resize(lo.size(), 0.0);
      if (lo.size() < hi.size()) lo.resize(hi.size(), 0.0);
      for (size_t j = 0; j < hi.size(); ++j) hi[j] -= lo[j];
      next[i] = std::move(hi);
    }
    b.pieces_ = std::move(next);
    b.degree_ = d;
    b.knot0_ = -0.5 * (d + 1);
  }
  return b;
}

double BSpline::operator()(double x) const {
  double rel = x - knot0_;
  if (rel < 0.0 || rel >= pieces_.size()) return 0.0;
  int i = static_cast<int>(rel);
  return horner(pieces_[i], rel - i);
}

double BSpline::derivative(double x) const {
  double rel = x - knot0_;
  if (rel < 0.0 || rel >= pieces_.size()) return 0.0;
  int i = static_cast<int>(rel);
  const std::vector<double>& c = pieces_[i];
  double z = rel - i, v = 0.0;
  for (size_t j = c.size(); j-- > 1;) v = v * z + j * c[j];
  return v;
}

double BSpline::antiderivative(double x) const {
  double rel = x - knot0_;
  if (rel < 0.0) return 0.0;
  double acc = 0.0;
  int i = 0;
  for (; i < static_cast<int>(pieces_.size()) && i + 1.0 <= rel; ++i) {
    const std::vector<double>& c = pieces_[i];
    for (size_t j = 0; j < c.size(); ++j) acc += c[j] / (j + 1.0);
  }
  if (i < static_cast<int>(pieces_.size())) {
    const std::vector<double>& c = pieces_[i];
    double z = rel - i, zp = z;
    for (size_t j = 0; j < c.size(); ++j) {
      acc += c[j] * zp / (j + 1.0);
      zp *= z;
    }
  }
  return acc;
}

double BSpline::moment(int k) const {
  if (k < 0) throw ValidationError("BSpline::moment: negative order");
  // Per piece: int_0^1 p(z) (z + a)^k dz with a = knot(i), expanded binomially.
  long double total = 0.0L;
  for (size_t i = 0; i < pieces_.size(); ++i) {
    long double a = knot0_ + static_cast<long double>(i);
    const std::vector<double>& c = pieces_[i];
    long double binom = 1.0L;  // binom(k, j), updated per j
    for (int j = 0; j <= k; ++j) {
      long double ap = 1.0L;
      for (int t = 0; t < k - j; ++t) ap *= a;
      // int_0^1 z^(m+j) dz = 1/(m+j+1)
      long double inner = 0.0L;
      for (size_t m = 0; m < c.size(); ++m)
        inner += static_cast<long double>(c[m]) / (m + j + 1.0L);
      total += binom * ap * inner;
      binom = binom * (k - j) / (j + 1.0L);
    }
  }
  return static_cast<double>(total);
}

BSpline BSpline::derivative_spline() const {
  BSpline d;
  d.degree_ = degree_ > 0 ? degree_ - 1 : 0;
  d.knot0_ = knot0_;
  d.pieces_.reserve(pieces_.size());
  for (const std::vector<double>& c : pieces_) {
    std::vector<double> dc;
    for (size_t j = 1; j < c.size(); ++j) dc.push_back(j * c[j]);
    if (dc.empty()) dc.push_back(0.0);
    d.pieces_.push_back(std::move(dc));
  }
  return d;
}

double bspline_cox_de_boor(int degree, double x) {
  int d = degree;
  int nk = d + 2;
  std::vector<double> t(nk);
  for (int i = 0; i < nk; ++i) t[i] = -0.5 * (d + 1) + i;
  std::vector<double> N(nk - 1);
  for (int i = 0; i + 1 < nk; ++i) N[i] = (x >= t[i] && x < t[i + 1]) ? 1.0 : 0.0;
  for (int r = 1; r <= d; ++r)
    for (int i = 0; i + r + 1 < nk; ++i)
      N[i] = ((x - t[i]) * N[i] + (t[i + r + 1] - x) * N[i + 1]) / r;
  return N[0];
}

}  // namespace roughtomo
