#pragma once

#include <vector>

namespace roughtomo {

// Centered cardinal B-spline of degree d: support [-(d+1)/2, (d+1)/2], knots
// spaced 1 apart, unit integral, partition of unity on the integer lattice.
// Stored as exact piecewise polynomials (coefficients are rationals with
// denominator d!, built by repeated box convolution; exact in double through
// the degrees used here).
class BSpline {
 public:
  BSpline() = default;  // empty; build via centered() or derivative_spline()
  static BSpline centered(int degree);

  double operator()(double x) const;
  double derivative(double x) const;                  // d/dx
  double antiderivative(double x) const;              // int_{-inf}^x
  int degree() const { return degree_; }
  double support_radius() const { return 0.5 * (degree_ + 1); }

  // int x^k B(x) dx, exact piecewise-polynomial integration.
  double moment(int k) const;

  int piece_count() const { return static_cast<int>(pieces_.size()); }
  double knot(int i) const { return knot0_ + i; }     // piece i spans [knot(i), knot(i+1)]
  // Ascending coefficients of piece i in the local variable z = x - knot(i).
  const std::vector<double>& piece_coeffs(int i) const { return pieces_[i]; }

  // Piecewise polynomial of the derivative (degree-1 pieces on same knots).
  BSpline derivative_spline() const;

 private:
  int degree_ = 0;
  double knot0_ = 0.0;                                // leftmost knot
  std::vector<std::vector<double>> pieces_;           // ascending coeffs per piece
};

// Reference evaluation via the Cox-de Boor recursion (independent of the
// piecewise-polynomial construction; used as a test oracle).
double bspline_cox_de_boor(int degree, double x);

}  // namespace roughtomo
