#pragma once

// Diophantine screening of sampling-geometry constants and the scalar model
// integrals used to sanity-check the building blocks of the remainder bound.

#include <cstdint>
#include <string>
#include <vector>

#include "roughtomo/errors.hpp"

namespace roughtomo {

struct ContinuedFraction {
  std::vector<long long> a;  // partial quotients a0; a1, a2, ...
  std::vector<long long> p;  // convergent numerators
  std::vector<long long> q;  // convergent denominators
};

// Continued-fraction expansion in long double. Throws RationalInput when the
// tail collapses (denominator growth ends) before `n_terms` quotients.
ContinuedFraction continued_fraction(long double s, int n_terms);

// <m s>: distance from m*s to the nearest integer.
long double nearest_int_distance(long double s, long long m);

struct DiophantineScreen {
  double value = 0.0;
  std::vector<long long> quotients;
  double eta_hat = 0.0;       // irrationality-exponent estimate
  double min_stat = 0.0;      // min over m<=M of m^(eta_hat + 1/2) <m s>
  bool pass = false;          // min_stat >= threshold
  double threshold = 1e-3;
  std::vector<double> record_m, record_gap;  // record-minima subsequence
};

// eta_hat via least squares of -log<ms> against log m over the subsequence
// of record minima of <ms>, m = 2..M. Values near 1 indicate golden-ratio
// quality; rationals are rejected (RationalInput) before estimation.
DiophantineScreen screen_scalar(long double s, int M = 512,
                                double threshold = 1e-3);

// ---------------------------------------------------------------------------
// Model integrals. Each case returns the measured left-hand side and the
// claimed envelope (without its constant), so ratios lhs/envelope across a
// parameter sweep certify the predicted scaling when they stay within a
// fixed band.

struct ModelCaseResult {
  std::string name;
  double eps = 0.0;
  double param = 0.0;   // alpha, tau, or p-tilde depending on the case
  double lhs = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;   // lhs / envelope
};

// integral over R of dtheta / (1 + (theta (theta - alpha) / eps)^2)
//   <= c sqrt(eps) (1 + |alpha|/sqrt(eps))^{-1}
std::vector<ModelCaseResult> model_peak_integral(
    const std::vector<double>& eps_list, const std::vector<double>& alpha_over_sqrt_eps);

// integral over |s| <= sqrt(eps) of (|s|/eps) / (1 + (s (alpha+s)/eps)^2) ds
//   = O(tau^{-2} log tau), tau = alpha / sqrt(eps) >= 2
std::vector<ModelCaseResult> model_near_integral(
    const std::vector<double>& eps_list, const std::vector<double>& tau_list);

// (integral outside |theta - alpha| <= sqrt(eps)) of
// (|theta|/eps) / (1 + (theta (theta - alpha)/eps)^2) dtheta
//   <= c (1 + |alpha|/sqrt(eps))^{-1}
std::vector<ModelCaseResult> model_derivative_integral(
    const std::vector<double>& eps_list, const std::vector<double>& alpha_over_sqrt_eps);

// integral over |theta| <= a of dtheta / (1 + ((theta^2 - alpha)/eps)^2)
// against the three-regime envelope (alpha past a^2 / small positive / negative).
std::vector<ModelCaseResult> model_quadratic_phase(
    const std::vector<double>& eps_list, const std::vector<double>& alpha_list,
    double a);

// Split of the previous integrand over |theta^2 - alpha| >= / <= sqrt(eps alpha)
// against eps^{3/2}/alpha and eps/sqrt(alpha), for 4 eps <= alpha <= pi/2.
std::vector<ModelCaseResult> model_quadratic_split(
    const std::vector<double>& eps_list, const std::vector<double>& alpha_list);

// Discrete sum sum_{n=1}^{N-1} (1/n) / (1 + |n + p|) <= c log|p| / |p| and
// integral_1^inf dx / ((1 + |p + x|) x^2) <= c / |p|, N = ceil(4/sqrt(eps)).
std::vector<ModelCaseResult> model_lattice_sum(
    const std::vector<double>& eps_list, const std::vector<double>& p_list);

struct ModelSuiteResult {
  std::vector<ModelCaseResult> cases;
  // max/min ratio per family; scaling confirmed when every band is narrow
  std::vector<std::pair<std::string, double>> ratio_bands;
  bool all_within(double band) const;
};

ModelSuiteResult model_integral_suite();

}  // namespace roughtomo
