#pragma once

#include <map>
#include <span>

namespace tlens {

/// Values indexed by calendar year.
using YearSeries = std::map<int, double>;

/// Straight line `intercept + slope * (year - base_year)`.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  int base_year = 0;
  bool converged = false;
  int iterations = 0;
  double scale = 0.0;             // final robust residual scale (0 for OLS)
  double max_std_residual = 0.0;  // max |r| / scale at the solution

  [[nodiscard]] double at(double year) const { return intercept + slope * (year - base_year); }
};

struct HuberOptions {
  double k = 1.345;
  double tolerance = 1e-8;
  int max_iterations = 50;
  double mad_consistency = 0.6745;
};

/// Huber loss: quadratic for |r| <= k, linear beyond.
double huber_loss(double r, double k);
/// IRLS weight for a standardized residual.
double huber_weight(double z, double k);

/// Ordinary least squares with time centred at the first year.
LineFit ols_fit(const YearSeries& series);

/// Huber M-estimate of a line by iteratively reweighted least squares.
///
/// Starts at OLS; each iteration recomputes the scale as MAD/0.6745 of the
/// current residuals. A zero scale at the start returns the OLS line; a zero
/// scale later stops at the current estimate. Throws FitError for fewer than
/// three points or non-finite values.
LineFit huber_fit_linear(const YearSeries& series, const HuberOptions& opts = {});

/// Huber fit of ln(value) on year: intercept is gamma, slope is lambda.
/// Throws FitError for any non-positive value.
LineFit huber_fit_exponential(const YearSeries& series, const HuberOptions& opts = {});

}  // namespace tlens
