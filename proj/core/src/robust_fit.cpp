#include "transition_lens/robust_fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "transition_lens/common.hpp"
#include "transition_lens/stats.hpp"

namespace tlens {

namespace {

struct Points {
  std::vector<double> t;
  std::vector<double> y;
  int base = 0;
};

Points unpack(const YearSeries& series) {
  if (series.size() < 3)
    throw FitError("robust fit needs at least 3 points, got " + std::to_string(series.size()));
  Points p;
  p.base = series.begin()->first;
  for (const auto& [year, v] : series) {
    if (!std::isfinite(v)) throw FitError("non-finite value in year " + std::to_string(year));
    p.t.push_back(static_cast<double>(year - p.base));
    p.y.push_back(v);
  }
  return p;
}

// Weighted least squares line; returns false if the weighted design is singular.
bool wls(const Points& p, const std::vector<double>& w, double& a, double& b) {
  double sw = 0, st = 0, sy = 0;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    sw += w[i];
    st += w[i] * p.t[i];
    sy += w[i] * p.y[i];
  }
  if (!(sw > 0.0)) return false;
  const double tbar = st / sw, ybar = sy / sw;
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    const double dt = p.t[i] - tbar;
    stt += w[i] * dt * dt;
    sty += w[i] * dt * (p.y[i] - ybar);
  }
  if (!(stt > 0.0)) return false;
  b = sty / stt;
  a = ybar - b * tbar;
  return true;
}

std::vector<double> residuals(const Points& p, double a, double b) {
  std::vector<double> r(p.t.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = p.y[i] - a - b * p.t[i];
  return r;
}

double mad_scale(const std::vector<double>& r, double consistency) {
  std::vector<double> abs_r(r.size());
  std::transform(r.begin(), r.end(), abs_r.begin(), [](double v) { return std::fabs(v); });
  return stats::median(abs_r) / consistency;
}

// Scale below this (relative to the data magnitude) is treated as an exact fit.
bool negligible_scale(double scale, const Points& p) {
  double mag = 1.0;
  for (double v : p.y) mag = std::max(mag, std::fabs(v));
  return scale <= 1e-13 * mag;
}

double max_std_residual(const std::vector<double>& r, double scale) {
  if (!(scale > 0.0)) return 0.0;
  double m = 0.0;
  for (double v : r) m = std::max(m, std::fabs(v) / scale);
  return m;
}

}  // namespace

double huber_loss(double r, double k) {
  const double a = std::fabs(r);
  return a <= k ? 0.5 * r * r : k * a - 0.5 * k * k;
}

double huber_weight(double z, double k) {
  const double a = std::fabs(z);
  return a <= k ? 1.0 : k / a;
}

LineFit ols_fit(const YearSeries& series) {
  if (series.size() < 2) throw FitError("OLS needs at least 2 points");
  Points p;
  p.base = series.begin()->first;
  for (const auto& [year, v] : series) {
    if (!std::isfinite(v)) throw FitError("non-finite value in year " + std::to_string(year));
    p.t.push_back(static_cast<double>(year - p.base));
    p.y.push_back(v);
  }
  LineFit fit;
  fit.base_year = p.base;
  if (!wls(p, std::vector<double>(p.t.size(), 1.0), fit.intercept, fit.slope))
    throw FitError("degenerate design for OLS");
  fit.converged = true;
  return fit;
}

LineFit huber_fit_linear(const YearSeries& series, const HuberOptions& opts) {
  const auto p = unpack(series);
  const auto n = p.t.size();

  LineFit fit;
  fit.base_year = p.base;
  std::vector<double> w(n, 1.0);
  if (!wls(p, w, fit.intercept, fit.slope)) throw FitError("degenerate design for robust fit");

  auto r = residuals(p, fit.intercept, fit.slope);
  double scale = mad_scale(r, opts.mad_consistency);
  if (negligible_scale(scale, p)) {
    fit.converged = true;
    fit.scale = 0.0;
    return fit;
  }

  for (int it = 1; it <= opts.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) w[i] = huber_weight(r[i] / scale, opts.k);
    double a = 0, b = 0;
    if (!wls(p, w, a, b)) throw FitError("degenerate weighted design in robust fit");
    const double change = std::max(std::fabs(a - fit.intercept), std::fabs(b - fit.slope));
    fit.intercept = a;
    fit.slope = b;
    fit.iterations = it;
    r = residuals(p, a, b);
    const double next_scale = mad_scale(r, opts.mad_consistency);
    if (change < opts.tolerance) {
      fit.converged = true;
      break;
    }
    if (negligible_scale(next_scale, p)) {
      // Majority of points lie exactly on the current line.
      fit.converged = true;
      scale = 0.0;
      break;
    }
    scale = next_scale;
  }
  fit.scale = scale;
  fit.max_std_residual = max_std_residual(r, scale);
  return fit;
}

LineFit huber_fit_exponential(const YearSeries& series, const HuberOptions& opts) {
  YearSeries logs;
  for (const auto& [year, v] : series) {
    if (!(v > 0.0))
      throw FitError("exponential fit needs positive values; year " + std::to_string(year) +
                     " has " + std::to_string(v));
    logs.emplace(year, std::log(v));
  }
  return huber_fit_linear(logs, opts);
}

}  // namespace tlens
