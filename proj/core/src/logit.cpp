#include "transition_lens/logit.hpp"

#include <cmath>

#include "transition_lens/common.hpp"

namespace tlens {

namespace {

double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::fabs(eta))); }

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

double logit_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

LogitFit fit_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   std::span<const std::string> column_names, const LogitOptions& opts) {
  const auto n = x.rows();
  const auto k = x.cols();
  if (y.size() != n) throw InputError("logit: outcome length does not match design rows");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j) {
      const auto c = static_cast<std::size_t>(perm[j]);
      if (!cols.empty()) cols += ", ";
      cols += c < column_names.size() ? column_names[c] : "column " + std::to_string(c);
    }
    throw NumericalError("classify", cols, "singular logit design; collinear columns: " + cols);
  }

  LogitFit fit;
  fit.beta = Eigen::VectorXd::Zero(k);
  double ll = logit_log_likelihood(x, y, fit.beta);
  Eigen::VectorXd p(n), w(n);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::VectorXd eta = x * fit.beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(eta[i]);
      w[i] = p[i] * (1.0 - p[i]);
    }
    const Eigen::VectorXd grad = x.transpose() * (y - p);
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd step = info.ldlt().solve(grad);

    double t = 1.0;
    Eigen::VectorXd candidate = fit.beta + step;
    double ll_new = logit_log_likelihood(x, y, candidate);
    for (int halvings = 0; !(ll_new >= ll) && halvings < 40; ++halvings) {
      t *= 0.5;
      candidate = fit.beta + t * step;
      ll_new = logit_log_likelihood(x, y, candidate);
    }
    fit.iterations = it;
    if (!(ll_new >= ll)) break;  // no ascent direction left
    const double change = ll_new - ll;
    fit.beta = candidate;
    ll = ll_new;
    if (change < opts.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.log_likelihood = ll;

  const Eigen::VectorXd eta = x * fit.beta;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = sigmoid(eta[i]);
    w[i] = p[i] * (1.0 - p[i]);
    const double r = y[i] - p[i];
    meat.noalias() += (r * r) * x.row(i).transpose() * x.row(i);
  }
  const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
  const Eigen::MatrixXd bread = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.cov_classical = bread;
  fit.cov_robust = bread * meat * bread;

  const Eigen::Index skip = opts.leading_intercept ? 1 : 0;
  if (k > skip && fit.beta.tail(k - skip).cwiseAbs().maxCoeff() > opts.separation_threshold) {
    fit.separation = true;
    fit.converged = false;
  }
  return fit;
}

}  // namespace tlens
