#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

namespace tlens {

struct LogitOptions {
  double tolerance = 1e-10;  // on log-likelihood change
  int max_iterations = 100;
  double separation_threshold = 30.0;  // any |beta| above this flags separation
  bool leading_intercept = false;      // column 0 is exempt from the separation check
};

struct LogitFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_robust;     // Huber-White sandwich (HC0)
  Eigen::MatrixXd cov_classical;  // inverse Fisher information
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
};

double logit_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta);

/// Maximum-likelihood logistic regression by damped Newton iteration.
///
/// `x` must already contain any intercept column. Throws NumericalError
/// naming the offending columns when the design is rank deficient.
LogitFit fit_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   std::span<const std::string> column_names, const LogitOptions& opts = {});

}  // namespace tlens
