#pragma once

#include <Eigen/Dense>

#include "molgen/error.hpp"

namespace molgen::bo {

class SingularCovarianceError : public NumericalError {
public:
  SingularCovarianceError()
      : NumericalError("covariance factorization failed after jitter escalation") {}
};

struct GpHyper {
  double signal_var = 1.0;
  double length_scale = 1.0;
  double noise = 1e-4;
};

/// Zero-mean Gaussian process with the squared-exponential kernel
/// k(a,b) = s^2 exp(-|a-b|^2 / (2 l^2)) + noise on the diagonal.
struct GpState {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::VectorXd outputs;  // n
  GpHyper hyper;
  Eigen::MatrixXd chol;     // lower Cholesky factor of the jittered covariance
  Eigen::VectorXd alpha;    // K^-1 outputs
  double jitter = 0.0;      // diagonal stabilizer that made the factorization pass
};

struct GpPosterior {
  double mean = 0.0;
  double variance = 0.0;  // includes the noise term, so it never exceeds s^2 + noise
};

/// Factorizes the training covariance, escalating diagonal jitter from 1e-10
/// by factors of ten up to 1e-4 before giving up.
GpState gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
               const GpHyper& hyper);

GpPosterior gp_posterior(const GpState& state, const Eigen::RowVectorXd& x);

/// log p(y | X, hyper) of the fitted state, for length-scale grid refits.
double gp_log_marginal(const GpState& state);

/// EI = (mu - best) Phi(u) + sigma phi(u) with u = (mu - best) / sigma;
/// collapses to max(mu - best, 0) when sigma is zero.
double expected_improvement(double mean, double variance, double best);

double expected_improvement(const GpState& state, const Eigen::RowVectorXd& x,
                            double best);

}  // namespace molgen::bo
