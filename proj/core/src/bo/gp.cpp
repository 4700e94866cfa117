#include "molgen/bo/gp.hpp"

#include <cmath>

#include "molgen/stats.hpp"

namespace molgen::bo {

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const GpHyper& h) {
  Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  double inv = 1.0 / (2.0 * h.length_scale * h.length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = h.signal_var + h.noise;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d2 = (X.row(i) - X.row(j)).squaredNorm();
      double k = h.signal_var * std::exp(-d2 * inv);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

}  // namespace

GpState gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
               const GpHyper& hyper) {
  if (inputs.rows() == 0 || inputs.rows() != outputs.rows())
    throw Error("gp_fit requires matching non-empty inputs and outputs");
  if (!(hyper.signal_var > 0) || !(hyper.length_scale > 0) || hyper.noise < 0)
    throw Error("gp hyperparameters must be positive (noise nonnegative)");
  GpState s;
  s.inputs = inputs;
  s.outputs = outputs;
  s.hyper = hyper;
  Eigen::MatrixXd K = kernel_matrix(inputs, hyper);
  for (double jitter = 1e-10; jitter <= 1e-4 * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      s.chol = llt.matrixL();
      s.alpha = llt.solve(outputs);
      s.jitter = jitter;
      return s;
    }
  }
  throw SingularCovarianceError();
}

GpPosterior gp_posterior(const GpState& s, const Eigen::RowVectorXd& x) {
  if (x.cols() != s.inputs.cols()) throw Error("gp_posterior dimension mismatch");
  Eigen::Index n = s.inputs.rows();
  Eigen::VectorXd kstar(n);
  double inv = 1.0 / (2.0 * s.hyper.length_scale * s.hyper.length_scale);
  for (Eigen::Index i = 0; i < n; ++i)
    kstar(i) = s.hyper.signal_var * std::exp(-(s.inputs.row(i) - x).squaredNorm() * inv);
  GpPosterior p;
  p.mean = kstar.dot(s.alpha);
  Eigen::VectorXd v =
      s.chol.triangularView<Eigen::Lower>().solve(kstar);
  p.variance = s.hyper.signal_var + s.hyper.noise - v.squaredNorm();
  if (p.variance < 0) p.variance = 0;
  return p;
}

double gp_log_marginal(const GpState& s) {
  double quad = s.outputs.dot(s.alpha);
  double logdet = 2.0 * s.chol.diagonal().array().log().sum();
  double n = static_cast<double>(s.outputs.rows());
  return -0.5 * (quad + logdet + n * std::log(2.0 * M_PI));
}

}  // namespace molgen::bo
