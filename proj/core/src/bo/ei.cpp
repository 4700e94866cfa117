#include <cmath>

#include "molgen/bo/gp.hpp"
#include "molgen/stats.hpp"

namespace molgen::bo {

double expected_improvement(double mean, double variance, double best) {
  double sigma = std::sqrt(std::max(0.0, variance));
  double delta = mean - best;
  if (sigma <= 0) return std::max(delta, 0.0);
  double u = delta / sigma;
  return delta * stats::normal_cdf(u) + sigma * stats::normal_pdf(u);
}

double expected_improvement(const GpState& state, const Eigen::RowVectorXd& x,
                            double best) {
  GpPosterior p = gp_posterior(state, x);
  return expected_improvement(p.mean, p.variance, best);
}

}  // namespace molgen::bo
