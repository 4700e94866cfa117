#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace molgen::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // population variance
double median(std::vector<double> xs);        // by value: sorts a copy

/// Standard normal density and cumulative distribution.
double normal_pdf(double x);
double normal_cdf(double x);

/// Pearson correlation; 0 when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Area under the ROC curve via the rank statistic (ties get half credit).
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace molgen::stats
