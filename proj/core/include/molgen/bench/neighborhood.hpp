#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molgen/ae/model.hpp"
#include "molgen/error.hpp"

namespace molgen::bench {

class QueryEncodingFailure : public DataError {
public:
  explicit QueryEncodingFailure(const std::string& why)
      : DataError("query encoding failed: " + why) {}
};

struct NeighborhoodConfig {
  double d_max = 8.0;
  double step = 0.1;
  std::size_t points_per_bin = 10;
  std::size_t attempts = 500;  // stochastic decodes per sampled point
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // decode fan-out only; results thread-invariant
};

/// Aggregate over one distance bin. median_tanimoto is 0 when the bin
/// produced no valid structure; valid_count disambiguates that case.
struct NeighborhoodBin {
  double distance = 0.0;
  double median_tanimoto = 0.0;  // ECFP6 similarity of valid decodes to query
  double valid_fraction = 0.0;
  std::size_t valid_count = 0;
  std::size_t attempts_total = 0;
};

/// center + radius * (g / ||g||) with g standard normal, so the result sits
/// on the radius-hypersphere around center to double precision.
Eigen::RowVectorXd hypersphere_point(const Eigen::RowVectorXd& center,
                                     double radius, Rng& rng);

/// Walks distance bins 0, step, ..., d_max around the query's deterministic
/// encoding (the mean vector for VAE variants). Each bin draws
/// points_per_bin latent points at exactly that radius (uniform random
/// direction times radius), decodes attempts samples per point, and reports
/// the median ECFP6 Tanimoto of the valid structures to the query plus the
/// valid fraction. Point (bin, index) seeds its own rng from (seed, bin,
/// index), so results do not depend on threads.
std::vector<NeighborhoodBin> neighborhood_study(const ae::Model& m,
                                                const chem::Vocabulary& vocab,
                                                const std::string& query,
                                                const NeighborhoodConfig& cfg);

/// One CSV row per bin: distance, median_tanimoto, valid_fraction,
/// valid_count, attempts.
void write_neighborhood_csv(const std::string& path,
                            const std::vector<NeighborhoodBin>& bins);

}  // namespace molgen::bench
