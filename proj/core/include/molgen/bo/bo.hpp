#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "molgen/ae/model.hpp"
#include "molgen/bo/gp.hpp"
#include "molgen/svm/svm.hpp"

namespace molgen::bo {

struct BOConfig {
  std::size_t n_init = 100;
  std::size_t n_iter = 500;
  Eigen::RowVectorXd lower;  // per-dimension bounds, finite
  Eigen::RowVectorXd upper;
  std::size_t attempts = 500;
  double active_threshold = 0.5;
  std::size_t max_ring = 8;
  std::uint64_t seed = 0;
  std::size_t refit_every = 25;  // length-scale grid refit cadence
  std::size_t candidates = 512;  // uniform EI candidates per iteration
  std::size_t refine_starts = 8;
  double gp_noise = 1e-4;
  std::size_t threads = 1;       // decode fan-out only; results thread-invariant

  /// [-3, 3] per dimension, the default search box for Gaussian-prior models;
  /// uniform-prior models pass their prior box instead.
  void default_bounds(std::size_t dims);
  void validate() const;
};

/// One scored latent point. compounds lists the distinct valid decodes that
/// survived the ring filter, aligned with their calibrated probabilities.
struct ObjectiveResult {
  double score = 0.0;
  std::vector<std::string> compounds;
  std::vector<double> p_active;
};

struct TracePoint {
  std::size_t iteration = 0;  // 1-based over the whole run, init points first
  Eigen::RowVectorXd z;
  double score = 0.0;
  std::vector<std::string> compounds;
  std::vector<double> p_active;
};

using Objective = std::function<ObjectiveResult(const Eigen::RowVectorXd&)>;

/// Decodes `attempts` samples at z, drops padding-only and invalid strings
/// and any structure with a ring larger than max_ring, then scores the
/// distinct survivors: mean p_active over those above the threshold when any
/// exist, else mean over all survivors, else 0. Deterministic in
/// (z, model, scorer, seed).
ObjectiveResult score_latent(const Eigen::RowVectorXd& z, const ae::Model& model,
                             const chem::Vocabulary& vocab,
                             const svm::SvmModel& scorer, const BOConfig& cfg);

/// n_init uniform points in the box, then n_iter rounds of GP fit, EI
/// maximization (uniform candidates plus Nelder-Mead refinement), and one
/// objective evaluation. The trace carries every scored point in order.
std::vector<TracePoint> bo_run_objective(const Objective& objective,
                                         const BOConfig& cfg);

/// bo_run_objective against score_latent on a trained generative model.
std::vector<TracePoint> bo_run(const ae::Model& model, const chem::Vocabulary& vocab,
                               const svm::SvmModel& scorer, const BOConfig& cfg);

/// CSV rows (iteration, score, latent as semicolon-joined floats, smiles as
/// semicolon-joined survivors).
void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace);

struct BinSummary {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;     // trace points whose score falls in the bin
  std::size_t compounds = 0;  // decoded survivors across those points
  double active_fraction = 0.0;
};

struct RunSummary {
  std::vector<BinSummary> bins;  // ten bins covering [0,1], last edge closed
  std::vector<std::string> distinct_compounds;
  std::vector<double> nearest_active_tanimoto;  // aligned; empty reference -> empty
};

/// Bins the trace by score and reports the fraction of decoded compounds
/// whose p_active clears the threshold per bin, plus each distinct decoded
/// compound's best Tanimoto similarity to the reference actives.
RunSummary analyze_run(const std::vector<TracePoint>& trace,
                       const std::vector<std::string>& actives_reference,
                       double active_threshold = 0.5);

void write_summary_csv(const std::string& path, const RunSummary& summary);
void write_similarity_csv(const std::string& path, const RunSummary& summary);

}  // namespace molgen::bo
