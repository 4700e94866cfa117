#pragma once

#include <string>
#include <vector>

#include "molgen/bo/bo.hpp"

namespace molgen::bench {

struct BoArtifacts {
  std::vector<bo::TracePoint> trace;
  bo::RunSummary summary;
};

/// Runs Bayesian optimization against an arbitrary objective and writes the
/// artifact set into out_dir: trace.csv, score_vs_iteration.csv (with the
/// running best), score_bins.csv, similarity.csv, and, when svg is set,
/// score_vs_iteration.svg and score_bins.svg. The CSVs are the normative
/// output.
BoArtifacts bo_experiment(const bo::Objective& objective, const bo::BOConfig& cfg,
                          const std::vector<std::string>& actives_reference,
                          const std::string& out_dir, bool svg = true);

/// bo_experiment against score_latent on a trained model and scorer.
BoArtifacts bo_experiment(const ae::Model& model, const chem::Vocabulary& vocab,
                          const svm::SvmModel& scorer,
                          const std::vector<std::string>& actives_reference,
                          const bo::BOConfig& cfg, const std::string& out_dir,
                          bool svg = true);

}  // namespace molgen::bench
