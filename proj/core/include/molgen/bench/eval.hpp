#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molgen/ae/model.hpp"

namespace molgen::bench {

/// Reconstruction metrics of one model over one corpus. Character accuracy
/// counts every position of the padded length-120 sequence, so a model is
/// also graded on learning termination.
struct EvalResult {
  std::string variant;
  std::size_t molecules = 0;
  double train_mode_accuracy = 0.0;  // teacher-forced argmax vs target
  double gen_mode_accuracy = 0.0;    // one stochastic generation-mode decode
  double valid_fraction = 0.0;       // generation-mode decodes that parse
};

/// Encodes every corpus molecule to its deterministic center, then measures
/// training-mode accuracy (argmax of the teacher-forced probability rows) and
/// generation-mode accuracy plus validity of one sampled decode. Molecule i
/// samples from an rng derived from (seed, i), so results are independent of
/// threads; threads fan out over molecules.
EvalResult eval_reconstruction(const ae::Model& m, const chem::Vocabulary& vocab,
                               const std::vector<std::string>& corpus,
                               std::uint64_t seed, std::size_t threads = 1);

/// One CSV row per evaluated model, schema-stable across variants.
void write_eval_csv(const std::string& path, const std::vector<EvalResult>& rows);

}  // namespace molgen::bench
