#pragma once

#include <cstdint>
#include <string>

#include "molgen/ae/arch.hpp"
#include "molgen/error.hpp"

namespace molgen::bench {

/// Description of one training job, loaded from a JSON config file. Fields
/// "prior" (gaussian | uniform) and "teacher_forcing" are accepted alongside
/// "variant" and validated against it; the variant alone determines both.
struct TrainJob {
  ae::Variant variant = ae::Variant::kTeacherVae;
  std::size_t latent_dim = 56;
  std::size_t batch_size = 100;
  double learning_rate = 3.1e-4;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::string corpus_path;
  std::string vocab_path;  // empty: derive the vocabulary from the corpus

  void validate() const;
};

TrainJob load_train_job(const std::string& path);

/// Description of one experiment run, loaded from a JSON config file. Only
/// the fields of the named experiment are consulted; unknown keys are
/// rejected to catch typos.
struct ExperimentConfig {
  std::string experiment;  // reconstruct | neighborhood | bo-search
  std::string checkpoint;  // trained autoencoder
  std::string vocab;       // vocabulary JSON
  std::string corpus;      // reconstruct: validation corpus
  std::string query;       // neighborhood: query SMILES
  std::string scorer;      // bo-search: activity model checkpoint
  std::string actives;     // bo-search: reference actives corpus, optional
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // neighborhood knobs
  double d_max = 8.0;
  double step = 0.1;
  std::size_t points_per_bin = 10;

  // shared decode fan-out per latent point
  std::size_t attempts = 500;

  // bo-search knobs
  std::size_t n_init = 100;
  std::size_t n_iter = 500;
  std::size_t max_ring = 8;
  double active_threshold = 0.5;
  bool svg = true;

  /// Checks the experiment name, that every referenced file exists, and that
  /// out_dir is writable (creating it when absent).
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace molgen::bench
