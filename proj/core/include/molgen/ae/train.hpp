#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molgen/ae/model.hpp"

namespace molgen::ae {

struct TrainConfig {
  std::size_t batch_size = 100;
  double learning_rate = 3.1e-4;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  /// VAE only: the KL weight ramps linearly 0 -> 1 over this share of the
  /// total optimization steps.
  double kl_anneal_fraction = 0.1;
  /// Per-epoch CSV log destination; empty disables logging.
  std::string log_path;
};

/// One epoch of the training log. Fields that do not apply to the variant
/// stay zero, keeping the CSV schema stable across variants.
struct EpochRecord {
  std::size_t epoch = 0;
  double reconstruction_loss = 0;  // mean over batches of per-sequence CE sums
  double kl_loss = 0;              // VAE variants
  double discriminator_loss = 0;   // AAE variants
  double generator_loss = 0;       // AAE variants
  double char_accuracy = 0;        // all positions, padding included
};

/// Loss pieces and parameter gradients of one batch. grads align with
/// Model::parameters(); entries untouched by the phase stay empty.
struct VaeBatchResult {
  double reconstruction_loss = 0;
  double kl = 0;
  double char_accuracy = 0;
  std::vector<Mat<float>> grads;
};

/// Forward plus one backward sweep of the VAE loss CE + beta * KL. noise is
/// a (batch x latent) standard-normal draw for the reparameterization.
VaeBatchResult vae_batch(Model& m, const std::vector<chem::TokenSequence>& batch,
                         const Mat<float>& noise, float beta, bool with_grads);

struct ReconBatchResult {
  double reconstruction_loss = 0;
  double char_accuracy = 0;
  std::vector<Mat<float>> grads;
};

/// AAE reconstruction phase: teacher-forced CE from the deterministic point.
ReconBatchResult aae_reconstruction_batch(Model& m,
                                          const std::vector<chem::TokenSequence>& batch,
                                          bool with_grads);

struct DiscBatchResult {
  double loss = 0;
  double accuracy = 0;  // correct prior-vs-encoder calls over both halves
  std::vector<Mat<float>> grads;
};

/// AAE discriminator phase on fixed latent rows; grads align with
/// Model::discriminator_parameters().
DiscBatchResult aae_discriminator_batch(Model& m, const Mat<float>& z_prior,
                                        const Mat<float>& z_encoder, bool with_grads);

struct GenBatchResult {
  double loss = 0;
  std::vector<Mat<float>> grads;
};

/// AAE fooling phase: -mean log D(encode(x)) through a frozen discriminator;
/// grads align with Model::parameters() and only encoder entries are filled.
GenBatchResult aae_generator_batch(Model& m,
                                   const std::vector<chem::TokenSequence>& batch,
                                   bool with_grads);

/// Rows drawn from the variant's latent prior: N(0, I) for gauss_aae,
/// U(-1, 1) per dimension for uniform_aae.
Mat<float> sample_prior(const ArchitectureDescriptor& arch, std::size_t rows, Rng& rng);

/// Tokenizes every corpus line; tokenizer failures become DataError with the
/// offending line.
std::vector<chem::TokenSequence> tokenize_corpus(const std::vector<std::string>& corpus,
                                                 const chem::Vocabulary& vocab,
                                                 std::size_t max_len);

Model train_vae(const std::vector<std::string>& corpus, const chem::Vocabulary& vocab,
                const ArchitectureDescriptor& arch, const TrainConfig& cfg,
                std::vector<EpochRecord>* history = nullptr);

Model train_aae(const std::vector<std::string>& corpus, const chem::Vocabulary& vocab,
                const ArchitectureDescriptor& arch, const TrainConfig& cfg,
                std::vector<EpochRecord>* history = nullptr);

/// Dispatches to train_vae or train_aae on arch.variant.
Model train(const std::vector<std::string>& corpus, const chem::Vocabulary& vocab,
            const ArchitectureDescriptor& arch, const TrainConfig& cfg,
            std::vector<EpochRecord>* history = nullptr);

}  // namespace molgen::ae
