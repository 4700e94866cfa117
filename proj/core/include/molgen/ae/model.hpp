#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "molgen/ae/arch.hpp"
#include "molgen/chem/tokenizer.hpp"
#include "molgen/nn/layers.hpp"
#include "molgen/rng.hpp"

namespace molgen::ae {

using nn::Mat;

/// Row vector of latent_dim reals.
using LatentPoint = Eigen::RowVectorXf;

template <typename T>
struct EncoderParamsT {
  Mat<T> conv_k[3];  // (kernel * in_channels) x filters
  Mat<T> conv_b[3];  // 1 x filters
  Mat<T> fc_w, fc_b;
  Mat<T> mean_w, mean_b;      // AAE variants use this pair as the point head
  Mat<T> logvar_w, logvar_b;  // VAE variants only, otherwise empty
};

template <typename T>
struct DecoderParamsT {
  Mat<T> fc_w, fc_b;  // latent -> decoder_fc, feeds every timestep
  nn::GruParams<T> gru[3];
  Mat<T> tok_w;  // vocab x 3h token feedback into GRU 3; teacher-forced variants only
  Mat<T> out_w, out_b;  // hidden -> vocab logits
};

template <typename T>
struct DiscriminatorParamsT {
  Mat<T> w1, b1;  // latent -> hidden, SELU
  Mat<T> w2, b2;  // hidden -> hidden, SELU
  Mat<T> w3, b3;  // hidden -> 1, sigmoid
};

using EncoderParams = EncoderParamsT<float>;
using DecoderParams = DecoderParamsT<float>;
using DiscriminatorParams = DiscriminatorParamsT<float>;

/// Sizes every parameter matrix for the architecture, zero filled. The
/// shapes here are the single source of truth for init, load, and the loss
/// graphs.
template <typename T>
void allocate_params(const ArchitectureDescriptor& arch, EncoderParamsT<T>& enc,
                     DecoderParamsT<T>& dec, DiscriminatorParamsT<T>& disc);

/// Glorot-uniform weights, zero biases, drawn in a fixed order.
template <typename T>
void init_params(const ArchitectureDescriptor& arch, EncoderParamsT<T>& enc,
                 DecoderParamsT<T>& dec, DiscriminatorParamsT<T>& disc, Rng& rng);

extern template void allocate_params<float>(const ArchitectureDescriptor&,
                                            EncoderParamsT<float>&,
                                            DecoderParamsT<float>&,
                                            DiscriminatorParamsT<float>&);
extern template void allocate_params<double>(const ArchitectureDescriptor&,
                                             EncoderParamsT<double>&,
                                             DecoderParamsT<double>&,
                                             DiscriminatorParamsT<double>&);
extern template void init_params<float>(const ArchitectureDescriptor&,
                                        EncoderParamsT<float>&, DecoderParamsT<float>&,
                                        DiscriminatorParamsT<float>&, Rng&);
extern template void init_params<double>(const ArchitectureDescriptor&,
                                         EncoderParamsT<double>&,
                                         DecoderParamsT<double>&,
                                         DiscriminatorParamsT<double>&, Rng&);

struct EncoderOutput {
  LatentPoint mean;          // VAE variants
  LatentPoint log_variance;  // VAE variants
  LatentPoint point;         // AAE variants

  /// The deterministic encoding: mean for VAE variants, point for AAE.
  const LatentPoint& center() const { return point.size() > 0 ? point : mean; }
};

/// Raw encoder forward over a batch; rows are molecules. log_variance is
/// empty for AAE variants and mean then holds the deterministic point.
struct EncoderBatch {
  Mat<float> mean;
  Mat<float> log_variance;
};

struct Model {
  ArchitectureDescriptor arch;
  EncoderParams enc;
  DecoderParams dec;
  DiscriminatorParams disc;  // AAE variants only, otherwise empty

  /// Allocates and Glorot-initializes all parameters for the architecture.
  static Model init(const ArchitectureDescriptor& arch, Rng& rng);

  /// Encoder + decoder parameters in a fixed, named order shared with the
  /// checkpoint layout and gradient extraction.
  std::vector<Mat<float>*> parameters();
  std::vector<Mat<float>*> discriminator_parameters();
  /// Names aligned with parameters() followed by discriminator_parameters().
  std::vector<std::string> parameter_names() const;

  void save(const std::string& path, std::uint64_t seed) const;
  static Model load(const std::string& path);
};

/// Dense (batch * max_len) x vocab block for the conv stack; sequences are
/// stacked vertically in batch order.
Mat<float> dense_one_hot(const std::vector<chem::TokenSequence>& batch,
                         std::size_t vocab_size);

EncoderBatch encode_batch(const Mat<float>& x_onehot, const Model& m);

EncoderOutput encode(const chem::OneHotMatrix& x, const Model& m);

LatentPoint reparameterize(const LatentPoint& mean, const LatentPoint& log_variance,
                           Rng& rng);

/// -0.5 * sum_d (1 + logvar_d - mean_d^2 - exp(logvar_d)); never negative.
double kl_divergence(const Eigen::RowVectorXd& mean,
                     const Eigen::RowVectorXd& log_variance);

/// Probability rows for every position given the true target sequence.
/// Teacher-forced variants feed target token t-1 into the third GRU layer at
/// position t with the pad token as the start marker; the NoTeacher variant
/// ignores the target.
Mat<float> decode_train(const LatentPoint& z, const chem::TokenSequence& target,
                        const Model& m);

/// One stochastic decode: autoregressive multinomial sampling for
/// teacher-forced variants, position-wise multinomial for NoTeacher.
chem::TokenSequence decode_sample(const LatentPoint& z, const Model& m, Rng& rng);

/// Deterministic decode that follows the argmax token at every position.
chem::TokenSequence decode_argmax(const LatentPoint& z, const Model& m);

/// attempts stochastic decodes of one point; attempt i draws from
/// base.fork(i), so the result is independent of threads. threads > 1 splits
/// attempts across workers over a read-only model snapshot.
std::vector<chem::TokenSequence> decode_sample_batch(const LatentPoint& z,
                                                     const Model& m,
                                                     std::size_t attempts, Rng& base,
                                                     std::size_t threads = 1);

struct ConsensusResult {
  std::optional<std::string> smiles;        // modal valid SMILES, tie -> smallest
  std::size_t valid_count = 0;              // attempts that parsed as valid
  std::vector<std::string> distinct_valid;  // sorted distinct valid strings
};

/// Decodes attempts samples, strips padding, parses each, and keeps the most
/// frequent valid string.
ConsensusResult decode_consensus(const LatentPoint& z, const Model& m,
                                 const chem::Vocabulary& vocab,
                                 std::size_t attempts, Rng& base,
                                 std::size_t threads = 1);

}  // namespace molgen::ae
