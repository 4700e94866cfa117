#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "molgen/error.hpp"

namespace molgen::ae {

enum class Variant {
  kNoTeacherVae,
  kTeacherVae,
  kGaussAae,
  kUniformAae,
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Shape of one convolution layer; stride is fixed at 1.
struct ConvSpec {
  std::size_t filters = 0;
  std::size_t kernel = 0;

  bool operator==(const ConvSpec&) const = default;
};

/// Frozen description of an autoencoder. The encoder is three 1-D
/// convolutions with SELU, a fully connected layer of width encoder_fc with
/// SELU, then affine latent heads (mean and log-variance for VAE variants, a
/// single point head for AAE variants). The decoder is a fully connected
/// layer latent -> decoder_fc with SELU whose output feeds every timestep of
/// a three-layer GRU stack, followed by an affine head to vocabulary logits.
/// Teacher-forced variants additionally feed the previous target token into
/// the third GRU layer.
struct ArchitectureDescriptor {
  std::size_t vocab_size = 0;
  std::size_t max_len = 120;
  std::size_t latent_dim = 56;
  std::array<ConvSpec, 3> conv{{{9, 9}, {9, 9}, {10, 11}}};
  std::size_t encoder_fc = 435;
  std::size_t decoder_fc = 128;
  std::size_t gru_hidden = 128;
  std::size_t discriminator_hidden = 64;
  Variant variant = Variant::kTeacherVae;

  bool is_vae() const {
    return variant == Variant::kNoTeacherVae || variant == Variant::kTeacherVae;
  }
  bool is_aae() const { return !is_vae(); }
  /// True for every variant except the NoTeacher VAE.
  bool teacher_forced() const { return variant != Variant::kNoTeacherVae; }

  /// Sequence length after conv layer i (0-based), stride 1, no padding.
  std::size_t conv_out_len(std::size_t i) const;
  /// Row width of the flattened final conv output, conv_out_len(2) * filters.
  std::size_t flat_dim() const;

  /// Throws Error when a field is out of contract (zero vocab, latent < 2,
  /// kernels longer than the remaining sequence).
  void validate() const;

  std::string to_json() const;
  static ArchitectureDescriptor from_json(const std::string& json_text);

  bool operator==(const ArchitectureDescriptor&) const = default;
};

}  // namespace molgen::ae
