#include "molgen/ae/arch.hpp"

#include <utility>

#include "json.hpp"

namespace molgen::ae {

namespace {

constexpr std::pair<Variant, const char*> kVariantNames[] = {
    {Variant::kNoTeacherVae, "noteacher_vae"},
    {Variant::kTeacherVae, "teacher_vae"},
    {Variant::kGaussAae, "gauss_aae"},
    {Variant::kUniformAae, "uniform_aae"},
};

}  // namespace

std::string variant_name(Variant v) {
  for (const auto& [var, name] : kVariantNames)
    if (var == v) return name;
  throw Error("unknown variant value");
}

Variant variant_from_name(const std::string& name) {
  for (const auto& [var, n] : kVariantNames)
    if (name == n) return var;
  throw Error("unknown variant name '" + name + "'");
}

std::size_t ArchitectureDescriptor::conv_out_len(std::size_t i) const {
  std::size_t len = max_len;
  for (std::size_t k = 0; k <= i && k < conv.size(); ++k) {
    if (conv[k].kernel > len) throw Error("conv kernel exceeds sequence length");
    len = len - conv[k].kernel + 1;
  }
  return len;
}

std::size_t ArchitectureDescriptor::flat_dim() const {
  return conv_out_len(2) * conv[2].filters;
}

void ArchitectureDescriptor::validate() const {
  if (vocab_size == 0) throw Error("architecture requires a non-empty vocabulary");
  if (max_len == 0) throw Error("architecture requires max_len >= 1");
  if (latent_dim < 2) throw Error("architecture requires latent_dim >= 2");
  for (const ConvSpec& c : conv)
    if (c.filters == 0 || c.kernel == 0) throw Error("conv layer requires filters and kernel >= 1");
  conv_out_len(2);
  if (encoder_fc == 0 || decoder_fc == 0 || gru_hidden == 0 || discriminator_hidden == 0)
    throw Error("architecture requires non-zero layer widths");
}

std::string ArchitectureDescriptor::to_json() const {
  nlohmann::json j;
  j["vocab_size"] = vocab_size;
  j["max_len"] = max_len;
  j["latent_dim"] = latent_dim;
  j["conv_filters"] = {conv[0].filters, conv[1].filters, conv[2].filters};
  j["conv_kernels"] = {conv[0].kernel, conv[1].kernel, conv[2].kernel};
  j["encoder_fc"] = encoder_fc;
  j["decoder_fc"] = decoder_fc;
  j["gru_hidden"] = gru_hidden;
  j["discriminator_hidden"] = discriminator_hidden;
  j["variant"] = variant_name(variant);
  return j.dump();
}

ArchitectureDescriptor ArchitectureDescriptor::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("architecture json is not an object");
  ArchitectureDescriptor a;
  try {
    a.vocab_size = j.at("vocab_size").get<std::size_t>();
    a.max_len = j.at("max_len").get<std::size_t>();
    a.latent_dim = j.at("latent_dim").get<std::size_t>();
    auto filters = j.at("conv_filters");
    auto kernels = j.at("conv_kernels");
    if (filters.size() != 3 || kernels.size() != 3)
      throw Error("architecture json requires three conv layers");
    for (std::size_t i = 0; i < 3; ++i)
      a.conv[i] = ConvSpec{filters[i].get<std::size_t>(), kernels[i].get<std::size_t>()};
    a.encoder_fc = j.at("encoder_fc").get<std::size_t>();
    a.decoder_fc = j.at("decoder_fc").get<std::size_t>();
    a.gru_hidden = j.at("gru_hidden").get<std::size_t>();
    a.discriminator_hidden = j.at("discriminator_hidden").get<std::size_t>();
    a.variant = variant_from_name(j.at("variant").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("architecture json: ") + e.what());
  }
  a.validate();
  return a;
}

}  // namespace molgen::ae
