#include "molgen/ae/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "molgen/ae/loss_graph.hpp"
#include "molgen/nn/checkpoint.hpp"

namespace molgen::ae {

template <typename T>
void allocate_params(const ArchitectureDescriptor& a, EncoderParamsT<T>& enc,
                     DecoderParamsT<T>& dec, DiscriminatorParamsT<T>& disc) {
  const auto z = [](Mat<T>& mat, std::size_t r, std::size_t c) {
    mat = Mat<T>::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  };
  std::size_t in_ch = a.vocab_size;
  for (std::size_t i = 0; i < 3; ++i) {
    z(enc.conv_k[i], a.conv[i].kernel * in_ch, a.conv[i].filters);
    z(enc.conv_b[i], 1, a.conv[i].filters);
    in_ch = a.conv[i].filters;
  }
  z(enc.fc_w, a.flat_dim(), a.encoder_fc);
  z(enc.fc_b, 1, a.encoder_fc);
  z(enc.mean_w, a.encoder_fc, a.latent_dim);
  z(enc.mean_b, 1, a.latent_dim);
  if (a.is_vae()) {
    z(enc.logvar_w, a.encoder_fc, a.latent_dim);
    z(enc.logvar_b, 1, a.latent_dim);
  }
  z(dec.fc_w, a.latent_dim, a.decoder_fc);
  z(dec.fc_b, 1, a.decoder_fc);
  std::size_t h = a.gru_hidden;
  std::size_t in_w = a.decoder_fc;
  for (auto& g : dec.gru) {
    z(g.W, in_w, 3 * h);
    z(g.Uzr, h, 2 * h);
    z(g.Uc, h, h);
    z(g.b, 1, 3 * h);
    in_w = h;
  }
  if (a.teacher_forced()) z(dec.tok_w, a.vocab_size, 3 * h);
  z(dec.out_w, h, a.vocab_size);
  z(dec.out_b, 1, a.vocab_size);
  if (a.is_aae()) {
    std::size_t dh = a.discriminator_hidden;
    z(disc.w1, a.latent_dim, dh);
    z(disc.b1, 1, dh);
    z(disc.w2, dh, dh);
    z(disc.b2, 1, dh);
    z(disc.w3, dh, 1);
    z(disc.b3, 1, 1);
  }
}

template <typename T>
void init_params(const ArchitectureDescriptor& a, EncoderParamsT<T>& enc,
                 DecoderParamsT<T>& dec, DiscriminatorParamsT<T>& disc, Rng& rng) {
  allocate_params(a, enc, dec, disc);
  for (std::size_t i = 0; i < 3; ++i) nn::glorot_init(enc.conv_k[i], rng);
  nn::glorot_init(enc.fc_w, rng);
  nn::glorot_init(enc.mean_w, rng);
  if (a.is_vae()) nn::glorot_init(enc.logvar_w, rng);
  nn::glorot_init(dec.fc_w, rng);
  for (auto& g : dec.gru) {
    nn::glorot_init(g.W, rng);
    nn::glorot_init(g.Uzr, rng);
    nn::glorot_init(g.Uc, rng);
  }
  if (a.teacher_forced()) nn::glorot_init(dec.tok_w, rng);
  nn::glorot_init(dec.out_w, rng);
  if (a.is_aae()) {
    nn::glorot_init(disc.w1, rng);
    nn::glorot_init(disc.w2, rng);
    nn::glorot_init(disc.w3, rng);
  }
}

template void allocate_params<float>(const ArchitectureDescriptor&,
                                     EncoderParamsT<float>&, DecoderParamsT<float>&,
                                     DiscriminatorParamsT<float>&);
template void allocate_params<double>(const ArchitectureDescriptor&,
                                      EncoderParamsT<double>&, DecoderParamsT<double>&,
                                      DiscriminatorParamsT<double>&);
template void init_params<float>(const ArchitectureDescriptor&, EncoderParamsT<float>&,
                                 DecoderParamsT<float>&, DiscriminatorParamsT<float>&,
                                 Rng&);
template void init_params<double>(const ArchitectureDescriptor&,
                                  EncoderParamsT<double>&, DecoderParamsT<double>&,
                                  DiscriminatorParamsT<double>&, Rng&);

namespace {

Mat<float> im2col_raw(const Mat<float>& x, Eigen::Index seq_len, Eigen::Index kernel) {
  if (seq_len <= 0 || x.rows() % seq_len != 0)
    throw nn::ShapeMismatchError("encoder input rows");
  Eigen::Index batch = x.rows() / seq_len;
  Eigen::Index channels = x.cols();
  Eigen::Index out_len = seq_len - kernel + 1;
  Mat<float> out(batch * out_len, kernel * channels);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index t = 0; t < out_len; ++t)
      for (Eigen::Index k = 0; k < kernel; ++k)
        out.block(b * out_len + t, k * channels, 1, channels) = x.row(b * seq_len + t + k);
  return out;
}

Mat<float> conv_selu_raw(const Mat<float>& x, Eigen::Index seq_len, const Mat<float>& kernel,
                         const Mat<float>& bias, Eigen::Index kernel_w) {
  Mat<float> out =
      (im2col_raw(x, seq_len, kernel_w) * kernel).rowwise() + bias.row(0);
  nn::selu_raw(out);
  return out;
}

}  // namespace

Model Model::init(const ArchitectureDescriptor& arch, Rng& rng) {
  arch.validate();
  Model m;
  m.arch = arch;
  init_params(arch, m.enc, m.dec, m.disc, rng);
  return m;
}

std::vector<Mat<float>*> Model::parameters() {
  std::vector<Mat<float>*> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back(&enc.conv_k[i]);
    out.push_back(&enc.conv_b[i]);
  }
  out.push_back(&enc.fc_w);
  out.push_back(&enc.fc_b);
  out.push_back(&enc.mean_w);
  out.push_back(&enc.mean_b);
  if (arch.is_vae()) {
    out.push_back(&enc.logvar_w);
    out.push_back(&enc.logvar_b);
  }
  out.push_back(&dec.fc_w);
  out.push_back(&dec.fc_b);
  for (auto& g : dec.gru) {
    out.push_back(&g.W);
    out.push_back(&g.Uzr);
    out.push_back(&g.Uc);
    out.push_back(&g.b);
  }
  if (arch.teacher_forced()) out.push_back(&dec.tok_w);
  out.push_back(&dec.out_w);
  out.push_back(&dec.out_b);
  return out;
}

std::vector<Mat<float>*> Model::discriminator_parameters() {
  if (!arch.is_aae()) return {};
  return {&disc.w1, &disc.b1, &disc.w2, &disc.b2, &disc.w3, &disc.b3};
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> out;
  for (int i = 1; i <= 3; ++i) {
    out.push_back("enc.conv" + std::to_string(i) + ".k");
    out.push_back("enc.conv" + std::to_string(i) + ".b");
  }
  out.insert(out.end(), {"enc.fc.w", "enc.fc.b", "enc.mean.w", "enc.mean.b"});
  if (arch.is_vae()) out.insert(out.end(), {"enc.logvar.w", "enc.logvar.b"});
  out.insert(out.end(), {"dec.fc.w", "dec.fc.b"});
  for (int i = 1; i <= 3; ++i) {
    std::string p = "dec.gru" + std::to_string(i);
    out.insert(out.end(), {p + ".W", p + ".Uzr", p + ".Uc", p + ".b"});
  }
  if (arch.teacher_forced()) out.push_back("dec.tok.w");
  out.insert(out.end(), {"dec.out.w", "dec.out.b"});
  if (arch.is_aae()) {
    for (int i = 1; i <= 3; ++i) {
      std::string p = "disc.fc" + std::to_string(i);
      out.insert(out.end(), {p + ".w", p + ".b"});
    }
  }
  return out;
}

void Model::save(const std::string& path, std::uint64_t seed) const {
  Model& self = const_cast<Model&>(*this);
  std::vector<Mat<float>*> mats = self.parameters();
  for (Mat<float>* p : self.discriminator_parameters()) mats.push_back(p);
  std::vector<std::string> names = parameter_names();
  std::vector<nn::NamedTensor> tensors;
  tensors.reserve(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i)
    tensors.push_back(nn::NamedTensor{names[i], *mats[i]});
  nn::save_checkpoint(path, variant_name(arch.variant), seed, arch.to_json(), tensors);
}

Model Model::load(const std::string& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  Model m;
  m.arch = ArchitectureDescriptor::from_json(ck.arch_json);
  if (ck.kind != variant_name(m.arch.variant))
    throw Error("checkpoint kind '" + ck.kind + "' does not match architecture variant");
  allocate_params(m.arch, m.enc, m.dec, m.disc);
  std::vector<Mat<float>*> mats = m.parameters();
  for (Mat<float>* p : m.discriminator_parameters()) mats.push_back(p);
  std::vector<std::string> names = m.parameter_names();
  if (ck.order.size() != names.size())
    throw Error("checkpoint holds " + std::to_string(ck.order.size()) + " tensors, expected " +
                std::to_string(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = ck.tensors.find(names[i]);
    if (it == ck.tensors.end()) throw Error("checkpoint missing tensor " + names[i]);
    if (it->second.rows() != mats[i]->rows() || it->second.cols() != mats[i]->cols())
      throw Error("checkpoint tensor " + names[i] + " has wrong shape");
    *mats[i] = it->second;
  }
  return m;
}

Mat<float> dense_one_hot(const std::vector<chem::TokenSequence>& batch,
                         std::size_t vocab_size) {
  if (batch.empty()) throw nn::ShapeMismatchError("empty batch");
  return one_hot_block<float>(batch, vocab_size, batch.front().max_len);
}

EncoderBatch encode_batch(const Mat<float>& x_onehot, const Model& m) {
  const ArchitectureDescriptor& a = m.arch;
  if (x_onehot.cols() != static_cast<Eigen::Index>(a.vocab_size) ||
      x_onehot.rows() % static_cast<Eigen::Index>(a.max_len) != 0)
    throw nn::ShapeMismatchError("encoder input");
  Mat<float> act = x_onehot;
  std::size_t len = a.max_len;
  for (std::size_t i = 0; i < 3; ++i) {
    act = conv_selu_raw(act, static_cast<Eigen::Index>(len), m.enc.conv_k[i],
                        m.enc.conv_b[i], static_cast<Eigen::Index>(a.conv[i].kernel));
    len = len - a.conv[i].kernel + 1;
  }
  Eigen::Index batch = act.rows() / static_cast<Eigen::Index>(len);
  Mat<float> flat = Eigen::Map<const Mat<float>>(
      act.data(), batch, static_cast<Eigen::Index>(a.flat_dim()));
  Mat<float> fc = (flat * m.enc.fc_w).rowwise() + m.enc.fc_b.row(0);
  nn::selu_raw(fc);
  EncoderBatch out;
  out.mean = (fc * m.enc.mean_w).rowwise() + m.enc.mean_b.row(0);
  if (a.is_vae()) {
    out.log_variance = (fc * m.enc.logvar_w).rowwise() + m.enc.logvar_b.row(0);
    out.log_variance = out.log_variance.array().max(-10.0f).min(10.0f).matrix();
  }
  return out;
}

EncoderOutput encode(const chem::OneHotMatrix& x, const Model& m) {
  const ArchitectureDescriptor& a = m.arch;
  if (x.rows != a.max_len || x.cols != a.vocab_size)
    throw nn::ShapeMismatchError("one-hot input");
  Mat<float> dense = Mat<float>::Zero(static_cast<Eigen::Index>(x.rows),
                                      static_cast<Eigen::Index>(x.cols));
  for (std::size_t r = 0; r < x.rows; ++r)
    dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(x.hot[r])) = 1.0f;
  EncoderBatch b = encode_batch(dense, m);
  EncoderOutput out;
  if (a.is_vae()) {
    out.mean = b.mean.row(0);
    out.log_variance = b.log_variance.row(0);
  } else {
    out.point = b.mean.row(0);
  }
  return out;
}

LatentPoint reparameterize(const LatentPoint& mean, const LatentPoint& log_variance,
                           Rng& rng) {
  if (mean.size() != log_variance.size()) throw nn::ShapeMismatchError("reparameterize");
  LatentPoint z(mean.size());
  for (Eigen::Index d = 0; d < mean.size(); ++d)
    z(d) = mean(d) +
           std::exp(0.5f * log_variance(d)) * static_cast<float>(rng.normal());
  return z;
}

double kl_divergence(const Eigen::RowVectorXd& mean,
                     const Eigen::RowVectorXd& log_variance) {
  if (mean.size() != log_variance.size()) throw nn::ShapeMismatchError("kl_divergence");
  double acc = 0.0;
  for (Eigen::Index d = 0; d < mean.size(); ++d)
    acc += 1.0 + log_variance(d) - mean(d) * mean(d) - std::exp(log_variance(d));
  double kl = -0.5 * acc;
  return kl > 0.0 ? kl : 0.0;
}

}  // namespace molgen::ae
