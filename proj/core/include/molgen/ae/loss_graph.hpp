#pragma once

#include <vector>

#include "molgen/ae/model.hpp"
#include "molgen/nn/tape.hpp"

/// Tape constructions of the training losses, shared by the float training
/// drivers and by 64-bit gradient verification. Every builder registers the
/// parameters it touches in a fixed order and returns the handles.

namespace molgen::ae {

/// Tape handles of the autoencoder parameters. flat lists them in
/// registration order, which matches Model::parameters() for T = float.
template <typename T>
struct ModelRefsT {
  using Ref = typename nn::Tape<T>::Ref;
  Ref conv_k[3] = {-1, -1, -1};
  Ref conv_b[3] = {-1, -1, -1};
  Ref fc_w = -1, fc_b = -1, mean_w = -1, mean_b = -1;
  Ref logvar_w = -1, logvar_b = -1;
  Ref dfc_w = -1, dfc_b = -1;
  nn::GruRefs<T> gru[3] = {};
  Ref tok_w = -1, out_w = -1, out_b = -1;
  std::vector<Ref> flat;
};

template <typename T>
struct DiscRefsT {
  using Ref = typename nn::Tape<T>::Ref;
  Ref w1 = -1, b1 = -1, w2 = -1, b2 = -1, w3 = -1, b3 = -1;
  std::vector<Ref> flat;
};

template <typename T>
struct EncRefsT {
  typename nn::Tape<T>::Ref mean = -1;    // the deterministic point for AAE variants
  typename nn::Tape<T>::Ref logvar = -1;  // VAE variants only
};

template <typename T>
ModelRefsT<T> register_params(nn::Tape<T>& tp, const ArchitectureDescriptor& a,
                              EncoderParamsT<T>& enc, DecoderParamsT<T>& dec,
                              bool grads) {
  ModelRefsT<T> r;
  auto reg = [&](Mat<T>& p) {
    auto ref = tp.input(p, grads);
    r.flat.push_back(ref);
    return ref;
  };
  for (int i = 0; i < 3; ++i) {
    r.conv_k[i] = reg(enc.conv_k[i]);
    r.conv_b[i] = reg(enc.conv_b[i]);
  }
  r.fc_w = reg(enc.fc_w);
  r.fc_b = reg(enc.fc_b);
  r.mean_w = reg(enc.mean_w);
  r.mean_b = reg(enc.mean_b);
  if (a.is_vae()) {
    r.logvar_w = reg(enc.logvar_w);
    r.logvar_b = reg(enc.logvar_b);
  }
  r.dfc_w = reg(dec.fc_w);
  r.dfc_b = reg(dec.fc_b);
  for (int i = 0; i < 3; ++i) {
    r.gru[i].W = reg(dec.gru[i].W);
    r.gru[i].Uzr = reg(dec.gru[i].Uzr);
    r.gru[i].Uc = reg(dec.gru[i].Uc);
    r.gru[i].b = reg(dec.gru[i].b);
  }
  if (a.teacher_forced()) r.tok_w = reg(dec.tok_w);
  r.out_w = reg(dec.out_w);
  r.out_b = reg(dec.out_b);
  return r;
}

template <typename T>
DiscRefsT<T> register_disc(nn::Tape<T>& tp, DiscriminatorParamsT<T>& disc, bool grads) {
  DiscRefsT<T> d;
  auto reg = [&](Mat<T>& p) {
    auto ref = tp.input(p, grads);
    d.flat.push_back(ref);
    return ref;
  };
  d.w1 = reg(disc.w1);
  d.b1 = reg(disc.b1);
  d.w2 = reg(disc.w2);
  d.b2 = reg(disc.b2);
  d.w3 = reg(disc.w3);
  d.b3 = reg(disc.b3);
  return d;
}

/// Dense (batch * max_len) x vocab block for the conv stack; sequences are
/// stacked vertically in batch order.
template <typename T>
Mat<T> one_hot_block(const std::vector<chem::TokenSequence>& batch,
                     std::size_t vocab_size, std::size_t max_len) {
  if (batch.empty()) throw nn::ShapeMismatchError("empty batch");
  Mat<T> x = Mat<T>::Zero(static_cast<Eigen::Index>(batch.size() * max_len),
                          static_cast<Eigen::Index>(vocab_size));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const chem::TokenSequence& s = batch[b];
    if (s.tokens.size() != max_len) throw nn::ShapeMismatchError("sequence length");
    for (std::size_t t = 0; t < max_len; ++t) {
      if (s.tokens[t] >= vocab_size) throw nn::ShapeMismatchError("token index");
      x(static_cast<Eigen::Index>(b * max_len + t),
        static_cast<Eigen::Index>(s.tokens[t])) = T(1);
    }
  }
  return x;
}

template <typename T>
EncRefsT<T> encoder_graph(nn::Tape<T>& tp, const ArchitectureDescriptor& a,
                          const ModelRefsT<T>& r, typename nn::Tape<T>::Ref x,
                          std::size_t batch) {
  auto act = x;
  std::size_t len = a.max_len;
  for (std::size_t i = 0; i < 3; ++i) {
    act = tp.selu(nn::conv1d(tp, act, static_cast<Eigen::Index>(len), r.conv_k[i],
                             r.conv_b[i], static_cast<Eigen::Index>(a.conv[i].kernel)));
    len = len - a.conv[i].kernel + 1;
  }
  auto flat = tp.reshape(act, static_cast<Eigen::Index>(batch),
                         static_cast<Eigen::Index>(a.flat_dim()));
  auto fc = tp.selu(nn::dense(tp, flat, r.fc_w, r.fc_b));
  EncRefsT<T> e;
  e.mean = nn::dense(tp, fc, r.mean_w, r.mean_b);
  if (a.is_vae())
    e.logvar = tp.clamp(nn::dense(tp, fc, r.logvar_w, r.logvar_b), T(-10), T(10));
  return e;
}

/// Unrolls the three-layer GRU decoder and returns one probability-row node
/// per position. Teacher-forced variants feed target token t-1 into the
/// third layer at position t; position 0 sees the pad token, which holds
/// index 0 by vocabulary construction.
template <typename T>
std::vector<typename nn::Tape<T>::Ref> decoder_graph(
    nn::Tape<T>& tp, const ArchitectureDescriptor& a, const ModelRefsT<T>& r,
    typename nn::Tape<T>::Ref z, const std::vector<chem::TokenSequence>& batch) {
  Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  Eigen::Index h = static_cast<Eigen::Index>(a.gru_hidden);
  auto dec0 = tp.selu(nn::dense(tp, z, r.dfc_w, r.dfc_b));
  auto h1 = tp.input(Mat<T>::Zero(b, h));
  auto h2 = tp.input(Mat<T>::Zero(b, h));
  auto h3 = tp.input(Mat<T>::Zero(b, h));
  bool teacher = a.teacher_forced();
  std::vector<typename nn::Tape<T>::Ref> probs;
  probs.reserve(a.max_len);
  std::vector<std::size_t> prev(batch.size(), 0);
  for (std::size_t t = 0; t < a.max_len; ++t) {
    h1 = nn::gru_cell(tp, dec0, h1, r.gru[0], h);
    h2 = nn::gru_cell(tp, h1, h2, r.gru[1], h);
    if (teacher) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        prev[i] = t == 0 ? 0 : batch[i].tokens[t - 1];
      auto extra = tp.gather_rows(r.tok_w, prev);
      h3 = nn::gru_cell(tp, h2, h3, r.gru[2], h, extra);
    } else {
      h3 = nn::gru_cell(tp, h2, h3, r.gru[2], h);
    }
    probs.push_back(tp.softmax_rows(nn::dense(tp, h3, r.out_w, r.out_b)));
  }
  return probs;
}

template <typename T>
typename nn::Tape<T>::Ref disc_graph(nn::Tape<T>& tp, const DiscRefsT<T>& d,
                                     typename nn::Tape<T>::Ref z) {
  auto a1 = tp.selu(nn::dense(tp, z, d.w1, d.b1));
  auto a2 = tp.selu(nn::dense(tp, a1, d.w2, d.b2));
  return tp.sigmoid(nn::dense(tp, a2, d.w3, d.b3));
}

/// Sum over positions of per-position cross entropy with divisor batch: the
/// mean over the batch of per-sequence position sums.
template <typename T>
typename nn::Tape<T>::Ref ce_graph(nn::Tape<T>& tp,
                                   const std::vector<typename nn::Tape<T>::Ref>& probs,
                                   const std::vector<chem::TokenSequence>& batch) {
  typename nn::Tape<T>::Ref total = -1;
  T divisor = static_cast<T>(batch.size());
  std::vector<std::size_t> hot(batch.size());
  for (std::size_t t = 0; t < probs.size(); ++t) {
    for (std::size_t i = 0; i < batch.size(); ++i) hot[i] = batch[i].tokens[t];
    auto c = tp.cross_entropy(probs[t], hot, divisor);
    total = total < 0 ? c : tp.add(total, c);
  }
  return total;
}

/// Mean over the batch of -0.5 * sum_d (1 + s - mu^2 - exp(s)).
template <typename T>
typename nn::Tape<T>::Ref kl_graph(nn::Tape<T>& tp, typename nn::Tape<T>::Ref mean,
                                   typename nn::Tape<T>::Ref logvar, std::size_t batch) {
  const Mat<T>& mv = tp.value(mean);
  auto ones = tp.input(Mat<T>::Ones(mv.rows(), mv.cols()));
  auto term = tp.sub(tp.add(ones, logvar), tp.add(tp.mul(mean, mean), tp.exp_(logvar)));
  return tp.scale_add(tp.sum_all(term), T(-0.5) / static_cast<T>(batch), T(0));
}

template <typename T>
struct VaeGraph {
  ModelRefsT<T> refs;
  EncRefsT<T> enc;
  std::vector<typename nn::Tape<T>::Ref> probs;
  typename nn::Tape<T>::Ref ce = -1, kl = -1, loss = -1;
};

/// CE + beta * KL under the reparameterization z = mean + exp(s/2) * noise.
template <typename T>
VaeGraph<T> vae_loss_graph(nn::Tape<T>& tp, const ArchitectureDescriptor& a,
                           EncoderParamsT<T>& enc, DecoderParamsT<T>& dec,
                           const std::vector<chem::TokenSequence>& batch,
                           const Mat<T>& noise, T beta, bool grads) {
  VaeGraph<T> g;
  g.refs = register_params(tp, a, enc, dec, grads);
  auto x = tp.input(one_hot_block<T>(batch, a.vocab_size, a.max_len));
  g.enc = encoder_graph(tp, a, g.refs, x, batch.size());
  auto sigma = tp.exp_(tp.scale_add(g.enc.logvar, T(0.5), T(0)));
  auto z = tp.add(g.enc.mean, tp.mul(sigma, tp.input(noise)));
  g.probs = decoder_graph(tp, a, g.refs, z, batch);
  g.ce = ce_graph(tp, g.probs, batch);
  g.kl = kl_graph(tp, g.enc.mean, g.enc.logvar, batch.size());
  g.loss = tp.add(g.ce, tp.scale_add(g.kl, beta, T(0)));
  return g;
}

template <typename T>
struct ReconGraph {
  ModelRefsT<T> refs;
  EncRefsT<T> enc;
  std::vector<typename nn::Tape<T>::Ref> probs;
  typename nn::Tape<T>::Ref loss = -1;
};

/// AAE reconstruction phase: teacher-forced CE from the deterministic point.
template <typename T>
ReconGraph<T> recon_loss_graph(nn::Tape<T>& tp, const ArchitectureDescriptor& a,
                               EncoderParamsT<T>& enc, DecoderParamsT<T>& dec,
                               const std::vector<chem::TokenSequence>& batch,
                               bool grads) {
  ReconGraph<T> g;
  g.refs = register_params(tp, a, enc, dec, grads);
  auto x = tp.input(one_hot_block<T>(batch, a.vocab_size, a.max_len));
  g.enc = encoder_graph(tp, a, g.refs, x, batch.size());
  g.probs = decoder_graph(tp, a, g.refs, g.enc.mean, batch);
  g.loss = ce_graph(tp, g.probs, batch);
  return g;
}

template <typename T>
struct DiscGraph {
  DiscRefsT<T> refs;
  typename nn::Tape<T>::Ref d_prior = -1, d_encoder = -1, loss = -1;
};

/// L_D = -mean(log D(z')) - mean(log(1 - D(z))) on fixed latent rows.
template <typename T>
DiscGraph<T> disc_loss_graph(nn::Tape<T>& tp, DiscriminatorParamsT<T>& disc,
                             const Mat<T>& z_prior, const Mat<T>& z_encoder,
                             bool grads) {
  Eigen::Index b = z_prior.rows();
  if (b == 0 || z_encoder.rows() != b || z_encoder.cols() != z_prior.cols())
    throw nn::ShapeMismatchError("discriminator latent rows");
  DiscGraph<T> g;
  g.refs = register_disc(tp, disc, grads);
  g.d_prior = disc_graph(tp, g.refs, tp.input(z_prior));
  g.d_encoder = disc_graph(tp, g.refs, tp.input(z_encoder));
  auto ones = tp.input(Mat<T>::Ones(b, 1));
  auto term = tp.add(tp.log_(g.d_prior), tp.log_(tp.sub(ones, g.d_encoder)));
  g.loss = tp.scale_add(tp.sum_all(term), T(-1) / static_cast<T>(b), T(0));
  return g;
}

template <typename T>
struct GenGraph {
  ModelRefsT<T> refs;
  typename nn::Tape<T>::Ref loss = -1;
};

/// Fooling phase: -mean log D(encode(x)) through a frozen discriminator. The
/// decoder parameters are registered for positional alignment but stay out
/// of the graph.
template <typename T>
GenGraph<T> gen_loss_graph(nn::Tape<T>& tp, const ArchitectureDescriptor& a,
                           EncoderParamsT<T>& enc, DecoderParamsT<T>& dec,
                           DiscriminatorParamsT<T>& disc,
                           const std::vector<chem::TokenSequence>& batch, bool grads) {
  GenGraph<T> g;
  g.refs = register_params(tp, a, enc, dec, grads);
  DiscRefsT<T> d = register_disc(tp, disc, false);
  auto x = tp.input(one_hot_block<T>(batch, a.vocab_size, a.max_len));
  EncRefsT<T> e = encoder_graph(tp, a, g.refs, x, batch.size());
  auto de = disc_graph(tp, d, e.mean);
  g.loss = tp.scale_add(tp.sum_all(tp.log_(de)), T(-1) / static_cast<T>(batch.size()),
                        T(0));
  return g;
}

}  // namespace molgen::ae
