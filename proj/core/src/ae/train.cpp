#include "molgen/ae/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "molgen/ae/loss_graph.hpp"
#include "molgen/io.hpp"
#include "molgen/nn/adam.hpp"
#include "molgen/nn/tape.hpp"

namespace molgen::ae {

namespace {

using Tape = nn::Tape<float>;
using Ref = Tape::Ref;

double char_accuracy_of(const Tape& tp, const std::vector<Ref>& probs,
                        const std::vector<chem::TokenSequence>& batch) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t t = 0; t < probs.size(); ++t) {
    const Mat<float>& p = tp.value(probs[t]);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Eigen::Index arg = 0;
      p.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
      correct += static_cast<std::size_t>(arg) == batch[i].tokens[t] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<Mat<float>> extract_grads(const Tape& tp, const std::vector<Ref>& flat) {
  std::vector<Mat<float>> out;
  out.reserve(flat.size());
  for (Ref ref : flat) out.push_back(tp.grad(ref));
  return out;
}

std::optional<CsvWriter> open_log(const TrainConfig& cfg) {
  if (cfg.log_path.empty()) return std::nullopt;
  return std::optional<CsvWriter>(std::in_place, cfg.log_path,
                                  std::vector<std::string>{
                                      "epoch", "reconstruction_loss", "kl_loss",
                                      "discriminator_loss", "generator_loss",
                                      "char_accuracy"});
}

void log_epoch(std::optional<CsvWriter>& log, std::vector<EpochRecord>* history,
               const EpochRecord& rec) {
  if (history != nullptr) history->push_back(rec);
  if (log)
    log->row({std::to_string(rec.epoch), fmt_double(rec.reconstruction_loss),
              fmt_double(rec.kl_loss), fmt_double(rec.discriminator_loss),
              fmt_double(rec.generator_loss), fmt_double(rec.char_accuracy)});
}

void check_config(const ArchitectureDescriptor& arch, const TrainConfig& cfg) {
  arch.validate();
  if (cfg.batch_size == 0) throw Error("batch_size must be >= 1");
  if (cfg.epochs == 0) throw Error("epochs must be >= 1");
  if (!(cfg.learning_rate > 0)) throw Error("learning_rate must be positive");
}

}  // namespace

std::vector<chem::TokenSequence> tokenize_corpus(const std::vector<std::string>& corpus,
                                                 const chem::Vocabulary& vocab,
                                                 std::size_t max_len) {
  if (corpus.empty()) throw DataError("empty corpus");
  std::vector<chem::TokenSequence> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      out.push_back(chem::tokenize(corpus[i], vocab, max_len));
    } catch (const Error& e) {
      throw DataError("corpus line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

VaeBatchResult vae_batch(Model& m, const std::vector<chem::TokenSequence>& batch,
                         const Mat<float>& noise, float beta, bool with_grads) {
  if (!m.arch.is_vae()) throw Error("vae_batch requires a VAE variant");
  if (batch.empty()) throw nn::ShapeMismatchError("empty batch");
  if (noise.rows() != static_cast<Eigen::Index>(batch.size()) ||
      noise.cols() != static_cast<Eigen::Index>(m.arch.latent_dim))
    throw nn::ShapeMismatchError("noise shape");
  Tape tp;
  VaeGraph<float> g = vae_loss_graph(tp, m.arch, m.enc, m.dec, batch, noise, beta,
                                     with_grads);
  VaeBatchResult res;
  res.reconstruction_loss = tp.value(g.ce)(0, 0);
  res.kl = tp.value(g.kl)(0, 0);
  res.char_accuracy = char_accuracy_of(tp, g.probs, batch);
  if (with_grads) {
    tp.backward(g.loss);
    res.grads = extract_grads(tp, g.refs.flat);
  }
  return res;
}

ReconBatchResult aae_reconstruction_batch(Model& m,
                                          const std::vector<chem::TokenSequence>& batch,
                                          bool with_grads) {
  if (!m.arch.is_aae()) throw Error("aae_reconstruction_batch requires an AAE variant");
  if (batch.empty()) throw nn::ShapeMismatchError("empty batch");
  Tape tp;
  ReconGraph<float> g = recon_loss_graph(tp, m.arch, m.enc, m.dec, batch, with_grads);
  ReconBatchResult res;
  res.reconstruction_loss = tp.value(g.loss)(0, 0);
  res.char_accuracy = char_accuracy_of(tp, g.probs, batch);
  if (with_grads) {
    tp.backward(g.loss);
    res.grads = extract_grads(tp, g.refs.flat);
  }
  return res;
}

DiscBatchResult aae_discriminator_batch(Model& m, const Mat<float>& z_prior,
                                        const Mat<float>& z_encoder, bool with_grads) {
  if (!m.arch.is_aae()) throw Error("aae_discriminator_batch requires an AAE variant");
  if (z_prior.cols() != static_cast<Eigen::Index>(m.arch.latent_dim))
    throw nn::ShapeMismatchError("discriminator latent width");
  Tape tp;
  DiscGraph<float> g = disc_loss_graph(tp, m.disc, z_prior, z_encoder, with_grads);
  DiscBatchResult res;
  res.loss = tp.value(g.loss)(0, 0);
  const Mat<float>& dp = tp.value(g.d_prior);
  const Mat<float>& de = tp.value(g.d_encoder);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < dp.rows(); ++i) {
    correct += dp(i, 0) > 0.5f ? 1 : 0;
    correct += de(i, 0) < 0.5f ? 1 : 0;
  }
  res.accuracy = static_cast<double>(correct) / static_cast<double>(2 * dp.rows());
  if (with_grads) {
    tp.backward(g.loss);
    res.grads = extract_grads(tp, g.refs.flat);
  }
  return res;
}

GenBatchResult aae_generator_batch(Model& m,
                                   const std::vector<chem::TokenSequence>& batch,
                                   bool with_grads) {
  if (!m.arch.is_aae()) throw Error("aae_generator_batch requires an AAE variant");
  if (batch.empty()) throw nn::ShapeMismatchError("empty batch");
  Tape tp;
  GenGraph<float> g = gen_loss_graph(tp, m.arch, m.enc, m.dec, m.disc, batch,
                                     with_grads);
  GenBatchResult res;
  res.loss = tp.value(g.loss)(0, 0);
  if (with_grads) {
    tp.backward(g.loss);
    res.grads = extract_grads(tp, g.refs.flat);
  }
  return res;
}

Mat<float> sample_prior(const ArchitectureDescriptor& arch, std::size_t rows, Rng& rng) {
  Mat<float> z(static_cast<Eigen::Index>(rows),
               static_cast<Eigen::Index>(arch.latent_dim));
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      if (arch.variant == Variant::kGaussAae)
        z(r, c) = static_cast<float>(rng.normal());
      else if (arch.variant == Variant::kUniformAae)
        z(r, c) = static_cast<float>(rng.uniform(-1.0, 1.0));
      else
        throw Error("sample_prior requires an AAE variant");
    }
  return z;
}

Model train_vae(const std::vector<std::string>& corpus, const chem::Vocabulary& vocab,
                const ArchitectureDescriptor& arch, const TrainConfig& cfg,
                std::vector<EpochRecord>* history) {
  if (!arch.is_vae()) throw Error("train_vae requires a VAE variant");
  check_config(arch, cfg);
  std::vector<chem::TokenSequence> seqs = tokenize_corpus(corpus, vocab, arch.max_len);
  Rng root(cfg.seed);
  Rng rng_init = root.fork(1);
  Rng rng_shuffle = root.fork(2);
  Rng rng_noise = root.fork(3);
  Model m = Model::init(arch, rng_init);
  nn::Adam<float> opt(static_cast<float>(cfg.learning_rate));
  opt.bind(m.parameters());

  std::size_t n = seqs.size();
  std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  double anneal_steps = std::max(
      1.0, cfg.kl_anneal_fraction * static_cast<double>(cfg.epochs * batches));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::optional<CsvWriter> log = open_log(cfg);

  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng_shuffle.shuffle(idx);
    double recon_sum = 0, kl_sum = 0, acc_sum = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
      std::size_t b1 = std::min(n, b0 + cfg.batch_size);
      std::vector<chem::TokenSequence> batch;
      batch.reserve(b1 - b0);
      for (std::size_t i = b0; i < b1; ++i) batch.push_back(seqs[idx[i]]);
      float beta = static_cast<float>(
          std::min(1.0, static_cast<double>(step) / anneal_steps));
      Mat<float> noise(static_cast<Eigen::Index>(batch.size()),
                       static_cast<Eigen::Index>(arch.latent_dim));
      for (Eigen::Index r = 0; r < noise.rows(); ++r)
        for (Eigen::Index c = 0; c < noise.cols(); ++c)
          noise(r, c) = static_cast<float>(rng_noise.normal());
      VaeBatchResult res = vae_batch(m, batch, noise, beta, true);
      opt.step(res.grads);
      recon_sum += res.reconstruction_loss;
      kl_sum += res.kl;
      acc_sum += res.char_accuracy;
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.reconstruction_loss = recon_sum / static_cast<double>(batches);
    rec.kl_loss = kl_sum / static_cast<double>(batches);
    rec.char_accuracy = acc_sum / static_cast<double>(batches);
    log_epoch(log, history, rec);
  }
  return m;
}

Model train_aae(const std::vector<std::string>& corpus, const chem::Vocabulary& vocab,
                const ArchitectureDescriptor& arch, const TrainConfig& cfg,
                std::vector<EpochRecord>* history) {
  if (!arch.is_aae()) throw Error("train_aae requires an AAE variant");
  check_config(arch, cfg);
  std::vector<chem::TokenSequence> seqs = tokenize_corpus(corpus, vocab, arch.max_len);
  Rng root(cfg.seed);
  Rng rng_init = root.fork(1);
  Rng rng_shuffle = root.fork(2);
  Rng rng_prior = root.fork(3);
  Model m = Model::init(arch, rng_init);
  // The reconstruction, discriminator, and fooling phases each hold their
  // own moment estimates at the shared learning rate.
  nn::Adam<float> recon_opt(static_cast<float>(cfg.learning_rate));
  recon_opt.bind(m.parameters());
  nn::Adam<float> disc_opt(static_cast<float>(cfg.learning_rate));
  disc_opt.bind(m.discriminator_parameters());
  nn::Adam<float> gen_opt(static_cast<float>(cfg.learning_rate));
  gen_opt.bind(m.parameters());

  std::size_t n = seqs.size();
  std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::optional<CsvWriter> log = open_log(cfg);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng_shuffle.shuffle(idx);
    double recon_sum = 0, disc_sum = 0, gen_sum = 0, acc_sum = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
      std::size_t b1 = std::min(n, b0 + cfg.batch_size);
      std::vector<chem::TokenSequence> batch;
      batch.reserve(b1 - b0);
      for (std::size_t i = b0; i < b1; ++i) batch.push_back(seqs[idx[i]]);

      ReconBatchResult rres = aae_reconstruction_batch(m, batch, true);
      recon_opt.step(rres.grads);

      Mat<float> x = dense_one_hot(batch, arch.vocab_size);
      Mat<float> z_enc = encode_batch(x, m).mean;
      Mat<float> z_prior = sample_prior(arch, batch.size(), rng_prior);
      DiscBatchResult dres = aae_discriminator_batch(m, z_prior, z_enc, true);
      disc_opt.step(dres.grads);

      GenBatchResult gres = aae_generator_batch(m, batch, true);
      gen_opt.step(gres.grads);

      recon_sum += rres.reconstruction_loss;
      acc_sum += rres.char_accuracy;
      disc_sum += dres.loss;
      gen_sum += gres.loss;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.reconstruction_loss = recon_sum / static_cast<double>(batches);
    rec.discriminator_loss = disc_sum / static_cast<double>(batches);
    rec.generator_loss = gen_sum / static_cast<double>(batches);
    rec.char_accuracy = acc_sum / static_cast<double>(batches);
    log_epoch(log, history, rec);
  }
  return m;
}

Model train(const std::vector<std::string>& corpus, const chem::Vocabulary& vocab,
            const ArchitectureDescriptor& arch, const TrainConfig& cfg,
            std::vector<EpochRecord>* history) {
  return arch.is_vae() ? train_vae(corpus, vocab, arch, cfg, history)
                       : train_aae(corpus, vocab, arch, cfg, history);
}

}  // namespace molgen::ae
