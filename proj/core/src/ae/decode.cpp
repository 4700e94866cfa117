#include <algorithm>
#include <map>
#include <span>
#include <thread>

#include "molgen/ae/model.hpp"
#include "molgen/chem/smiles.hpp"

namespace molgen::ae {

namespace {

constexpr std::size_t kStartToken = 0;  // the pad token holds index 0 by vocabulary construction

struct DecoderState {
  Mat<float> dec0;  // batch x decoder_fc, fed to the first layer at every step
  Mat<float> h1, h2, h3;
};

DecoderState init_state(const Model& m, const Mat<float>& z_rows) {
  if (z_rows.cols() != static_cast<Eigen::Index>(m.arch.latent_dim))
    throw nn::ShapeMismatchError("latent dimension");
  DecoderState st;
  st.dec0 = (z_rows * m.dec.fc_w).rowwise() + m.dec.fc_b.row(0);
  nn::selu_raw(st.dec0);
  Eigen::Index b = z_rows.rows();
  Eigen::Index h = static_cast<Eigen::Index>(m.arch.gru_hidden);
  st.h1 = Mat<float>::Zero(b, h);
  st.h2 = Mat<float>::Zero(b, h);
  st.h3 = Mat<float>::Zero(b, h);
  return st;
}

/// Advances all three layers one timestep and returns the probability rows.
/// prev_tokens, when non-null, feeds token rows of tok_w into layer 3.
Mat<float> step_probs(const Model& m, DecoderState& st,
                      const std::vector<std::size_t>* prev_tokens) {
  Mat<float> hn;
  nn::gru_cell_raw(st.dec0, st.h1, m.dec.gru[0], hn);
  st.h1.swap(hn);
  nn::gru_cell_raw(st.h1, st.h2, m.dec.gru[1], hn);
  st.h2.swap(hn);
  if (prev_tokens != nullptr) {
    Mat<float> extra(st.h2.rows(), m.dec.tok_w.cols());
    for (Eigen::Index i = 0; i < extra.rows(); ++i)
      extra.row(i) = m.dec.tok_w.row(
          static_cast<Eigen::Index>((*prev_tokens)[static_cast<std::size_t>(i)]));
    nn::gru_cell_raw(st.h2, st.h3, m.dec.gru[2], hn, &extra);
  } else {
    nn::gru_cell_raw(st.h2, st.h3, m.dec.gru[2], hn);
  }
  st.h3.swap(hn);
  Mat<float> probs = (st.h3 * m.dec.out_w).rowwise() + m.dec.out_b.row(0);
  nn::softmax_rows_raw(probs);
  return probs;
}

Mat<float> replicate_rows(const LatentPoint& z, std::size_t rows) {
  Mat<float> out(static_cast<Eigen::Index>(rows), z.size());
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) = z;
  return out;
}

std::span<const float> prob_row(const Mat<float>& probs, Eigen::Index r) {
  return {probs.data() + r * probs.cols(), static_cast<std::size_t>(probs.cols())};
}

/// Autoregressive sampling for a contiguous block of attempts; row i draws
/// from rngs[lo + i]. Teacher-forced variants feed each row its own sampled
/// token, so rows evolve independently of how attempts are chunked.
void sample_chunk(const Model& m, const LatentPoint& z, std::vector<Rng>& rngs,
                  std::size_t lo, std::size_t hi,
                  std::vector<chem::TokenSequence>& out) {
  std::size_t batch = hi - lo;
  std::size_t max_len = m.arch.max_len;
  DecoderState st = init_state(m, replicate_rows(z, batch));
  std::vector<std::size_t> prev(batch, kStartToken);
  bool teacher = m.arch.teacher_forced();
  for (std::size_t t = 0; t < max_len; ++t) {
    Mat<float> probs = step_probs(m, st, teacher ? &prev : nullptr);
    for (std::size_t i = 0; i < batch; ++i) {
      std::size_t tok =
          rngs[lo + i].multinomial(prob_row(probs, static_cast<Eigen::Index>(i)));
      out[lo + i].tokens[t] = tok;
      prev[i] = tok;
    }
  }
}

chem::TokenSequence blank_sequence(std::size_t max_len) {
  return chem::TokenSequence{std::vector<std::size_t>(max_len, kStartToken), max_len};
}

}  // namespace

Mat<float> decode_train(const LatentPoint& z, const chem::TokenSequence& target,
                        const Model& m) {
  std::size_t max_len = m.arch.max_len;
  if (target.tokens.size() != max_len) throw nn::ShapeMismatchError("target length");
  DecoderState st = init_state(m, replicate_rows(z, 1));
  Mat<float> rows(static_cast<Eigen::Index>(max_len),
                  static_cast<Eigen::Index>(m.arch.vocab_size));
  bool teacher = m.arch.teacher_forced();
  std::vector<std::size_t> prev(1, kStartToken);
  for (std::size_t t = 0; t < max_len; ++t) {
    if (teacher && t > 0) prev[0] = target.tokens[t - 1];
    Mat<float> probs = step_probs(m, st, teacher ? &prev : nullptr);
    rows.row(static_cast<Eigen::Index>(t)) = probs.row(0);
  }
  return rows;
}

chem::TokenSequence decode_sample(const LatentPoint& z, const Model& m, Rng& rng) {
  std::size_t max_len = m.arch.max_len;
  chem::TokenSequence seq = blank_sequence(max_len);
  DecoderState st = init_state(m, replicate_rows(z, 1));
  bool teacher = m.arch.teacher_forced();
  std::vector<std::size_t> prev(1, kStartToken);
  for (std::size_t t = 0; t < max_len; ++t) {
    Mat<float> probs = step_probs(m, st, teacher ? &prev : nullptr);
    std::size_t tok = rng.multinomial(prob_row(probs, 0));
    seq.tokens[t] = tok;
    prev[0] = tok;
  }
  return seq;
}

chem::TokenSequence decode_argmax(const LatentPoint& z, const Model& m) {
  std::size_t max_len = m.arch.max_len;
  chem::TokenSequence seq = blank_sequence(max_len);
  DecoderState st = init_state(m, replicate_rows(z, 1));
  bool teacher = m.arch.teacher_forced();
  std::vector<std::size_t> prev(1, kStartToken);
  for (std::size_t t = 0; t < max_len; ++t) {
    Mat<float> probs = step_probs(m, st, teacher ? &prev : nullptr);
    Eigen::Index tok = 0;
    probs.row(0).maxCoeff(&tok);
    seq.tokens[t] = static_cast<std::size_t>(tok);
    prev[0] = seq.tokens[t];
  }
  return seq;
}

std::vector<chem::TokenSequence> decode_sample_batch(const LatentPoint& z,
                                                     const Model& m,
                                                     std::size_t attempts, Rng& base,
                                                     std::size_t threads) {
  std::size_t max_len = m.arch.max_len;
  std::vector<chem::TokenSequence> out(attempts, blank_sequence(max_len));
  if (attempts == 0) return out;
  std::vector<Rng> rngs;
  rngs.reserve(attempts);
  for (std::size_t i = 0; i < attempts; ++i) rngs.push_back(base.fork(i));

  if (!m.arch.teacher_forced()) {
    // Probability rows do not depend on sampled tokens, so one pass serves
    // every attempt.
    Mat<float> rows = decode_train(z, blank_sequence(max_len), m);
    for (std::size_t i = 0; i < attempts; ++i)
      for (std::size_t t = 0; t < max_len; ++t)
        out[i].tokens[t] =
            rngs[i].multinomial(prob_row(rows, static_cast<Eigen::Index>(t)));
    return out;
  }

  std::size_t workers = std::max<std::size_t>(1, std::min(threads, attempts));
  if (workers == 1) {
    sample_chunk(m, z, rngs, 0, attempts, out);
    return out;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (attempts + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(attempts, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(
        [&m, &z, &rngs, lo, hi, &out] { sample_chunk(m, z, rngs, lo, hi, out); });
  }
  for (std::thread& t : pool) t.join();
  return out;
}

ConsensusResult decode_consensus(const LatentPoint& z, const Model& m,
                                 const chem::Vocabulary& vocab,
                                 std::size_t attempts, Rng& base,
                                 std::size_t threads) {
  std::vector<chem::TokenSequence> samples =
      decode_sample_batch(z, m, attempts, base, threads);
  std::map<std::string, std::size_t> counts;
  for (const chem::TokenSequence& s : samples) ++counts[chem::detokenize(s, vocab)];

  ConsensusResult res;
  std::size_t best = 0;
  for (const auto& [smiles, count] : counts) {
    if (!chem::is_valid(smiles)) continue;
    res.valid_count += count;
    res.distinct_valid.push_back(smiles);
    // Map order is lexicographic, so a strict > keeps the smallest modal string.
    if (count > best) {
      best = count;
      res.smiles = smiles;
    }
  }
  return res;
}

}  // namespace molgen::ae
