#include <algorithm>
#include <thread>

#include "molgen/ae/train.hpp"
#include "molgen/bench/eval.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/io.hpp"
#include "molgen/rng.hpp"

namespace molgen::bench {

namespace {

struct Counts {
  std::size_t train_correct = 0;
  std::size_t gen_correct = 0;
  std::size_t valid = 0;
};

std::size_t argmax_row(const ae::Mat<float>& probs, Eigen::Index r) {
  Eigen::Index best = 0;
  probs.row(r).maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

void eval_chunk(const ae::Model& m, const chem::Vocabulary& vocab,
                const std::vector<chem::TokenSequence>& seqs, std::uint64_t seed,
                std::size_t lo, std::size_t hi, Counts& counts) {
  std::size_t max_len = m.arch.max_len;
  for (std::size_t i = lo; i < hi; ++i) {
    const chem::TokenSequence& target = seqs[i];
    ae::EncoderOutput enc = ae::encode(chem::one_hot(target, vocab), m);
    const ae::LatentPoint& z = enc.center();

    ae::Mat<float> probs = ae::decode_train(z, target, m);
    for (std::size_t t = 0; t < max_len; ++t)
      if (argmax_row(probs, static_cast<Eigen::Index>(t)) == target.tokens[t])
        ++counts.train_correct;

    Rng rng(mix64(seed ^ mix64(0xe7b28f1a4c6d9035ull + i)));
    chem::TokenSequence sampled = ae::decode_sample(z, m, rng);
    for (std::size_t t = 0; t < max_len; ++t)
      if (sampled.tokens[t] == target.tokens[t]) ++counts.gen_correct;

    std::string smiles = chem::detokenize(sampled, vocab);
    if (!smiles.empty() && chem::is_valid(smiles)) ++counts.valid;
  }
}

}  // namespace

EvalResult eval_reconstruction(const ae::Model& m, const chem::Vocabulary& vocab,
                               const std::vector<std::string>& corpus,
                               std::uint64_t seed, std::size_t threads) {
  std::vector<chem::TokenSequence> seqs =
      ae::tokenize_corpus(corpus, vocab, m.arch.max_len);
  std::size_t n = seqs.size();

  std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<Counts> partial(workers);
  if (workers == 1) {
    eval_chunk(m, vocab, seqs, seed, 0, n, partial[0]);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      std::size_t lo = w * chunk;
      std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&m, &vocab, &seqs, seed, lo, hi, &partial, w] {
        eval_chunk(m, vocab, seqs, seed, lo, hi, partial[w]);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  Counts total;
  for (const Counts& c : partial) {
    total.train_correct += c.train_correct;
    total.gen_correct += c.gen_correct;
    total.valid += c.valid;
  }
  double positions = static_cast<double>(n) * static_cast<double>(m.arch.max_len);
  EvalResult r;
  r.variant = ae::variant_name(m.arch.variant);
  r.molecules = n;
  r.train_mode_accuracy = static_cast<double>(total.train_correct) / positions;
  r.gen_mode_accuracy = static_cast<double>(total.gen_correct) / positions;
  r.valid_fraction = static_cast<double>(total.valid) / static_cast<double>(n);
  return r;
}

void write_eval_csv(const std::string& path, const std::vector<EvalResult>& rows) {
  CsvWriter csv(path, {"variant", "molecules", "train_mode_accuracy",
                       "gen_mode_accuracy", "valid_fraction"});
  for (const EvalResult& r : rows)
    csv.row({r.variant, std::to_string(r.molecules),
             fmt_double(r.train_mode_accuracy), fmt_double(r.gen_mode_accuracy),
             fmt_double(r.valid_fraction)});
}

}  // namespace molgen::bench
