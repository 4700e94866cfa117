#include <cmath>

#include "molgen/bench/neighborhood.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/fp/fingerprint.hpp"
#include "molgen/io.hpp"
#include "molgen/stats.hpp"

namespace molgen::bench {

Eigen::RowVectorXd hypersphere_point(const Eigen::RowVectorXd& center,
                                     double radius, Rng& rng) {
  Eigen::RowVectorXd dir(center.size());
  for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = rng.normal();
  double norm = dir.norm();
  if (norm < 1e-12) {
    dir.setZero();
    dir(0) = 1.0;
    norm = 1.0;
  }
  return center + (radius / norm) * dir;
}

std::vector<NeighborhoodBin> neighborhood_study(const ae::Model& m,
                                                const chem::Vocabulary& vocab,
                                                const std::string& query,
                                                const NeighborhoodConfig& cfg) {
  if (!(cfg.d_max > 0) || !(cfg.step > 0))
    throw Error("d_max and step must be positive");
  if (cfg.points_per_bin == 0 || cfg.attempts == 0)
    throw Error("points_per_bin and attempts must be positive");

  fp::Fingerprint query_fp;
  Eigen::RowVectorXd center;
  try {
    std::string bare = chem::strip_stereo(query);
    query_fp = fp::ecfp(chem::parse(bare));
    chem::TokenSequence seq = chem::tokenize(bare, vocab, m.arch.max_len);
    ae::EncoderOutput enc = ae::encode(chem::one_hot(seq, vocab), m);
    center = enc.center().cast<double>();
  } catch (const Error& e) {
    throw QueryEncodingFailure(e.what());
  }

  std::size_t bins = static_cast<std::size_t>(cfg.d_max / cfg.step + 1e-9) + 1;
  std::vector<NeighborhoodBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    double d = cfg.step * static_cast<double>(b);
    NeighborhoodBin& bin = out[b];
    bin.distance = d;
    bin.attempts_total = cfg.points_per_bin * cfg.attempts;
    std::vector<double> tanimotos;
    for (std::size_t p = 0; p < cfg.points_per_bin; ++p) {
      std::uint64_t k = static_cast<std::uint64_t>(b) * cfg.points_per_bin + p;
      Rng point_rng(mix64(cfg.seed ^ mix64(0x8f5c2d1e9a74b603ull + k)));
      Eigen::RowVectorXd z = hypersphere_point(center, d, point_rng);
      ae::LatentPoint zf = z.cast<float>();
      std::vector<chem::TokenSequence> decoded =
          ae::decode_sample_batch(zf, m, cfg.attempts, point_rng, cfg.threads);
      for (const chem::TokenSequence& seq : decoded) {
        std::string smiles = chem::detokenize(seq, vocab);
        if (smiles.empty()) continue;
        chem::MolecularGraph g;
        try {
          g = chem::parse(smiles);
        } catch (const Error&) {
          continue;
        }
        ++bin.valid_count;
        tanimotos.push_back(fp::tanimoto(fp::ecfp(g), query_fp));
      }
    }
    bin.valid_fraction = static_cast<double>(bin.valid_count) /
                         static_cast<double>(bin.attempts_total);
    bin.median_tanimoto = tanimotos.empty() ? 0.0 : stats::median(tanimotos);
  }
  return out;
}

void write_neighborhood_csv(const std::string& path,
                            const std::vector<NeighborhoodBin>& bins) {
  CsvWriter csv(path, {"distance", "median_tanimoto", "valid_fraction",
                       "valid_count", "attempts"});
  for (const NeighborhoodBin& b : bins)
    csv.row({fmt_double(b.distance), fmt_double(b.median_tanimoto),
             fmt_double(b.valid_fraction), std::to_string(b.valid_count),
             std::to_string(b.attempts_total)});
}

}  // namespace molgen::bench
