#include <unordered_set>

#include "molgen/bench/preprocess.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/chem/tokenizer.hpp"
#include "molgen/fp/fingerprint.hpp"
#include "molgen/io.hpp"

namespace molgen::bench {

namespace {

constexpr std::size_t kMinHeavyAtoms = 10;
constexpr std::size_t kFailureNoteCap = 20;

}  // namespace

PreprocessStats preprocess(const std::string& corpus_in, const std::string& corpus_out,
                           const std::string& exclusion_query,
                           double exclusion_threshold) {
  std::vector<std::string> lines = read_lines(corpus_in);

  bool exclude = !exclusion_query.empty();
  fp::Fingerprint query_fp;
  if (exclude)
    query_fp = fp::fcfp(chem::parse(chem::strip_stereo(exclusion_query)));

  PreprocessStats stats;
  stats.input = lines.size();
  std::vector<std::string> kept;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string bare = chem::strip_stereo(lines[i]);
    chem::MolecularGraph g;
    try {
      g = chem::parse(bare);
    } catch (const Error& e) {
      ++stats.parse_failed;
      if (stats.failures.size() < kFailureNoteCap)
        stats.failures.push_back("line " + std::to_string(i + 1) + ": " + e.what());
      continue;
    }
    // The parser admits heavy elements only, so every atom counts.
    if (g.atoms.size() < kMinHeavyAtoms) {
      ++stats.heavy_atoms;
      continue;
    }
    std::string canon = chem::canonical_smiles(g);
    if (chem::lex_smiles(canon).size() > chem::kMaxLen) {
      ++stats.too_long;
      continue;
    }
    if (!seen.insert(canon).second) {
      ++stats.duplicate;
      continue;
    }
    if (exclude && fp::tanimoto(fp::fcfp(g), query_fp) > exclusion_threshold) {
      ++stats.excluded;
      continue;
    }
    kept.push_back(canon);
  }
  stats.output = kept.size();
  write_lines(corpus_out, kept);
  return stats;
}

void write_preprocess_csv(const std::string& path, const PreprocessStats& stats) {
  CsvWriter csv(path, {"reason", "count"});
  csv.row({"input", std::to_string(stats.input)});
  csv.row({"output", std::to_string(stats.output)});
  csv.row({"parse_failed", std::to_string(stats.parse_failed)});
  csv.row({"heavy_atoms", std::to_string(stats.heavy_atoms)});
  csv.row({"too_long", std::to_string(stats.too_long)});
  csv.row({"duplicate", std::to_string(stats.duplicate)});
  csv.row({"excluded", std::to_string(stats.excluded)});
}

}  // namespace molgen::bench
