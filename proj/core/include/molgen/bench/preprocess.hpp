#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace molgen::bench {

/// Outcome counts of one preprocessing pass. Every input line is either kept
/// or attributed to exactly one drop reason, so the reason counts sum to
/// input - output.
struct PreprocessStats {
  std::size_t input = 0;
  std::size_t output = 0;
  std::size_t parse_failed = 0;
  std::size_t heavy_atoms = 0;  // fewer than 10 heavy atoms
  std::size_t too_long = 0;     // more than 120 tokens after canonicalization
  std::size_t duplicate = 0;    // canonical form already emitted
  std::size_t excluded = 0;     // FCFP4 Tanimoto to the query above threshold
  std::vector<std::string> failures;  // first parse failures, "line N: why"
};

/// Canonicalizes a corpus: strips stereo markers, drops structures with
/// fewer than 10 heavy atoms or more than 120 tokens, deduplicates on the
/// canonical form, and optionally drops entries whose FCFP4 Tanimoto
/// similarity to exclusion_query exceeds exclusion_threshold. Parse failures
/// are counted per line, never fatal. Writes one canonical SMILES per line.
PreprocessStats preprocess(const std::string& corpus_in, const std::string& corpus_out,
                           const std::string& exclusion_query = "",
                           double exclusion_threshold = 0.5);

/// Two-column CSV (reason, count) of the stats, including input and output.
void write_preprocess_csv(const std::string& path, const PreprocessStats& stats);

}  // namespace molgen::bench
