#include <filesystem>
#include <iostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/chem/tokenizer.hpp"
#include "molgen/error.hpp"
#include "molgen/io.hpp"
#include "molgen/rng.hpp"

/// Deterministic corpus builder. A fragment grammar assembles drug-like
/// SMILES from self-contained ring systems, linkers, and tails; every
/// candidate is parsed, size-filtered, canonicalized, and deduplicated, so
/// the shipped corpora are valid by construction. The "active" family is an
/// aryl-piperazine grid kept disjoint from the general grammar, giving the
/// activity model a crisp pattern to learn.

namespace {

using namespace molgen;

// Ring systems, written so that appending text attaches a substituent to the
// last ring atom. Each fragment closes every digit it opens.
const char* kRings[] = {
    "c1ccccc1",        "c1ccc(F)cc1",      "c1ccc(Cl)cc1",  "c1ccc(Br)cc1",
    "c1ccc(I)cc1",     "c1ccc(C)cc1",      "c1ccc(OC)cc1",  "c1ccc(C#N)cc1",
    "c1ccc(C(F)(F)F)cc1", "c1ccc([N+](=O)[O-])cc1",         "c1ccncc1",
    "c1cccnc1",        "c1ccc2ccccc2c1",   "c1ccsc1",       "c1ccoc1",
    "Cc1cc[nH]c1",     "c1cnc[nH]1",       "C1CCCCC1",      "C1CCCC1",
    "C1CCNCC1",        "C1CCOCC1",         "c1cncnc1",
};

// Chain linkers joining two ring systems; junction valences hold for any
// ring-carbon or ring-nitrogen attachment the grammar produces.
const char* kLinkers[] = {
    "C",      "CC",      "CCC",   "CCCC",  "O",    "OC",     "CO",
    "COC",    "OCC",     "N",     "NC",    "CN",   "CNC",    "C(=O)",
    "C(=O)N", "NC(=O)",  "C(=O)O","OC(=O)","S",    "CS",     "C=C",
    "S(=O)(=O)",         "S(=O)(=O)N",     "CCN",  "CCO",
};

// Terminal decorations for ring atoms and chain ends.
const char* kTails[] = {
    "C",     "CC",    "CCC",   "CCCC",   "C(C)C", "CC(C)C", "CCO",
    "CCCO",  "CCN",   "CCCN",  "C#N",    "C=C",   "F",      "Cl",
    "Br",    "O",     "OC",    "OCC",    "N",     "NC",     "N(C)C",
    "C(=O)O","C(=O)N","C(=O)C","S(=O)(=O)N",      "P(=O)(O)O",
    "CC(=O)N",         "COC",  "SC",     "C(F)(F)F",
};

// Short branches spliced into chain templates as "(X)".
const char* kBranches[] = {"C", "CC", "O", "OC", "N", "F", "Cl", "C(=O)O", "C#N"};

// Aryl heads of the active family.
const char* kActiveAryls[] = {
    "c1ccccc1",       "c1ccc(F)cc1",   "c1ccc(Cl)cc1",  "c1ccc(C)cc1",
    "c1ccc(OC)cc1",   "c1ccc(Br)cc1",  "c1ccncc1",      "c1cccnc1",
    "c1ccc(C#N)cc1",  "c1ccc2ccccc2c1", "c1ccc(C(F)(F)F)cc1", "c1ccsc1",
};

// N-substituents of the piperazine; "" leaves the bare N-H ring.
const char* kActiveTails[] = {
    "",      "C",     "CC",     "CCC",   "CCCC",   "CCCCC", "C(C)C",
    "CC(C)C","CCO",   "CCCO",   "CCCCO", "CCN",    "CCCN",  "CCOC",
    "CCCOC", "CC(C)O","C(=O)C", "C(=O)CC", "CC(=O)N", "CCC#N", "CCCC#N",
    "CC=C",  "CCF",   "CCCF",   "CCCl",  "CCS",   "CCSC",  "CCCS",
    "CCOCC", "CCNC",  "CCCNC",  "CCCCN", "CC(C)C(=O)O", "CCC(=O)O",
    "CCC(=O)N", "CCCC(=O)N",
};

template <std::size_t N>
const char* pick(const char* const (&table)[N], Rng& rng) {
  return table[rng.uniform_int(N)];
}

std::string chain_molecule(Rng& rng) {
  std::size_t units = 4 + rng.uniform_int(5);
  std::string s;
  for (std::size_t i = 0; i < units; ++i) {
    s += pick(kLinkers, rng);
    if (rng.uniform() < 0.3) s += std::string("(") + pick(kBranches, rng) + ")";
  }
  s += pick(kTails, rng);
  return s;
}

std::string candidate(Rng& rng) {
  switch (rng.uniform_int(6)) {
    case 0:  // ring + tail
      return std::string(pick(kRings, rng)) + pick(kTails, rng);
    case 1:  // ring + linker + ring
      return std::string(pick(kRings, rng)) + pick(kLinkers, rng) + pick(kRings, rng);
    case 2:  // ring + linker + ring + tail
      return std::string(pick(kRings, rng)) + pick(kLinkers, rng) + pick(kRings, rng) +
             pick(kTails, rng);
    case 3:  // tail-headed bi-ring
      return std::string(pick(kTails, rng)) + pick(kRings, rng) + pick(kLinkers, rng) +
             pick(kRings, rng);
    case 4:  // three rings
      return std::string(pick(kRings, rng)) + pick(kLinkers, rng) + pick(kRings, rng) +
             pick(kLinkers, rng) + pick(kRings, rng);
    default:  // branched chain
      return chain_molecule(rng);
  }
}

/// Parse, size-gate, and canonicalize one candidate; empty when rejected.
std::string admit(const std::string& s, std::size_t min_heavy, std::size_t max_heavy,
                  std::size_t max_tokens) {
  chem::MolecularGraph g;
  try {
    g = chem::parse(s);
  } catch (const Error&) {
    return "";
  }
  if (g.atoms.size() < min_heavy || g.atoms.size() > max_heavy) return "";
  std::string canon = chem::canonical_smiles(g);
  if (chem::lex_smiles(canon).size() > max_tokens) return "";
  return canon;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the desk-scale corpora and activity labels"};
  std::string out_dir = "data";
  std::uint64_t seed = 20260816;
  std::size_t general_target = 19600;
  std::size_t labeled_actives = 400;
  std::size_t labeled_inactives = 1600;
  std::size_t tiny_size = 1000;
  app.add_option("--out-dir", out_dir, "Destination directory");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--general", general_target, "General-family corpus size");
  app.add_option("--tiny", tiny_size, "Memorization corpus size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IOError("cannot create " + out_dir);
    auto path = [&out_dir](const char* name) {
      return (std::filesystem::path(out_dir) / name).string();
    };

    Rng rng(seed);
    std::unordered_set<std::string> seen;

    // Active family: the full aryl x tail grid, canonical and distinct.
    std::vector<std::string> actives;
    for (const char* aryl : kActiveAryls)
      for (const char* tail : kActiveTails) {
        std::string s = std::string(aryl) + "N1CCN" +
                        (*tail ? "(" + std::string(tail) + ")" : "") + "CC1";
        std::string canon = admit(s, 10, 60, 110);
        if (canon.empty())
          throw Error("active candidate rejected: " + s);
        if (seen.insert(canon).second) actives.push_back(canon);
      }
    if (actives.size() < labeled_actives)
      throw Error("active grid smaller than the labeled-active quota");

    std::vector<std::string> general;
    std::size_t rejected = 0;
    while (general.size() < general_target) {
      std::string canon = admit(candidate(rng), 10, 48, 100);
      if (canon.empty()) {
        ++rejected;
        if (rejected > 40 * general_target)
          throw Error("grammar rejection rate out of control");
        continue;
      }
      if (seen.insert(canon).second) general.push_back(canon);
    }

    // Desk corpus: both families in one seeded shuffle so the actives are
    // spread through every training batch.
    std::vector<std::string> desk = general;
    desk.insert(desk.end(), actives.begin(), actives.end());
    std::vector<std::size_t> order(desk.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::string> shuffled(desk.size());
    for (std::size_t i = 0; i < order.size(); ++i) shuffled[i] = desk[order[i]];
    write_lines(path("desk_corpus.smi"), shuffled);

    std::vector<std::string> tiny(shuffled.begin(),
                                  shuffled.begin() + static_cast<long>(tiny_size));
    write_lines(path("tiny_corpus.smi"), tiny);

    std::vector<std::string> reference(actives.begin(),
                                       actives.begin() + static_cast<long>(labeled_actives));
    write_lines(path("actives_reference.smi"), reference);

    {
      CsvWriter csv(path("activity_labels.csv"), {"smiles", "label"});
      for (const std::string& s : reference) csv.row({s, "1"});
      std::size_t stride = general.size() / labeled_inactives;
      for (std::size_t i = 0; i < labeled_inactives; ++i)
        csv.row({general[i * stride], "0"});
    }

    std::cout << "general " << general.size() << ", actives " << actives.size()
              << " (" << labeled_actives << " labeled), desk "
              << shuffled.size() << ", tiny " << tiny.size() << ", rejected "
              << rejected << " -> " << out_dir << "\n";
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
