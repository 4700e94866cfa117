#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "molgen/error.hpp"

namespace molgen::chem {

class SmilesSyntaxError : public Error {
public:
  SmilesSyntaxError(std::size_t position, const std::string& reason)
      : Error("syntax error at " + std::to_string(position) + ": " + reason),
        position(position),
        reason(reason) {}
  std::size_t position;
  std::string reason;
};

class ValenceError : public Error {
public:
  explicit ValenceError(std::size_t atom)
      : Error("valence exceeded at atom " + std::to_string(atom)), atom(atom) {}
  std::size_t atom;
};

enum class BondOrder : int { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct Atom {
  std::string element;    // capitalized symbol, "C" .. "Br"
  bool aromatic = false;
  int charge = 0;
  int explicit_h = -1;    // bracket H count; -1 when the atom was written bare
  int hydrogens = 0;      // final H count (explicit or implicit)
  bool in_ring = false;
  std::size_t source_pos = 0;  // character offset in the source SMILES
};

struct Bond {
  std::size_t i = 0;
  std::size_t j = 0;
  BondOrder order = BondOrder::kSingle;
};

struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<std::vector<std::size_t>> rings;  // smallest cycle per ring-closure bond

  /// atom index -> list of (neighbor atom, bond index)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency() const;
};

/// Parses and validates a SMILES string. The returned graph is normalized:
/// aromatic bonds outside any ring are downgraded to single, 6-membered
/// all-C/N Kekule rings are rewritten in aromatic form, and hydrogen counts
/// are resolved. Stereo markers are rejected; strip them beforehand.
MolecularGraph parse(const std::string& smiles);

/// True when parse() succeeds.
bool is_valid(const std::string& smiles);

/// Removes stereochemistry annotations ('@', '/', '\').
std::string strip_stereo(const std::string& smiles);

/// Size of the smallest ring through each ring-closure bond, in source order.
std::vector<std::size_t> ring_sizes(const MolecularGraph& g);

/// Deterministic canonical serialization; permutation-invariant and
/// idempotent under parse() normalization.
std::string canonical_smiles(const MolecularGraph& g);

}  // namespace molgen::chem
