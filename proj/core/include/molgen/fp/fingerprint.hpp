#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molgen/chem/smiles.hpp"
#include "molgen/error.hpp"

namespace molgen::fp {

class WidthMismatchError : public Error {
public:
  WidthMismatchError() : Error("fingerprint width or variant mismatch") {}
};

class InvalidGraphError : public Error {
public:
  explicit InvalidGraphError(const std::string& why) : Error("invalid graph: " + why) {}
};

enum class Variant { kConnectivity, kFeature };

struct Fingerprint {
  std::vector<std::uint64_t> words;
  std::size_t nbits = 0;
  int diameter = 0;
  Variant variant = Variant::kConnectivity;

  void set(std::size_t bit) { words[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  bool test(std::size_t bit) const {
    return (words[bit / 64] >> (bit % 64)) & 1u;
  }
  std::size_t popcount() const;

  /// Lowercase hex, word 0 first, 16 digits per 64-bit word.
  std::string to_hex() const;
};

/// Extended-connectivity fingerprint. Initial atom invariant is
/// (element, degree, charge, H count, in-ring flag); each round hashes
/// (round, own id, sorted (bond order, neighbor id) pairs) and folds kept
/// identifiers modulo nbits. Environments whose bond set duplicates one
/// from an earlier round are dropped; within a round the smallest
/// identifier wins.
Fingerprint ecfp(const chem::MolecularGraph& g, int diameter = 6,
                 std::size_t nbits = 2048);

/// Feature-class variant: the initial invariant is the pharmacophore
/// feature vector (donor, acceptor, aromatic, halogen, positively
/// ionizable, negatively ionizable).
Fingerprint fcfp(const chem::MolecularGraph& g, int diameter = 4,
                 std::size_t nbits = 2048);

/// |a AND b| / |a OR b|; 1.0 when both fingerprints are empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace molgen::fp
