#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "molgen/chem/smiles.hpp"

namespace molgen::chem::detail {

using Adjacency = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

/// Valences an element may carry at a given formal charge, ascending.
/// Empty when the combination is not in the table.
std::vector<int> allowed_valences(const std::string& element, int charge);

/// Bond-order sum seen by the valence check. Aromatic bonds count 1 sigma;
/// ring-bond pi electrons are added per atom: aromatic C/B contribute 1
/// unless an exocyclic double or triple bond is present, aromatic N/P
/// contribute 1 when positively charged or bare of hydrogens with exactly
/// two neighbors, aromatic O/S contribute 0.
int sigma_plus_pi(const MolecularGraph& g, const Adjacency& adj, std::size_t idx,
                  int h_for_pi);

/// Hydrogen count the parser would infer for atom idx written bare
/// (uncharged). Returns -1 when no tabulated valence fits; the emitter then
/// falls back to bracket notation.
int bare_hydrogens(const MolecularGraph& g, const Adjacency& adj, std::size_t idx);

std::vector<bool> bond_is_bridge(const MolecularGraph& g);

}  // namespace molgen::chem::detail
