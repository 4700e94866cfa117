#include "molgen/fp/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>

namespace molgen::fp {

namespace {

constexpr std::uint64_t kFnvBasis = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/// FNV-1a over a stream of 64-bit words.
struct Hasher {
  std::uint64_t h = kFnvBasis;
  void feed(std::uint64_t x) { h = (h ^ x) * kFnvPrime; }
};

using Adjacency = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

std::uint64_t element_code(const std::string& el) {
  std::uint64_t code = 0;
  for (char c : el) code = code * 256 + static_cast<unsigned char>(c);
  return code;
}

int bond_code(chem::BondOrder o) { return static_cast<int>(o); }

bool has_double_bond_to(const chem::MolecularGraph& g, const Adjacency& adj,
                        std::size_t atom, const std::string& element) {
  for (const auto& [nb, bi] : adj[atom])
    if (g.bonds[bi].order == chem::BondOrder::kDouble &&
        g.atoms[nb].element == element)
      return true;
  return false;
}

std::uint64_t connectivity_invariant(const chem::MolecularGraph& g,
                                     const Adjacency& adj, std::size_t a) {
  const chem::Atom& atom = g.atoms[a];
  Hasher h;
  h.feed(element_code(atom.element));
  h.feed(adj[a].size());
  h.feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(atom.charge)));
  h.feed(static_cast<std::uint64_t>(atom.hydrogens));
  h.feed(atom.in_ring ? 1 : 0);
  return h.h;
}

std::uint64_t feature_invariant(const chem::MolecularGraph& g, const Adjacency& adj,
                                std::size_t a) {
  const chem::Atom& atom = g.atoms[a];
  const std::string& el = atom.element;
  bool n_or_o = el == "N" || el == "O";

  bool donor = n_or_o && atom.hydrogens >= 1;
  // Pyrrole-type aromatic N-H donates its lone pair into the ring.
  bool acceptor = n_or_o && atom.charge <= 0 &&
                  !(el == "N" && atom.aromatic && atom.hydrogens >= 1);
  bool halogen = el == "F" || el == "Cl" || el == "Br" || el == "I";

  bool basic_amine = el == "N" && !atom.aromatic && atom.charge == 0;
  if (basic_amine) {
    for (const auto& [nb, bi] : adj[a]) {
      if (g.bonds[bi].order != chem::BondOrder::kSingle) basic_amine = false;
      if (g.atoms[nb].element == "C" && has_double_bond_to(g, adj, nb, "O"))
        basic_amine = false;  // amide nitrogen
    }
  }
  bool pos_ionizable = atom.charge > 0 || basic_amine;

  bool acid_oxygen = false;
  if (el == "O" && (atom.charge < 0 || atom.hydrogens >= 1)) {
    for (const auto& [nb, bi] : adj[a]) {
      (void)bi;
      const std::string& nel = g.atoms[nb].element;
      if ((nel == "C" || nel == "S") && has_double_bond_to(g, adj, nb, "O"))
        acid_oxygen = true;
    }
  }
  bool neg_ionizable = (el == "O" && atom.charge < 0) || acid_oxygen;

  Hasher h;
  h.feed(donor ? 1 : 0);
  h.feed(acceptor ? 1 : 0);
  h.feed(atom.aromatic ? 1 : 0);
  h.feed(halogen ? 1 : 0);
  h.feed(pos_ionizable ? 1 : 0);
  h.feed(neg_ionizable ? 1 : 0);
  return h.h;
}

Fingerprint morgan(const chem::MolecularGraph& g, int diameter, std::size_t nbits,
                   Variant variant) {
  if (g.atoms.empty()) throw InvalidGraphError("no atoms");
  for (const auto& b : g.bonds)
    if (b.i >= g.atoms.size() || b.j >= g.atoms.size())
      throw InvalidGraphError("bond endpoint out of range");
  if (diameter < 0 || diameter % 2 != 0)
    throw InvalidGraphError("diameter must be even and nonnegative");
  if (nbits == 0 || (nbits & (nbits - 1)) != 0 || nbits % 64 != 0)
    throw InvalidGraphError("nbits must be a power of two and a multiple of 64");

  Adjacency adj = g.adjacency();
  std::size_t n = g.atoms.size();
  int radius = diameter / 2;

  std::vector<std::uint64_t> id(n);
  for (std::size_t a = 0; a < n; ++a)
    id[a] = variant == Variant::kConnectivity ? connectivity_invariant(g, adj, a)
                                              : feature_invariant(g, adj, a);

  // Round 0 folds every atom's initial identifier. From round 1 on, an
  // environment is keyed by the sorted set of bond indices it covers: a set
  // first reached in an earlier round shadows all later occurrences, and
  // within one round the smallest identifier survives.
  std::vector<std::uint64_t> folded(id.begin(), id.end());
  std::map<std::vector<std::size_t>, int> first_round;
  std::map<std::vector<std::size_t>, std::uint64_t> kept;
  first_round[{}] = 0;

  std::vector<std::vector<std::size_t>> env(n);  // per atom, sorted bond ids
  std::vector<std::uint64_t> next_id(n);
  std::vector<std::vector<std::size_t>> next_env(n);
  for (int round = 1; round <= radius; ++round) {
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<std::pair<int, std::uint64_t>> nb;
      for (const auto& [b, bi] : adj[a])
        nb.emplace_back(bond_code(g.bonds[bi].order), id[b]);
      std::sort(nb.begin(), nb.end());
      Hasher h;
      h.feed(static_cast<std::uint64_t>(round));
      h.feed(id[a]);
      for (const auto& [code, nid] : nb) {
        h.feed(static_cast<std::uint64_t>(code));
        h.feed(nid);
      }
      next_id[a] = h.h;

      std::vector<std::size_t> bonds = env[a];
      for (const auto& [b, bi] : adj[a]) {
        bonds.push_back(bi);
        bonds.insert(bonds.end(), env[b].begin(), env[b].end());
      }
      std::sort(bonds.begin(), bonds.end());
      bonds.erase(std::unique(bonds.begin(), bonds.end()), bonds.end());
      next_env[a] = std::move(bonds);
    }
    for (std::size_t a = 0; a < n; ++a) {
      const std::vector<std::size_t>& bonds = next_env[a];
      auto it = first_round.find(bonds);
      if (it == first_round.end()) {
        first_round.emplace(bonds, round);
        kept[bonds] = next_id[a];
      } else if (it->second == round) {
        kept[bonds] = std::min(kept[bonds], next_id[a]);
      }
    }
    id = next_id;
    env = next_env;
  }

  for (const auto& [bonds, value] : kept) {
    (void)bonds;
    folded.push_back(value);
  }

  Fingerprint f;
  f.nbits = nbits;
  f.diameter = diameter;
  f.variant = variant;
  f.words.assign(nbits / 64, 0);
  for (std::uint64_t v : folded) f.set(static_cast<std::size_t>(v % nbits));
  return f;
}

}  // namespace

std::size_t Fingerprint::popcount() const {
  std::size_t c = 0;
  for (std::uint64_t w : words) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::string Fingerprint::to_hex() const {
  std::string out;
  out.reserve(words.size() * 16);
  char buf[17];
  for (std::uint64_t w : words) {
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(w));
    out += buf;
  }
  return out;
}

Fingerprint ecfp(const chem::MolecularGraph& g, int diameter, std::size_t nbits) {
  return morgan(g, diameter, nbits, Variant::kConnectivity);
}

Fingerprint fcfp(const chem::MolecularGraph& g, int diameter, std::size_t nbits) {
  return morgan(g, diameter, nbits, Variant::kFeature);
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits != b.nbits || a.variant != b.variant) throw WidthMismatchError();
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    inter += static_cast<std::size_t>(std::popcount(a.words[w] & b.words[w]));
    uni += static_cast<std::size_t>(std::popcount(a.words[w] | b.words[w]));
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace molgen::fp
