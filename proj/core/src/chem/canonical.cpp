#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "chem_internal.hpp"
#include "molgen/chem/smiles.hpp"

namespace molgen::chem {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

/// Iterative Morgan refinement. Initial invariant: (element, degree, charge,
/// H count, aromatic flag); refined by sorted (bond order, neighbor rank)
/// lists until stable, then single tied atoms are split off by smallest
/// original index and refinement repeats until all ranks are distinct.
std::vector<std::size_t> morgan_ranks(const MolecularGraph& g,
                                      const detail::Adjacency& adj) {
  std::size_t n = g.atoms.size();
  std::vector<std::size_t> rank(n, 0);

  auto assign = [&](const std::vector<std::vector<long long>>& keys) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
    });
    std::size_t distinct = 1;
    rank[order[0]] = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (keys[order[k]] != keys[order[k - 1]]) ++distinct;
      rank[order[k]] = distinct - 1;
    }
    return distinct;
  };

  std::vector<std::vector<long long>> keys(n);
  for (std::size_t a = 0; a < n; ++a) {
    const Atom& atom = g.atoms[a];
    long long element_code = atom.element[0] * 256 +
                             (atom.element.size() > 1 ? atom.element[1] : 0);
    keys[a] = {element_code, static_cast<long long>(adj[a].size()), atom.charge,
               atom.hydrogens, atom.aromatic ? 1 : 0};
  }
  std::size_t distinct = assign(keys);

  auto refine = [&]() {
    for (;;) {
      for (std::size_t a = 0; a < n; ++a) {
        std::vector<std::pair<long long, long long>> nb;
        for (const auto& [b, bi] : adj[a])
          nb.emplace_back(static_cast<long long>(g.bonds[bi].order),
                          static_cast<long long>(rank[b]));
        std::sort(nb.begin(), nb.end());
        keys[a] = {static_cast<long long>(rank[a])};
        for (const auto& [o, r] : nb) {
          keys[a].push_back(o);
          keys[a].push_back(r);
        }
      }
      std::size_t next = assign(keys);
      if (next == distinct) break;
      distinct = next;
    }
  };

  refine();
  while (distinct < n) {
    // Split the lowest still-tied class at its smallest original index.
    std::vector<std::size_t> count(distinct, 0);
    for (std::size_t a = 0; a < n; ++a) ++count[rank[a]];
    std::size_t tied_rank = 0;
    while (count[tied_rank] < 2) ++tied_rank;
    std::size_t chosen = kNone;
    for (std::size_t a = 0; a < n && chosen == kNone; ++a)
      if (rank[a] == tied_rank) chosen = a;
    for (std::size_t a = 0; a < n; ++a)
      keys[a] = {static_cast<long long>(rank[a]), a == chosen ? 0LL : 1LL};
    distinct = assign(keys);
    refine();
  }
  return rank;
}

std::string bond_prefix(BondOrder order, const Atom& a, const Atom& b) {
  switch (order) {
    case BondOrder::kSingle:
      // Between two aromatic atoms the bare default is aromatic, so a true
      // single bond must be spelled out.
      return (a.aromatic && b.aromatic) ? "-" : "";
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return "";
  }
  return "";
}

std::string atom_text(const MolecularGraph& g, const detail::Adjacency& adj,
                      std::size_t idx) {
  const Atom& atom = g.atoms[idx];
  std::string symbol = atom.element;
  if (atom.aromatic)
    for (char& c : symbol) c = static_cast<char>(std::tolower(c));
  bool bracket = atom.charge != 0 ||
                 detail::bare_hydrogens(g, adj, idx) != atom.hydrogens;
  if (!bracket) return symbol;
  std::string out = "[" + symbol;
  if (atom.hydrogens > 0) {
    out += 'H';
    if (atom.hydrogens > 1) out += std::to_string(atom.hydrogens);
  }
  if (atom.charge != 0) {
    out += atom.charge > 0 ? '+' : '-';
    if (std::abs(atom.charge) > 1) out += std::to_string(std::abs(atom.charge));
  }
  return out + "]";
}

struct RingToken {
  int digit;
  std::size_t bond;
  bool opens;
};

std::string digit_text(int d) {
  return d < 10 ? std::string(1, static_cast<char>('0' + d)) : "%" + std::to_string(d);
}

}  // namespace

std::string canonical_smiles(const MolecularGraph& g) {
  if (g.atoms.empty()) throw Error("cannot serialize an empty graph");
  std::size_t n = g.atoms.size();
  detail::Adjacency adj = g.adjacency();
  std::vector<std::size_t> rank = morgan_ranks(g, adj);

  // Sort each adjacency row by neighbor rank so traversal order is canonical.
  for (auto& row : adj)
    std::sort(row.begin(), row.end(),
              [&](const auto& x, const auto& y) { return rank[x.first] < rank[y.first]; });

  std::size_t root = 0;
  for (std::size_t a = 0; a < n; ++a)
    if (rank[a] < rank[root]) root = a;

  // Pass 1: DFS tree in rank order; back edges become ring closures.
  std::vector<std::size_t> preorder;
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> back_open(n),
      back_close(n);  // (bond, other atom)
  std::vector<bool> visited(n, false);
  std::vector<bool> bond_used(g.bonds.size(), false);

  struct Walk {
    const detail::Adjacency& adj;
    std::vector<std::size_t>& preorder;
    std::vector<std::vector<std::size_t>>& children;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& back_open;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& back_close;
    std::vector<bool>& visited;
    std::vector<bool>& bond_used;
    void run(std::size_t u) {
      visited[u] = true;
      preorder.push_back(u);
      for (const auto& [v, bi] : adj[u]) {
        if (bond_used[bi]) continue;
        bond_used[bi] = true;
        if (!visited[v]) {
          children[u].push_back(v);
          run(v);
        } else {
          // v is an ancestor: the digit opens there and closes at u.
          back_open[v].emplace_back(bi, u);
          back_close[u].emplace_back(bi, v);
        }
      }
    }
  } walk{adj, preorder, children, back_open, back_close, visited, bond_used};
  walk.run(root);
  if (preorder.size() != n) throw Error("cannot serialize a disconnected graph");

  // Pass 2: digit assignment in emission order; digits are recycled after use.
  std::vector<std::vector<RingToken>> ring_tokens(n);
  std::map<std::size_t, int> digit_of_bond;
  std::set<int> in_use;
  auto alloc_digit = [&]() {
    for (int d = 1; d < 100; ++d)
      if (!in_use.count(d)) {
        in_use.insert(d);
        return d;
      }
    throw Error("more than 99 simultaneously open ring closures");
  };
  for (std::size_t u : preorder) {
    for (const auto& [bi, other] : back_close[u]) {
      (void)other;
      int d = digit_of_bond.at(bi);
      ring_tokens[u].push_back({d, bi, false});
      in_use.erase(d);
    }
    std::sort(ring_tokens[u].begin(), ring_tokens[u].end(),
              [](const RingToken& x, const RingToken& y) { return x.digit < y.digit; });
    for (const auto& [bi, other] : back_open[u]) {
      (void)other;
      int d = alloc_digit();
      digit_of_bond[bi] = d;
      ring_tokens[u].push_back({d, bi, true});
    }
  }

  struct Emit {
    const MolecularGraph& g;
    const detail::Adjacency& adj;
    const std::vector<std::vector<std::size_t>>& children;
    const std::vector<std::vector<RingToken>>& ring_tokens;
    std::string run(std::size_t u) {
      std::string s = atom_text(g, adj, u);
      for (const RingToken& t : ring_tokens[u]) {
        const Bond& b = g.bonds[t.bond];
        // The bond symbol is written once, on the opening side.
        if (t.opens) s += bond_prefix(b.order, g.atoms[b.i], g.atoms[b.j]);
        s += digit_text(t.digit);
      }
      for (std::size_t k = 0; k < children[u].size(); ++k) {
        std::size_t v = children[u][k];
        std::size_t bi = kNone;
        for (const auto& [nb, b] : adj[u]) {
          if (nb == v) {
            bi = b;
            break;
          }
        }
        std::string part = bond_prefix(g.bonds[bi].order, g.atoms[u], g.atoms[v]) + run(v);
        if (k + 1 < children[u].size())
          s += "(" + part + ")";
        else
          s += part;
      }
      return s;
    }
  } emit{g, adj, children, ring_tokens};

  return emit.run(root);
}

}  // namespace molgen::chem
