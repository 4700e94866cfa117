#include "molgen/chem/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <set>

#include "chem_internal.hpp"

namespace molgen::chem {

namespace detail {

namespace {

const std::vector<int>* base_valences(const std::string& element) {
  static const std::map<std::string, std::vector<int>> table = {
      {"B", {3}},  {"C", {4}},  {"N", {3}},  {"O", {2}},  {"P", {3, 5}},
      {"S", {2, 4, 6}}, {"F", {1}}, {"Cl", {1}}, {"Br", {1}}, {"I", {1}},
  };
  auto it = table.find(element);
  return it == table.end() ? nullptr : &it->second;
}

}  // namespace

std::vector<int> allowed_valences(const std::string& element, int charge) {
  const auto* base = base_valences(element);
  if (!base) return {};
  std::vector<int> out;
  for (int v : *base) {
    // B and C lose a bonding slot per unit charge of either sign; the
    // lone-pair elements gain one per positive and lose one per negative.
    int adjusted = (element == "B" || element == "C") ? v - std::abs(charge)
                                                      : v + charge;
    if (adjusted >= 0) out.push_back(adjusted);
  }
  return out;
}

int sigma_plus_pi(const MolecularGraph& g, const Adjacency& adj, std::size_t idx,
                  int h_for_pi) {
  const Atom& atom = g.atoms[idx];
  int sigma = 0;
  bool exo_multiple = false;
  for (const auto& [nb, bi] : adj[idx]) {
    (void)nb;
    switch (g.bonds[bi].order) {
      case BondOrder::kSingle:
      case BondOrder::kAromatic: sigma += 1; break;
      case BondOrder::kDouble: sigma += 2; exo_multiple = true; break;
      case BondOrder::kTriple: sigma += 3; exo_multiple = true; break;
    }
  }
  int pi = 0;
  if (atom.aromatic) {
    const std::string& el = atom.element;
    if (el == "C" || el == "B") {
      pi = exo_multiple ? 0 : 1;
    } else if (el == "N" || el == "P") {
      bool pyridine_like = h_for_pi == 0 && adj[idx].size() == 2;
      pi = (atom.charge > 0 || pyridine_like) ? 1 : 0;
    }
  }
  return sigma + pi;
}

int bare_hydrogens(const MolecularGraph& g, const Adjacency& adj, std::size_t idx) {
  if (g.atoms[idx].charge != 0) return -1;
  int total = sigma_plus_pi(g, adj, idx, 0);
  for (int v : allowed_valences(g.atoms[idx].element, 0))
    if (v >= total) return v - total;
  return -1;
}

std::vector<bool> bond_is_bridge(const MolecularGraph& g) {
  Adjacency adj = g.adjacency();
  std::size_t n = g.atoms.size();
  std::vector<bool> bridge(g.bonds.size(), false);
  std::vector<int> disc(n, -1);
  std::vector<int> low(n, 0);
  int timer = 0;

  struct Dfs {
    const Adjacency& adj;
    std::vector<bool>& bridge;
    std::vector<int>& disc;
    std::vector<int>& low;
    int& timer;
    void run(std::size_t u, std::size_t parent_bond) {
      disc[u] = low[u] = timer++;
      for (const auto& [v, bi] : adj[u]) {
        if (bi == parent_bond) continue;
        if (disc[v] < 0) {
          run(v, bi);
          low[u] = std::min(low[u], low[v]);
          if (low[v] > disc[u]) bridge[bi] = true;
        } else {
          low[u] = std::min(low[u], disc[v]);
        }
      }
    }
  } dfs{adj, bridge, disc, low, timer};

  for (std::size_t u = 0; u < n; ++u)
    if (disc[u] < 0) dfs.run(u, static_cast<std::size_t>(-1));
  return bridge;
}

}  // namespace detail

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

bool is_aromatic_symbol(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

bool is_bare_single(char c) {
  return c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'P' || c == 'S' ||
         c == 'F' || c == 'I';
}

Atom parse_bare_atom(const std::string& s, std::size_t& i) {
  Atom a;
  a.source_pos = i;
  char c = s[i];
  if (c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') {
    a.element = "Cl";
    i += 2;
  } else if (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r') {
    a.element = "Br";
    i += 2;
  } else if (is_bare_single(c)) {
    a.element = std::string(1, c);
    i += 1;
  } else if (is_aromatic_symbol(c)) {
    a.element = std::string(1, static_cast<char>(std::toupper(c)));
    a.aromatic = true;
    i += 1;
  } else {
    throw SmilesSyntaxError(i, std::string("unexpected character '") + c + "'");
  }
  return a;
}

Atom parse_bracket_atom(const std::string& s, std::size_t& i) {
  std::size_t start = i;
  ++i;  // past '['
  Atom a;
  a.source_pos = start;
  a.explicit_h = 0;
  if (i >= s.size()) throw SmilesSyntaxError(start, "unterminated bracket atom");
  char c = s[i];
  if (std::isupper(static_cast<unsigned char>(c))) {
    std::string two;
    if (i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1])))
      two = s.substr(i, 2);
    if (two == "Cl" || two == "Br") {
      a.element = two;
      i += 2;
    } else if (is_bare_single(c)) {
      a.element = std::string(1, c);
      i += 1;
    } else {
      throw SmilesSyntaxError(start, "unsupported element in bracket atom");
    }
  } else if (is_aromatic_symbol(c)) {
    a.element = std::string(1, static_cast<char>(std::toupper(c)));
    a.aromatic = true;
    i += 1;
  } else {
    throw SmilesSyntaxError(start, "malformed bracket atom");
  }
  if (i < s.size() && s[i] == 'H') {
    ++i;
    int count = 1;
    if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      count = s[i] - '0';
      ++i;
    }
    a.explicit_h = count;
  }
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    char sign = s[i];
    ++i;
    int magnitude = 1;
    if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      magnitude = s[i] - '0';
      ++i;
    } else {
      while (i < s.size() && s[i] == sign) {
        ++magnitude;
        ++i;
      }
    }
    a.charge = sign == '+' ? magnitude : -magnitude;
  }
  if (i >= s.size() || s[i] != ']')
    throw SmilesSyntaxError(start, "malformed bracket atom");
  ++i;  // past ']'
  return a;
}

/// BFS shortest path between the endpoints of a closure bond, excluding the
/// bond itself. Every closure bond lies on a cycle by construction.
std::vector<std::size_t> smallest_cycle(const MolecularGraph& g,
                                        const detail::Adjacency& adj,
                                        std::size_t closure_bond) {
  std::size_t u = g.bonds[closure_bond].i;
  std::size_t v = g.bonds[closure_bond].j;
  std::vector<std::size_t> prev(g.atoms.size(), kNone);
  std::vector<bool> seen(g.atoms.size(), false);
  std::queue<std::size_t> q;
  q.push(u);
  seen[u] = true;
  while (!q.empty() && !seen[v]) {
    std::size_t a = q.front();
    q.pop();
    for (const auto& [b, bi] : adj[a]) {
      if (bi == closure_bond || seen[b]) continue;
      seen[b] = true;
      prev[b] = a;
      q.push(b);
    }
  }
  if (!seen[v]) throw Error("ring closure bond is not on a cycle");
  std::vector<std::size_t> cycle;
  for (std::size_t a = v; a != kNone; a = prev[a]) cycle.push_back(a);
  std::reverse(cycle.begin(), cycle.end());  // u .. v in path order
  return cycle;
}

/// Rewrites 6-membered all-C/N rings with alternating single/double bonds
/// into aromatic form so Kekule and aromatic spellings canonicalize alike.
void aromatize_kekule(MolecularGraph& g) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> bond_of;
  for (std::size_t bi = 0; bi < g.bonds.size(); ++bi)
    bond_of[std::minmax(g.bonds[bi].i, g.bonds[bi].j)] = bi;
  for (const auto& ring : g.rings) {
    if (ring.size() != 6) continue;
    bool eligible = true;
    for (std::size_t a : ring) {
      const Atom& at = g.atoms[a];
      if ((at.element != "C" && at.element != "N") || at.charge != 0) {
        eligible = false;
        break;
      }
    }
    if (!eligible) continue;
    std::vector<std::size_t> ring_bonds;
    for (std::size_t k = 0; k < 6; ++k) {
      auto it = bond_of.find(std::minmax(ring[k], ring[(k + 1) % 6]));
      if (it == bond_of.end()) {
        eligible = false;
        break;
      }
      ring_bonds.push_back(it->second);
    }
    if (!eligible) continue;
    bool any_kekule = false;
    bool matched = false;
    for (int parity = 0; parity < 2 && !matched; ++parity) {
      matched = true;
      for (std::size_t k = 0; k < 6; ++k) {
        BondOrder o = g.bonds[ring_bonds[k]].order;
        if (o == BondOrder::kAromatic) continue;
        BondOrder want = (k % 2 == static_cast<std::size_t>(parity))
                             ? BondOrder::kDouble
                             : BondOrder::kSingle;
        if (o != want) {
          matched = false;
          break;
        }
        any_kekule = true;
      }
    }
    if (!matched || !any_kekule) continue;
    for (std::size_t a : ring) g.atoms[a].aromatic = true;
    for (std::size_t bi : ring_bonds) g.bonds[bi].order = BondOrder::kAromatic;
  }
}

void validate_valences(MolecularGraph& g) {
  detail::Adjacency adj = g.adjacency();
  for (std::size_t idx = 0; idx < g.atoms.size(); ++idx) {
    Atom& atom = g.atoms[idx];
    int h_for_pi = atom.explicit_h >= 0 ? atom.explicit_h : 0;
    int total = detail::sigma_plus_pi(g, adj, idx, h_for_pi);
    std::vector<int> allowed = detail::allowed_valences(atom.element, atom.charge);
    if (allowed.empty()) throw ValenceError(idx);
    if (atom.explicit_h >= 0) {
      if (total + atom.explicit_h > allowed.back()) throw ValenceError(idx);
      atom.hydrogens = atom.explicit_h;
    } else {
      int h = -1;
      for (int v : allowed) {
        if (v >= total) {
          h = v - total;
          break;
        }
      }
      if (h < 0) throw ValenceError(idx);
      atom.hydrogens = h;
    }
  }
}

}  // namespace

detail::Adjacency MolecularGraph::adjacency() const {
  detail::Adjacency adj(atoms.size());
  for (std::size_t bi = 0; bi < bonds.size(); ++bi) {
    adj[bonds[bi].i].emplace_back(bonds[bi].j, bi);
    adj[bonds[bi].j].emplace_back(bonds[bi].i, bi);
  }
  return adj;
}

MolecularGraph parse(const std::string& smiles) {
  if (smiles.empty()) throw SmilesSyntaxError(0, "empty input");
  MolecularGraph g;
  std::vector<std::size_t> branch_atoms;
  std::vector<std::size_t> branch_pos;
  std::vector<std::size_t> branch_atom_count;
  std::size_t prev = kNone;
  int pending = 0;  // 0 none, 1..3 order, 4 aromatic
  std::size_t pending_pos = 0;
  struct OpenRing {
    std::size_t atom;
    int bond;
    std::size_t pos;
  };
  std::map<int, OpenRing> open_rings;
  std::vector<std::size_t> closure_bonds;
  std::set<std::pair<std::size_t, std::size_t>> seen_bonds;

  auto add_bond = [&](std::size_t a, std::size_t b, int order_code,
                      std::size_t pos) -> std::size_t {
    if (a == b) throw SmilesSyntaxError(pos, "ring closure to the same atom");
    if (!seen_bonds.insert(std::minmax(a, b)).second)
      throw SmilesSyntaxError(pos, "duplicate bond");
    BondOrder order;
    if (order_code == 0)
      order = (g.atoms[a].aromatic && g.atoms[b].aromatic) ? BondOrder::kAromatic
                                                           : BondOrder::kSingle;
    else
      order = static_cast<BondOrder>(order_code);
    g.bonds.push_back({a, b, order});
    return g.bonds.size() - 1;
  };

  std::size_t i = 0;
  while (i < smiles.size()) {
    char c = smiles[i];
    if (c == '(') {
      if (prev == kNone) throw SmilesSyntaxError(i, "branch before any atom");
      if (pending) throw SmilesSyntaxError(pending_pos, "dangling bond");
      branch_atoms.push_back(prev);
      branch_pos.push_back(i);
      branch_atom_count.push_back(g.atoms.size());
      ++i;
    } else if (c == ')') {
      if (pending) throw SmilesSyntaxError(pending_pos, "dangling bond");
      if (branch_atoms.empty()) throw SmilesSyntaxError(i, "unmatched ')'");
      if (g.atoms.size() == branch_atom_count.back())
        throw SmilesSyntaxError(i, "empty branch");
      prev = branch_atoms.back();
      branch_atoms.pop_back();
      branch_pos.pop_back();
      branch_atom_count.pop_back();
      ++i;
    } else if (c == '-' || c == '=' || c == '#' || c == ':') {
      if (prev == kNone) throw SmilesSyntaxError(i, "bond before any atom");
      if (pending) throw SmilesSyntaxError(i, "two bond symbols in a row");
      pending = c == '-' ? 1 : c == '=' ? 2 : c == '#' ? 3 : 4;
      pending_pos = i;
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
      std::size_t pos = i;
      int key;
      if (c == '%') {
        if (i + 2 >= smiles.size() ||
            !std::isdigit(static_cast<unsigned char>(smiles[i + 1])) ||
            !std::isdigit(static_cast<unsigned char>(smiles[i + 2])))
          throw SmilesSyntaxError(i, "malformed %NN ring closure");
        key = (smiles[i + 1] - '0') * 10 + (smiles[i + 2] - '0');
        i += 3;
      } else {
        key = c - '0';
        i += 1;
      }
      if (prev == kNone)
        throw SmilesSyntaxError(pos, "ring closure before any atom");
      auto it = open_rings.find(key);
      if (it == open_rings.end()) {
        open_rings[key] = {prev, pending, pos};
      } else {
        OpenRing open = it->second;
        open_rings.erase(it);
        if (open.bond && pending && open.bond != pending)
          throw SmilesSyntaxError(pos, "conflicting ring bond orders");
        int order_code = open.bond ? open.bond : pending;
        closure_bonds.push_back(add_bond(open.atom, prev, order_code, pos));
      }
      pending = 0;
    } else if (c == '@' || c == '/' || c == '\\') {
      throw SmilesSyntaxError(i, "stereochemistry not supported");
    } else {
      std::size_t pos = i;
      Atom atom = c == '[' ? parse_bracket_atom(smiles, i) : parse_bare_atom(smiles, i);
      g.atoms.push_back(atom);
      std::size_t idx = g.atoms.size() - 1;
      if (prev != kNone) add_bond(prev, idx, pending, pos);
      prev = idx;
      pending = 0;
    }
  }
  if (pending) throw SmilesSyntaxError(pending_pos, "dangling bond");
  if (!branch_atoms.empty())
    throw SmilesSyntaxError(branch_pos.back(), "unclosed branch");
  if (!open_rings.empty())
    throw SmilesSyntaxError(open_rings.begin()->second.pos, "unpaired ring digit");

  detail::Adjacency adj = g.adjacency();
  for (std::size_t cb : closure_bonds) g.rings.push_back(smallest_cycle(g, adj, cb));

  std::vector<bool> bridge = detail::bond_is_bridge(g);
  for (std::size_t bi = 0; bi < g.bonds.size(); ++bi) {
    if (bridge[bi]) {
      // An aromatic-by-default bond joining two ring systems is a plain
      // single bond (biphenyl written without the explicit '-').
      if (g.bonds[bi].order == BondOrder::kAromatic)
        g.bonds[bi].order = BondOrder::kSingle;
    } else {
      g.atoms[g.bonds[bi].i].in_ring = true;
      g.atoms[g.bonds[bi].j].in_ring = true;
    }
  }

  aromatize_kekule(g);

  for (const Atom& atom : g.atoms)
    if (atom.aromatic && !atom.in_ring)
      throw SmilesSyntaxError(atom.source_pos, "aromatic atom outside ring");

  validate_valences(g);
  return g;
}

bool is_valid(const std::string& smiles) {
  try {
    parse(smiles);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string strip_stereo(const std::string& smiles) {
  std::string out;
  out.reserve(smiles.size());
  for (char c : smiles)
    if (c != '@' && c != '/' && c != '\\') out += c;
  return out;
}

std::vector<std::size_t> ring_sizes(const MolecularGraph& g) {
  std::vector<std::size_t> sizes;
  sizes.reserve(g.rings.size());
  for (const auto& ring : g.rings) sizes.push_back(ring.size());
  return sizes;
}

}  // namespace molgen::chem
