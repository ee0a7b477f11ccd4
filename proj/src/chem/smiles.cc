//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/chem/smiles.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "drp/common/error.h"

namespace drp::chem {
namespace {

bool IsAromaticOrganic(std::string_view element) {
  return element == "B" || element == "C" || element == "N" || element == "O" ||
         element == "P" || element == "S";
}

bool IsAromaticBracket(std::string_view element) {
  return IsAromaticOrganic(element) || element == "Se" || element == "As" ||
         element == "Te";
}

std::string Capitalize(std::string_view lower) {
  std::string s(lower);
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  MolecularGraph Run() {
    if (s_.empty()) throw ParseError("empty SMILES", 0);
    while (pos_ < s_.size()) Step();
    if (pending_) throw ParseError("bond symbol without a following atom", pending_->offset);
    if (!branches_.empty()) throw ParseError("unbalanced '('", branches_.back().offset);
    if (!rings_.empty()) {
      throw ParseError("unmatched ring closure " + std::to_string(rings_.begin()->first),
                       rings_.begin()->second.offset);
    }
    if (g_.num_atoms() == 0) throw ParseError("no atoms", 0);
    Finish();
    return std::move(g_);
  }

 private:
  struct PendingBond {
    BondOrder order;
    bool aromatic_symbol;
    std::size_t offset;
  };
  struct OpenRing {
    int atom;
    std::optional<PendingBond> bond;
    std::size_t offset;
  };
  struct Branch {
    int atom;
    std::size_t offset;
  };
  struct BondInfo {
    bool implicit;
    bool aromatic_symbol;
    std::size_t offset;
  };

  char Peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }

  void Step() {
    const char c = s_[pos_];
    switch (c) {
      case '(': {
        if (prev_ < 0) throw ParseError("branch without a preceding atom", pos_);
        if (pending_) throw ParseError("bond symbol before '('", pending_->offset);
        if (Peek(1) == ')') throw ParseError("empty branch", pos_);
        branches_.push_back({prev_, pos_});
        ++pos_;
        return;
      }
      case ')': {
        if (branches_.empty()) throw ParseError("unbalanced ')'", pos_);
        if (pending_) throw ParseError("bond symbol without a following atom", pending_->offset);
        prev_ = branches_.back().atom;
        branches_.pop_back();
        ++pos_;
        return;
      }
      case '-': case '=': case '#': case ':': case '/': case '\\': {
        if (prev_ < 0) throw ParseError("bond symbol without a preceding atom", pos_);
        if (pending_) throw ParseError("consecutive bond symbols", pos_);
        BondOrder order = BondOrder::kSingle;
        if (c == '=') order = BondOrder::kDouble;
        if (c == '#') order = BondOrder::kTriple;
        if (c == ':') order = BondOrder::kAromatic;
        pending_ = PendingBond{order, c == ':', pos_};
        ++pos_;
        return;
      }
      case '.':
        throw ParseError("multi-fragment SMILES ('.') is not supported", pos_);
      case '[':
        AddAtom(ParseBracket());
        return;
      case '%': {
        const std::size_t start = pos_;
        if (!std::isdigit(static_cast<unsigned char>(Peek(1))) ||
            !std::isdigit(static_cast<unsigned char>(Peek(2)))) {
          throw ParseError("'%' must be followed by two digits", pos_);
        }
        const int number = (Peek(1) - '0') * 10 + (Peek(2) - '0');
        pos_ += 3;
        RingBond(number, start);
        return;
      }
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_++;
      RingBond(c - '0', start);
      return;
    }
    AddAtom(ParseOrganic());
  }

  Atom ParseOrganic() {
    const char c = s_[pos_];
    Atom atom;
    if (c == 'C' && Peek(1) == 'l') {
      atom.element = "Cl";
      pos_ += 2;
    } else if (c == 'B' && Peek(1) == 'r') {
      atom.element = "Br";
      pos_ += 2;
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      atom.element = std::string(1, c);
      ++pos_;
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      atom.element = Capitalize(std::string_view(&s_[pos_], 1));
      atom.aromatic = true;
      ++pos_;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
      throw ParseError(std::string("unknown element '") + c + "'", pos_);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
    atom.atomic_number = AtomicNumber(atom.element);
    bracket_.push_back(false);
    return atom;
  }

  Atom ParseBracket() {
    const std::size_t open = pos_;
    const std::size_t close = s_.find(']', pos_);
    if (close == std::string_view::npos) throw ParseError("unterminated bracket atom", open);
    ++pos_;
    if (std::isdigit(static_cast<unsigned char>(Peek()))) {
      throw ParseError("isotopes are not supported", pos_);
    }
    Atom atom;
    const char c = Peek();
    if (std::isupper(static_cast<unsigned char>(c))) {
      const char d = Peek(1);
      std::string two = std::string(1, c) + d;
      if (std::islower(static_cast<unsigned char>(d)) && AtomicNumber(two) > 0) {
        atom.element = two;
        pos_ += 2;
      } else if (AtomicNumber(std::string(1, c)) > 0) {
        atom.element = std::string(1, c);
        ++pos_;
      } else {
        throw ParseError(std::string("unknown element '") + c + "'", pos_);
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      const std::string_view rest = s_.substr(pos_, close - pos_);
      if (rest.starts_with("se") || rest.starts_with("as") || rest.starts_with("te")) {
        atom.element = Capitalize(rest.substr(0, 2));
        pos_ += 2;
      } else if (IsAromaticOrganic(Capitalize(rest.substr(0, 1)))) {
        atom.element = Capitalize(rest.substr(0, 1));
        ++pos_;
      } else {
        throw ParseError(std::string("unknown aromatic element '") + c + "'", pos_);
      }
      atom.aromatic = true;
    } else {
      throw ParseError("expected element symbol in bracket atom", pos_);
    }
    atom.atomic_number = AtomicNumber(atom.element);
    // Chirality marks carry no graph information.
    while (Peek() == '@') ++pos_;
    if (Peek() != 'H' || atom.element == "H") {
      // '@TH1', '@SP2', ... class names.
      while (pos_ < close && std::isupper(static_cast<unsigned char>(Peek())) && Peek() != 'H') ++pos_;
      while (pos_ < close && std::isdigit(static_cast<unsigned char>(Peek()))) ++pos_;
    }
    if (Peek() == 'H') {
      ++pos_;
      atom.hydrogens = 1;
      if (std::isdigit(static_cast<unsigned char>(Peek()))) {
        atom.hydrogens = Peek() - '0';
        ++pos_;
      }
    }
    if (Peek() == '+' || Peek() == '-') {
      const char sign_char = Peek();
      const int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(Peek()))) {
        magnitude = Peek() - '0';
        ++pos_;
      } else {
        while (Peek() == sign_char) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = sign * magnitude;
    }
    if (Peek() == ':') {
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(Peek()))) {
        throw ParseError("atom class without digits", pos_);
      }
      while (std::isdigit(static_cast<unsigned char>(Peek()))) ++pos_;
    }
    if (pos_ != close) {
      throw ParseError(std::string("unexpected character '") + Peek() + "' in bracket atom", pos_);
    }
    if (atom.aromatic && !IsAromaticBracket(atom.element)) {
      throw ParseError("element cannot be aromatic", open + 1);
    }
    pos_ = close + 1;
    bracket_.push_back(true);
    return atom;
  }

  void Connect(int a, int b, const std::optional<PendingBond> &bond, std::size_t offset) {
    BondOrder order;
    BondInfo info{};
    if (bond) {
      order = bond->order;
      info = BondInfo{false, bond->aromatic_symbol, bond->offset};
    } else {
      const bool both = g_.atom(a).aromatic && g_.atom(b).aromatic;
      order = both ? BondOrder::kAromatic : BondOrder::kSingle;
      info = BondInfo{true, false, offset};
    }
    if (g_.FindBond(a, b) >= 0) throw ParseError("duplicate bond between the same atoms", offset);
    g_.AddBond(a, b, order);
    bond_info_.push_back(info);
  }

  void AddAtom(Atom atom) {
    const std::size_t offset = pos_;
    const int id = g_.AddAtom(std::move(atom));
    if (prev_ >= 0) Connect(prev_, id, pending_, offset);
    pending_.reset();
    prev_ = id;
  }

  void RingBond(int number, std::size_t offset) {
    if (prev_ < 0) throw ParseError("ring closure without a preceding atom", offset);
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing{prev_, pending_, offset});
      pending_.reset();
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) throw ParseError("ring closure to the same atom", offset);
    std::optional<PendingBond> bond = pending_ ? pending_ : open.bond;
    if (pending_ && open.bond && pending_->order != open.bond->order) {
      throw ParseError("conflicting ring closure bond orders", offset);
    }
    Connect(open.atom, prev_, bond, offset);
    pending_.reset();
  }

  void Finish() {
    for (std::size_t b = 0; b < g_.num_bonds(); ++b) {
      const Bond &bond = g_.bond(static_cast<int>(b));
      if (bond.order == BondOrder::kAromatic &&
          (!g_.atom(bond.u).aromatic || !g_.atom(bond.v).aromatic)) {
        throw ParseError("aromatic bond between non-aromatic atoms", bond_info_[b].offset);
      }
    }
    const std::vector<bool> bridge = BridgeBonds(g_);
    for (std::size_t b = 0; b < g_.num_bonds(); ++b) {
      if (bridge[b] && bond_info_[b].implicit &&
          g_.bond(static_cast<int>(b)).order == BondOrder::kAromatic) {
        g_.set_bond_order(static_cast<int>(b), BondOrder::kSingle);
      }
    }
    for (std::size_t i = 0; i < g_.num_atoms(); ++i) {
      if (!bracket_[i]) {
        g_.mutable_atom(static_cast<int>(i)).hydrogens =
            DefaultImplicitHydrogens(g_, static_cast<int>(i));
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MolecularGraph g_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<Branch> branches_;
  std::map<int, OpenRing> rings_;
  std::vector<bool> bracket_;
  std::vector<BondInfo> bond_info_;
};

std::string AtomToken(const MolecularGraph &g, int i, const WriteOptions &options) {
  const Atom &a = g.atom(i);
  const bool organic = a.aromatic ? IsAromaticOrganic(a.element) : IsOrganicSubset(a.element);
  bool bracket = a.charge != 0 || !organic;
  if (options.hydrogens && !bracket && a.hydrogens != DefaultImplicitHydrogens(g, i)) {
    bracket = true;
  }
  std::string symbol = a.element;
  if (a.aromatic) {
    for (char &ch : symbol) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (!bracket) return symbol;
  std::string out = "[" + symbol;
  if (options.hydrogens && a.hydrogens > 0) {
    out += 'H';
    if (a.hydrogens > 1) out += std::to_string(a.hydrogens);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  out += ']';
  return out;
}

std::string BondToken(const MolecularGraph &g, int b, const std::vector<bool> &bridge) {
  const Bond &bond = g.bond(b);
  const bool both_aromatic = g.atom(bond.u).aromatic && g.atom(bond.v).aromatic;
  switch (bond.order) {
    case BondOrder::kSingle: return both_aromatic ? "-" : "";
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return (both_aromatic && !bridge[b]) ? "" : ":";
  }
  return "";
}

std::string RingLabel(int digit) {
  if (digit < 10) return std::string(1, static_cast<char>('0' + digit));
  return "%" + std::to_string(digit);
}

}  // namespace

MolecularGraph ParseSmiles(std::string_view smiles) { return Parser(smiles).Run(); }

std::string WriteSmiles(const MolecularGraph &g, std::span<const int> rank,
                        WriteOptions options) {
  const int n = static_cast<int>(g.num_atoms());
  std::vector<int> order_rank(n);
  if (rank.empty()) {
    std::iota(order_rank.begin(), order_rank.end(), 0);
  } else {
    order_rank.assign(rank.begin(), rank.end());
  }
  const std::vector<bool> bridge = BridgeBonds(g);
  auto sorted_neighbors = [&](int u) {
    std::vector<Neighbor> nbs = g.neighbors(u);
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor &x, const Neighbor &y) {
      return order_rank[x.atom] < order_rank[y.atom];
    });
    return nbs;
  };

  // Pass 1: spanning forest and ring-closure bonds.
  enum State { kNew, kOpen, kDone };
  std::vector<State> state(n, kNew);
  std::vector<std::vector<Neighbor>> children(n);
  std::vector<std::vector<Neighbor>> closures(n);
  std::vector<bool> closure_bond(g.num_bonds(), false);
  std::function<void(int, int)> visit = [&](int u, int parent_bond) {
    state[u] = kOpen;
    for (const Neighbor &nb : sorted_neighbors(u)) {
      if (nb.bond == parent_bond) continue;
      if (state[nb.atom] == kNew) {
        children[u].push_back(nb);
        visit(nb.atom, nb.bond);
      } else if (!closure_bond[nb.bond]) {
        closure_bond[nb.bond] = true;
        closures[u].push_back(nb);
        closures[nb.atom].push_back(Neighbor{u, nb.bond});
      }
    }
    state[u] = kDone;
  };
  std::vector<int> atoms_by_rank(n);
  std::iota(atoms_by_rank.begin(), atoms_by_rank.end(), 0);
  std::sort(atoms_by_rank.begin(), atoms_by_rank.end(),
            [&](int x, int y) { return order_rank[x] < order_rank[y]; });
  std::vector<int> roots;
  for (int a : atoms_by_rank) {
    if (state[a] == kNew) {
      roots.push_back(a);
      visit(a, -1);
    }
  }

  // Pass 2: emit tokens with ring digits allocated lowest-first.
  std::string out;
  std::vector<bool> emitted(n, false);
  std::set<int> free_digits;
  for (int d = 1; d < 100; ++d) free_digits.insert(d);
  std::map<int, int> digit_of_bond;
  std::function<void(int)> emit = [&](int u) {
    emitted[u] = true;
    out += AtomToken(g, u, options);
    std::vector<Neighbor> ring = closures[u];
    std::sort(ring.begin(), ring.end(), [&](const Neighbor &x, const Neighbor &y) {
      const bool cx = emitted[x.atom], cy = emitted[y.atom];
      if (cx != cy) return cx;  // closings first
      if (cx) return digit_of_bond[x.bond] < digit_of_bond[y.bond];
      return order_rank[x.atom] < order_rank[y.atom];
    });
    std::vector<int> released;
    for (const Neighbor &nb : ring) {
      if (emitted[nb.atom]) {
        const int digit = digit_of_bond[nb.bond];
        out += RingLabel(digit);
        released.push_back(digit);
      } else {
        const int digit = *free_digits.begin();
        free_digits.erase(free_digits.begin());
        digit_of_bond[nb.bond] = digit;
        out += BondToken(g, nb.bond, bridge) + RingLabel(digit);
      }
    }
    free_digits.insert(released.begin(), released.end());
    for (std::size_t i = 0; i < children[u].size(); ++i) {
      const Neighbor &nb = children[u][i];
      const bool last = i + 1 == children[u].size();
      if (!last) out += '(';
      out += BondToken(g, nb.bond, bridge);
      emit(nb.atom);
      if (!last) out += ')';
    }
  };
  for (std::size_t r = 0; r < roots.size(); ++r) {
    if (r > 0) out += '.';
    emit(roots[r]);
  }
  return out;
}

}  // namespace drp::chem
