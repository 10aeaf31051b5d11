#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopgas {

struct GroupTable {
  int order = 0;
  std::vector<int> mult;  // row-major order x order
  std::vector<int> inverse;
  int identity = 0;
  std::string name;

  int op(int a, int b) const { return mult[a * order + b]; }

  void validate() const {
    if (int(mult.size()) != order * order) throw std::invalid_argument(name + ": bad table size");
    for (int a = 0; a < order; ++a)
      for (int b = 0; b < order; ++b) {
        int ab = op(a, b);
        if (ab < 0 || ab >= order) throw std::invalid_argument(name + ": entry out of range");
        for (int c = 0; c < order; ++c)
          if (op(ab, c) != op(a, op(b, c))) throw std::invalid_argument(name + ": not associative");
      }
    for (int a = 0; a < order; ++a)
      if (op(identity, a) != a || op(a, identity) != a)
        throw std::invalid_argument(name + ": identity law fails");
    for (int a = 0; a < order; ++a)
      if (op(a, inverse[a]) != identity || op(inverse[a], a) != identity)
        throw std::invalid_argument(name + ": inverse law fails");
  }

  std::vector<int> conjugacy_class(int g) const {
    std::vector<bool> in(order, false);
    for (int h = 0; h < order; ++h) in[op(op(h, g), inverse[h])] = true;
    std::vector<int> out;
    for (int x = 0; x < order; ++x)
      if (in[x]) out.push_back(x);
    return out;
  }

  int class_size(int g) const { return int(conjugacy_class(g).size()); }

  std::vector<int> centralizer(int g) const {
    std::vector<int> out;
    for (int h = 0; h < order; ++h)
      if (op(h, g) == op(g, h)) out.push_back(h);
    return out;
  }

  bool is_involution(int g) const { return g != identity && op(g, g) == identity; }
};

namespace detail {

inline void fill_inverses(GroupTable& g) {
  g.inverse.assign(g.order, -1);
  for (int a = 0; a < g.order; ++a)
    for (int b = 0; b < g.order; ++b)
      if (g.op(a, b) == g.identity) g.inverse[a] = b;
}

inline GroupTable symmetric_group(int n, const std::string& name) {
  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  int order = int(perms.size());
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < order; ++i) index[perms[i]] = i;
  GroupTable g;
  g.order = order;
  g.name = name;
  g.mult.resize(order * order);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b) {
      std::vector<int> c(n);
      for (int i = 0; i < n; ++i) c[i] = perms[a][perms[b][i]];
      g.mult[a * order + b] = index[c];
    }
  std::vector<int> e(n);
  std::iota(e.begin(), e.end(), 0);
  g.identity = index.at(e);
  fill_inverses(g);
  g.validate();
  return g;
}

}  // namespace detail

inline GroupTable cyclic_group(int n) {
  GroupTable g;
  g.order = n;
  g.name = "Z" + std::to_string(n);
  g.mult.resize(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g.mult[a * n + b] = (a + b) % n;
  g.identity = 0;
  detail::fill_inverses(g);
  g.validate();
  return g;
}

// Dihedral group of order 2n: elements r^k (index k) and s r^k (index n+k).
inline GroupTable dihedral_group(int n) {
  GroupTable g;
  g.order = 2 * n;
  g.name = "D" + std::to_string(n);
  g.mult.resize(4 * n * n);
  auto idx = [&](bool flip, int k) { return (flip ? n : 0) + ((k % n) + n) % n; };
  auto set = [&](int a, int b, int c) { g.mult[a * g.order + b] = c; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      set(idx(false, a), idx(false, b), idx(false, a + b));
      set(idx(false, a), idx(true, b), idx(true, b - a));
      set(idx(true, a), idx(false, b), idx(true, a + b));
      set(idx(true, a), idx(true, b), idx(false, b - a));
    }
  g.identity = 0;
  detail::fill_inverses(g);
  g.validate();
  return g;
}

inline GroupTable build_group(const std::string& name) {
  if (name == "Z2") return cyclic_group(2);
  if (name == "Z3") return cyclic_group(3);
  if (name == "Z4") return cyclic_group(4);
  if (name == "S3") return detail::symmetric_group(3, "S3");
  if (name == "S4") return detail::symmetric_group(4, "S4");
  if (name == "D4") return dihedral_group(4);
  if (name == "D5") return dihedral_group(5);
  if (name == "D6") return dihedral_group(6);
  throw std::invalid_argument("build_group: unknown group " + name);
}

// Plain-text format: first token = order, then order^2 row-major indices.
inline GroupTable group_from_text(std::istream& in, const std::string& name = "custom") {
  GroupTable g;
  if (!(in >> g.order) || g.order < 1) throw std::invalid_argument("group_from_text: bad order");
  g.name = name;
  g.mult.resize(g.order * g.order);
  for (int& v : g.mult)
    if (!(in >> v)) throw std::invalid_argument("group_from_text: truncated table");
  // identity = the unique row equal to the column index
  g.identity = -1;
  for (int a = 0; a < g.order; ++a) {
    bool id = true;
    for (int b = 0; b < g.order; ++b) id = id && g.op(a, b) == b;
    if (id) g.identity = a;
  }
  if (g.identity < 0) throw std::invalid_argument("group_from_text: no identity row");
  detail::fill_inverses(g);
  g.validate();
  return g;
}

inline std::string group_to_text(const GroupTable& g) {
  std::ostringstream out;
  out << g.order << "\n";
  for (int a = 0; a < g.order; ++a) {
    for (int b = 0; b < g.order; ++b) out << g.op(a, b) << (b + 1 == g.order ? "" : " ");
    out << "\n";
  }
  return out.str();
}

// Involutions grouped by conjugacy class, classes ordered by smallest member.
inline std::vector<std::vector<int>> order_two_classes(const GroupTable& g) {
  std::vector<std::vector<int>> out;
  std::vector<bool> used(g.order, false);
  for (int x = 0; x < g.order; ++x)
    if (!used[x] && g.is_involution(x)) {
      auto cls = g.conjugacy_class(x);
      for (int y : cls) used[y] = true;
      out.push_back(cls);
    }
  return out;
}

}  // namespace loopgas
