#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "loopgas/lattice.hpp"

namespace loopgas {

// Edge subset as a fixed 128-bit mask; all supported lattices stay within this.
struct EdgeMask {
  std::array<uint64_t, 2> w{0, 0};

  static EdgeMask from_edges(const std::vector<int>& ids) {
    EdgeMask m;
    for (int e : ids) m.flip(e);
    return m;
  }
  bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  void set(int i) { w[i >> 6] |= uint64_t(1) << (i & 63); }
  void flip(int i) { w[i >> 6] ^= uint64_t(1) << (i & 63); }
  int count() const { return std::popcount(w[0]) + std::popcount(w[1]); }
  bool empty() const { return !(w[0] | w[1]); }
  EdgeMask operator^(const EdgeMask& o) const { return {{w[0] ^ o.w[0], w[1] ^ o.w[1]}}; }
  EdgeMask operator&(const EdgeMask& o) const { return {{w[0] & o.w[0], w[1] & o.w[1]}}; }
  EdgeMask& operator^=(const EdgeMask& o) {
    w[0] ^= o.w[0];
    w[1] ^= o.w[1];
    return *this;
  }
  bool operator==(const EdgeMask& o) const { return w == o.w; }
  template <class F>
  void for_each_bit(F&& f) const {
    for (int word = 0; word < 2; ++word)
      for (uint64_t b = w[word]; b; b &= b - 1)
        f(64 * word + std::countr_zero(b));
  }
};

struct LoopStats {
  int length = 0;
  int components = 0;
  int cyclo = 0;  // E - V + components of the induced subgraph
  int wx = 0, wy = 0;
};

// Reusable scratch for component counting; lazily re-initialized per config via
// epoch stamps so repeated calls cost O(|L| alpha).
struct LoopScratch {
  std::vector<int> parent;
  std::vector<int> seen;
  int epoch = 0;

  explicit LoopScratch(int n_vertices) : parent(n_vertices, -1), seen(n_vertices, -1) {}

  int find(int v) {
    int r = v;
    while (parent[r] >= 0) r = parent[r];
    while (parent[v] >= 0) {
      int next = parent[v];
      parent[v] = r;
      v = next;
    }
    return r;
  }
};

inline bool is_closed(const LoopLattice& lat, const EdgeMask& m) {
  std::vector<uint8_t> deg(lat.n_vertices, 0);
  m.for_each_bit([&](int e) {
    deg[lat.edges[e].tail] ^= 1;
    deg[lat.edges[e].head] ^= 1;
  });
  for (uint8_t d : deg)
    if (d) return false;
  return true;
}

// Symmetric difference of the plaquette boundaries with sigma=1. Repeated edges
// in a plaquette list cancel (multiset semantics at degenerate dims).
inline EdgeMask boundary(const LoopLattice& lat, uint64_t sigma) {
  EdgeMask m;
  for (int p = 0; p < lat.n_plaquettes(); ++p)
    if ((sigma >> p) & 1)
      for (int e : lat.plaquettes[p]) m.flip(e);
  return m;
}

inline LoopStats loop_stats(const LoopLattice& lat, const EdgeMask& m, LoopScratch& sc) {
  LoopStats st;
  ++sc.epoch;
  int n_active = 0, merges = 0;
  m.for_each_bit([&](int e) {
    ++st.length;
    const Edge& ed = lat.edges[e];
    for (int v : {ed.tail, ed.head})
      if (sc.seen[v] != sc.epoch) {
        sc.seen[v] = sc.epoch;
        sc.parent[v] = -1;
        ++n_active;
      }
    int ra = sc.find(ed.tail), rb = sc.find(ed.head);
    if (ra != rb) {
      sc.parent[ra] = rb;
      ++merges;
    }
    st.wx ^= ed.wrap_x & 1;
    st.wy ^= ed.wrap_y & 1;
  });
  st.components = n_active - merges;
  st.cyclo = st.length - n_active + st.components;
  return st;
}

inline int components(const LoopLattice& lat, const EdgeMask& m) {
  if (!is_closed(lat, m)) throw std::invalid_argument("components: config not closed");
  LoopScratch sc(lat.n_vertices);
  return loop_stats(lat, m, sc).components;
}

inline int cyclomatic_number(const LoopLattice& lat, const EdgeMask& m) {
  if (!is_closed(lat, m)) throw std::invalid_argument("cyclomatic_number: config not closed");
  LoopScratch sc(lat.n_vertices);
  return loop_stats(lat, m, sc).cyclo;
}

constexpr int kEnumerationCap = 24;  // max plaquette count for exhaustive streams

namespace detail {
inline std::vector<EdgeMask> plaquette_masks(const LoopLattice& lat) {
  std::vector<EdgeMask> pm(lat.n_plaquettes());
  for (int p = 0; p < lat.n_plaquettes(); ++p)
    for (int e : lat.plaquettes[p]) pm[p].flip(e);
  return pm;
}
}  // namespace detail

// Distinct closed configs. The boundary map has kernel {0, all-ones}, so fixing
// the last plaquette spin enumerates each contractible config exactly once:
// 2^(F-1) of them, times 4 homology sectors when include_winding is set.
// Visitor: f(const EdgeMask&, const LoopStats&).
template <class F>
void for_each_closed(const LoopLattice& lat, bool include_winding, F&& f) {
  int np = lat.n_plaquettes();
  if (np > kEnumerationCap) throw std::invalid_argument("enumeration cap exceeded");
  if (lat.n_edges() > 128) throw std::invalid_argument("edge mask overflow");
  auto pm = detail::plaquette_masks(lat);
  std::vector<EdgeMask> sectors{EdgeMask{}};
  if (include_winding) {
    EdgeMask rx = EdgeMask::from_edges(lat.ref_cycle_x);
    EdgeMask ry = EdgeMask::from_edges(lat.ref_cycle_y);
    sectors.push_back(rx);
    sectors.push_back(ry);
    sectors.push_back(rx ^ ry);
  }
  LoopScratch sc(lat.n_vertices);
  int bits = np - 1;
  EdgeMask base;
  uint64_t gray = 0;
  for (uint64_t k = 0;; ++k) {
    for (const EdgeMask& s : sectors) {
      EdgeMask m = base ^ s;
      f(m, loop_stats(lat, m, sc));
    }
    if (k + 1 >= (uint64_t(1) << bits)) break;
    uint64_t next_gray = (k + 1) ^ ((k + 1) >> 1);
    base ^= pm[std::countr_zero(gray ^ next_gray)];
    gray = next_gray;
  }
}

// All 2^F plaquette-spin configs with their boundaries (not deduplicated; the
// kernel makes this exactly 2-to-1 onto contractible configs). Visitor:
// f(uint64_t sigma, const EdgeMask&, const LoopStats&).
template <class F>
void for_each_sigma(const LoopLattice& lat, F&& f) {
  int np = lat.n_plaquettes();
  if (np > kEnumerationCap) throw std::invalid_argument("enumeration cap exceeded");
  if (lat.n_edges() > 128) throw std::invalid_argument("edge mask overflow");
  auto pm = detail::plaquette_masks(lat);
  LoopScratch sc(lat.n_vertices);
  EdgeMask m;
  uint64_t gray = 0;
  for (uint64_t k = 0;; ++k) {
    f(gray, m, loop_stats(lat, m, sc));
    if (k + 1 >= (uint64_t(1) << np)) break;
    uint64_t next_gray = (k + 1) ^ ((k + 1) >> 1);
    m ^= pm[std::countr_zero(gray ^ next_gray)];
    gray = next_gray;
  }
}

}  // namespace loopgas
