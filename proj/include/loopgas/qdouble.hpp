#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include "loopgas/groups.hpp"
#include "loopgas/weights.hpp"

namespace loopgas {

// ---------------------------------------------------------------------------
// Flux strings on the triangular lattice. A flux-move configuration is a set of
// triangular-lattice bonds ("red" bonds, the ones an X_g string crosses). It is
// a closed loop on the dual trivalent lattice exactly when every triangle
// contains an even number of red bonds; an odd triangle is an open end or a
// branch point.
//
// Per-triangle constraint bookkeeping (triangle edge lists are stored in role
// order): the lower-right triangle of cell (x,y) holds [h(x,y), u(x+1,y),
// d(x,y)] with flux h*u = d, and the upper-left one holds [u(x,y), h(x,y+1),
// d(x,y)] with flux u*h = d. Conjugating the flux by the string action shows
// the triangle pins its role-0 bond to the centralizer precisely when the
// role-1 bond is red; the diagonal never gets pinned. The pinned bonds form
// the shadow: a closed loop on the square sublattice.
// ---------------------------------------------------------------------------

inline bool flux_string_closed(const LoopLattice& tri, const EdgeMask& red) {
  if (tri.kind != LatticeKind::triangular)
    throw std::invalid_argument("flux_string_closed: need a triangular lattice");
  for (const auto& p : tri.plaquettes) {
    int cnt = 0;
    for (int e : p) cnt += red.test(e);
    if (cnt % 2) return false;
  }
  return true;
}

// Shadow of a closed flux string: the square-lattice bonds pinned to the
// centralizer. Throws on open or branched input.
inline EdgeMask shadow(const LoopLattice& tri, const EdgeMask& red) {
  if (!flux_string_closed(tri, red))
    throw std::invalid_argument("shadow: flux string is open or branched");
  EdgeMask out;
  for (int cell = 0; cell < tri.lx * tri.ly; ++cell)
    for (int half = 0; half < 2; ++half) {
      const auto& p = tri.plaquettes[2 * cell + half];
      int cnt = red.test(p[0]) + red.test(p[1]) + red.test(p[2]);
      if (cnt == 2 && red.test(p[1])) out.set(2 * cell + half);
    }
  return out;
}

// Closed-form overlap f(L) = |[g]|^(C - |shadow|). Open or branched strings are
// orthogonal to the ground space: exactly 0.
inline LogValue weight_quantum_double(const LoopLattice& tri, const EdgeMask& red,
                                      const GroupTable& G, int g) {
  if (!G.is_involution(g))
    throw std::invalid_argument("weight_quantum_double: need g != e with g^2 = e");
  if (!flux_string_closed(tri, red)) return LogValue::zero();
  EdgeMask sh = shadow(tri, red);
  LoopLattice sq = square_lattice(tri.lx, tri.ly);
  LoopScratch sc(sq.n_vertices);
  auto st = loop_stats(sq, sh, sc);
  double k = double(G.class_size(g));
  return {(st.cyclo - st.length) * std::log(k), 1};
}

// ---------------------------------------------------------------------------
// Brute-force overlap on a planar patch: enumerate flux-free gauge configs by
// constraint propagation, apply the string, count survivors. Exact integers.
// ---------------------------------------------------------------------------

struct TriRef {
  int x = 0, y = 0;
  bool upper = false;  // false: lower-right triangle, true: upper-left
};

struct FluxFreePatch {
  // edges interned by (x, y, type h=0 u=1 d=2); planar, no wraparound
  std::map<std::tuple<int, int, int>, int> edge_index;
  int n_edges = 0;
  // triangles in role order [h, u, d] as above, plus upper flag
  std::vector<std::array<int, 3>> tris;
  std::vector<uint8_t> tri_upper;

  // propagation program: (kind, a, b) with kind 0 = "edge a is free",
  // kind 1 = "triangle a forces its role-b edge", kind 2 = "triangle a is a
  // consistency check"
  std::vector<std::array<int, 3>> program;
  std::vector<int> free_edges;

  int edge(int x, int y, int type) const {
    auto it = edge_index.find({x, y, type});
    if (it == edge_index.end()) throw std::invalid_argument("patch: edge outside patch");
    return it->second;
  }

  static FluxFreePatch build(const std::vector<TriRef>& refs, int max_free = 12) {
    FluxFreePatch p;
    auto intern = [&](int x, int y, int t) {
      auto [it, fresh] = p.edge_index.try_emplace({x, y, t}, p.n_edges);
      if (fresh) ++p.n_edges;
      return it->second;
    };
    std::set<std::tuple<int, int, bool>> seen;
    for (const auto& r : refs) {
      if (!seen.insert({r.x, r.y, r.upper}).second) continue;
      if (!r.upper)
        p.tris.push_back({intern(r.x, r.y, 0), intern(r.x + 1, r.y, 1), intern(r.x, r.y, 2)});
      else
        p.tris.push_back({intern(r.x, r.y, 1), intern(r.x, r.y + 1, 0), intern(r.x, r.y, 2)});
      p.tri_upper.push_back(r.upper ? 1 : 0);
    }
    // greedy order: force triangles with one unknown edge, otherwise free the
    // lowest-numbered unknown edge
    std::vector<bool> det(p.n_edges, false);
    std::vector<bool> done(p.tris.size(), false);
    size_t remaining = p.tris.size();
    while (remaining > 0) {
      bool progressed = false;
      for (size_t ti = 0; ti < p.tris.size(); ++ti) {
        if (done[ti]) continue;
        int unknown = -1, n_unknown = 0;
        for (int role = 0; role < 3; ++role)
          if (!det[p.tris[ti][role]]) {
            unknown = role;
            ++n_unknown;
          }
        if (n_unknown > 1) continue;
        if (n_unknown == 1) {
          p.program.push_back({1, int(ti), unknown});
          det[p.tris[ti][unknown]] = true;
        } else {
          p.program.push_back({2, int(ti), 0});
        }
        done[ti] = true;
        --remaining;
        progressed = true;
      }
      if (!progressed) {
        int e = 0;
        while (e < p.n_edges && det[e]) ++e;
        p.program.push_back({0, e, 0});
        det[e] = true;
        p.free_edges.push_back(e);
      }
    }
    if (int(p.free_edges.size()) > max_free)
      throw std::invalid_argument("patch: free-edge count exceeds cap");
    return p;
  }
};

// Exact rational overlap: accepted / total flux-free configs.
struct OverlapCount {
  uint64_t accepted = 0;
  uint64_t total = 0;

  double value() const { return total ? double(accepted) / double(total) : 0.0; }

  // compare with k^(cyclo - len) without building big powers on one side only
  bool equals_power(uint64_t k, int cyclo, int len) const {
    __int128 lhs = __int128(accepted), rhs = __int128(total);
    for (int i = 0; i < len; ++i) lhs *= k;
    for (int i = 0; i < cyclo; ++i) rhs *= k;
    return lhs == rhs;
  }
};

namespace detail {

// Run the propagation program for one assignment of the free edges. Returns
// false if a consistency check fails.
inline bool propagate(const FluxFreePatch& p, const GroupTable& G, const std::vector<int>& free_val,
                      std::vector<int>& val) {
  size_t fi = 0;
  for (const auto& op : p.program) {
    if (op[0] == 0) {
      val[op[1]] = free_val[fi++];
      continue;
    }
    const auto& tr = p.tris[op[1]];
    // flux: val[role0] * val[role1] = val[role2]
    if (op[0] == 1) {
      int role = op[2];
      if (role == 2)
        val[tr[2]] = G.op(val[tr[0]], val[tr[1]]);
      else if (role == 0)
        val[tr[0]] = G.op(val[tr[2]], G.inverse[val[tr[1]]]);
      else
        val[tr[1]] = G.op(G.inverse[val[tr[0]]], val[tr[2]]);
    } else {
      if (G.op(val[tr[0]], val[tr[1]]) != val[tr[2]]) return false;
    }
  }
  return true;
}

template <class Accept>
OverlapCount count_configs(const FluxFreePatch& p, const GroupTable& G, Accept&& accept) {
  OverlapCount out;
  int nf = int(p.free_edges.size());
  std::vector<int> free_val(nf, 0), val(p.n_edges, -1);
  while (true) {
    if (propagate(p, G, free_val, val)) {
      ++out.total;
      if (accept(val)) ++out.accepted;
    }
    int i = nf - 1;
    while (i >= 0 && free_val[i] == G.order - 1) free_val[i--] = 0;
    if (i < 0) break;
    ++free_val[i];
  }
  return out;
}

}  // namespace detail

// Count flux-free configs whose image under the string action (left-multiply
// every red bond by g) is still flux-free.
inline OverlapCount overlap_bruteforce(const FluxFreePatch& p, const GroupTable& G, int g,
                                       const std::set<int>& red) {
  if (!G.is_involution(g))
    throw std::invalid_argument("overlap_bruteforce: need g != e with g^2 = e");
  std::vector<int> img(p.n_edges);
  return detail::count_configs(p, G, [&](const std::vector<int>& val) {
    for (int e = 0; e < p.n_edges; ++e) img[e] = red.count(e) ? G.op(g, val[e]) : val[e];
    for (const auto& tr : p.tris)
      if (G.op(img[tr[0]], img[tr[1]]) != img[tr[2]]) return false;
    return true;
  });
}

// Same count expressed through the pinned-bond projectors: accept configs whose
// shadow bonds all lie in the centralizer of g. One projector is redundant per
// loop; omit_shadow_bond (a patch edge id, or -1) drops one check to exercise
// that.
inline OverlapCount overlap_bruteforce_projectors(const FluxFreePatch& p, const GroupTable& G,
                                                  int g, const std::set<int>& red,
                                                  int omit_shadow_bond = -1) {
  if (!G.is_involution(g))
    throw std::invalid_argument("overlap_bruteforce_projectors: need g != e with g^2 = e");
  // pinned bonds by the role rule, with multiplicity (a bond pinned by two
  // triangles must pass both, but the check is idempotent)
  std::vector<int> pinned;
  for (size_t ti = 0; ti < p.tris.size(); ++ti) {
    const auto& tr = p.tris[ti];
    int cnt = red.count(tr[0]) + red.count(tr[1]) + red.count(tr[2]);
    if (cnt % 2) throw std::invalid_argument("overlap_bruteforce_projectors: open or branched");
    if (cnt == 2 && red.count(tr[1])) pinned.push_back(tr[0]);
  }
  if (omit_shadow_bond >= 0) {
    auto it = std::find(pinned.begin(), pinned.end(), omit_shadow_bond);
    if (it == pinned.end())
      throw std::invalid_argument("overlap_bruteforce_projectors: bond not pinned");
    pinned.erase(it);
  }
  std::vector<bool> central(G.order, false);
  for (int h : G.centralizer(g)) central[h] = true;
  return detail::count_configs(p, G, [&](const std::vector<int>& val) {
    for (int e : pinned)
      if (!central[val[e]]) return false;
    return true;
  });
}

// Convenience patch builders
inline std::vector<TriRef> triangles_around_vertex(int x, int y) {
  return {{x, y, false},         {x, y, true},         {x - 1, y, false},
          {x, y - 1, true},      {x - 1, y - 1, false}, {x - 1, y - 1, true}};
}

inline std::set<int> hexagon_red(const FluxFreePatch& p, int x, int y) {
  return {p.edge(x - 1, y, 0), p.edge(x, y, 0),         p.edge(x, y - 1, 1),
          p.edge(x, y, 1),     p.edge(x - 1, y - 1, 2), p.edge(x, y, 2)};
}

// ---------------------------------------------------------------------------
// Loop-model parameters induced by a flux involution
// ---------------------------------------------------------------------------

enum class PhaseRegime { dense, critical, short_loop };

struct LoopModelParams {
  double t = 0.0;
  double N = 1.0;
  PhaseRegime regime = PhaseRegime::dense;
};

inline PhaseRegime classify_class_size(int k) {
  if (k <= 1) return PhaseRegime::dense;
  if (k == 2) return PhaseRegime::critical;
  return PhaseRegime::short_loop;
}

// Square-lattice O(N) parameters of the purity tr(rho^2) under rate-p flux noise.
inline LoopModelParams qd_purity_params(const GroupTable& G, int g, double p) {
  if (!G.is_involution(g)) throw std::invalid_argument("qd_purity_params: need an involution");
  double k = double(G.class_size(g));
  return {external_tension(p) / (k * k), k * k, classify_class_size(G.class_size(g))};
}

// Largest-eigenvalue loop model at maximal decoherence.
inline LoopModelParams qd_max_decoherence_params(const GroupTable& G, int g) {
  if (!G.is_involution(g))
    throw std::invalid_argument("qd_max_decoherence_params: need an involution");
  int k = G.class_size(g);
  return {1.0 / double(k), double(k), classify_class_size(k)};
}

}  // namespace loopgas
