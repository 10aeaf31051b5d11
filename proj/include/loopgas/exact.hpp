#pragma once

#include <cmath>
#include <deque>
#include <string>

#include "loopgas/weights.hpp"

namespace loopgas {

// Partition sum over distinct closed configs, Neumaier-compensated. The weight
// functor sees (mask, stats) and returns a linear-scale value.
template <class W>
double partition_sum(const LoopLattice& lat, bool include_winding, W&& w) {
  KahanSum acc;
  for_each_closed(lat, include_winding,
                  [&](const EdgeMask& m, const LoopStats& st) { acc.add(w(m, st)); });
  return acc.value();
}

inline double partition_function_topological(const LoopLattice& lat, double t, double N,
                                             bool include_winding = false) {
  return partition_sum(lat, include_winding, [&](const EdgeMask&, const LoopStats& st) {
    return weight_topological(st, t, N).value();
  });
}

inline double partition_function(const LoopLattice& lat, const WeightModel& model,
                                 bool include_winding = false) {
  return partition_sum(lat, include_winding, [&](const EdgeMask& m, const LoopStats& st) {
    return model.eval(lat, m, st);
  });
}

struct EquivalenceReport {
  std::string mapping;
  double lhs = 0.0;
  double rhs = 0.0;

  double relative_error() const {
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
  }
};

// ---------------------------------------------------------------------------
// Loop side of the honeycomb O(1) model vs the ferromagnetic Ising model on the
// dual triangular lattice. The dual Boltzmann sum is evaluated in the
// domain-wall parametrization exp(-2*beta_dual) = tanh(beta), which stays
// finite at beta = 0; the constant prefactor between the two conventions is
// absorbed, and the spin-flip kernel contributes the factor 2.
// ---------------------------------------------------------------------------
inline EquivalenceReport ising_dual_check(const LoopLattice& honey, double beta) {
  if (honey.kind != LatticeKind::honeycomb)
    throw std::invalid_argument("ising_dual_check: need a honeycomb lattice");
  double t = std::tanh(beta);
  double lhs = partition_function_topological(honey, t, 1.0, false);

  // independent enumeration: spins on the vertices of the dual triangular
  // lattice, t^(number of disagreeing bonds)
  LoopLattice tri = triangular_lattice(honey.lx, honey.ly);
  KahanSum acc;
  uint64_t nspin = uint64_t(1) << tri.n_vertices;
  for (uint64_t s = 0; s < nspin; ++s) {
    int walls = 0;
    for (const auto& e : tri.edges) walls += int(((s >> e.tail) ^ (s >> e.head)) & 1);
    acc.add(walls == 0 ? 1.0 : std::pow(t, walls));
  }
  double rhs = acc.value() / 2.0;
  return {"ising-dual", lhs, rhs};
}

// ---------------------------------------------------------------------------
// Error-chain sum vs the random-bond Ising model. Chains live on square-lattice
// edges; the anyon config a is the odd-degree vertex set. The RBIM side puts
// spins on plaquettes (dual sites) with bond signs from a reference chain, in
// the t = p/(1-p) parametrization with per-bond factors, summed over the four
// homology sectors; the derived prefactor (1-p)^N and the spin-flip kernel 1/2
// are applied explicitly.
// ---------------------------------------------------------------------------
inline std::vector<uint8_t> chain_boundary(const LoopLattice& sq, const EdgeMask& chain) {
  std::vector<uint8_t> parity(sq.n_vertices, 0);
  chain.for_each_bit([&](int e) {
    parity[sq.edges[e].tail] ^= 1;
    parity[sq.edges[e].head] ^= 1;
  });
  return parity;
}

inline double chain_sum_bruteforce(const LoopLattice& sq, const std::vector<uint8_t>& a,
                                   double p) {
  int ne = sq.n_edges();
  if (ne > 24) throw std::invalid_argument("chain_sum_bruteforce: too many edges");
  KahanSum acc;
  for (uint64_t mask = 0; mask < (uint64_t(1) << ne); ++mask) {
    EdgeMask m;
    m.w[0] = mask;
    if (chain_boundary(sq, m) != a) continue;
    int k = m.count();
    acc.add((k == 0 ? 1.0 : std::pow(p, k)) * std::pow(1.0 - p, ne - k));
  }
  return acc.value();
}

inline double rbim_partition(const LoopLattice& sq, const EdgeMask& e_ref, double p) {
  double t = p / (1.0 - p);
  auto faces = sq.edge_faces();
  EdgeMask rx = EdgeMask::from_edges(sq.ref_cycle_x);
  EdgeMask ry = EdgeMask::from_edges(sq.ref_cycle_y);
  std::array<EdgeMask, 4> sectors{EdgeMask{}, rx, ry, rx ^ ry};
  KahanSum acc;
  uint64_t nspin = uint64_t(1) << sq.n_plaquettes();
  for (const EdgeMask& sec : sectors) {
    for (uint64_t m = 0; m < nspin; ++m) {
      double w = 1.0;
      for (int e = 0; e < sq.n_edges(); ++e) {
        int wall = int(((m >> faces[e][0]) ^ (m >> faces[e][1])) & 1) ^ int(sec.test(e)) ^
                   int(e_ref.test(e));
        if (wall) w *= t;
      }
      acc.add(w);
    }
  }
  double prefactor = std::pow(1.0 - p, sq.n_edges());
  return prefactor * acc.value() / 2.0;
}

inline EquivalenceReport rbim_check(const LoopLattice& sq, const EdgeMask& e_ref, double p) {
  if (sq.kind != LatticeKind::square)
    throw std::invalid_argument("rbim_check: need a square lattice");
  double lhs = chain_sum_bruteforce(sq, chain_boundary(sq, e_ref), p);
  double rhs = rbim_partition(sq, e_ref, p);
  return {"rbim", lhs, rhs};
}

// ---------------------------------------------------------------------------
// Face-cubic spin model on the square lattice: spins are one-hot vectors
// +-e_k, bond factor (1 + t N S_i . S_j). Equals (2N)^V times the loop model
// with all homology sectors; the constant is pinned at t = 0.
// ---------------------------------------------------------------------------
inline double face_cubic_spin_sum(const LoopLattice& lat, double t, int N) {
  int nv = lat.n_vertices;
  int nstate = 2 * N;
  std::vector<int> comp(nv, 0);  // state: component k, sign via k >= N
  KahanSum acc;
  auto dot = [&](int a, int b) {
    if (a % N != b % N) return 0;
    return (a / N == b / N) ? 1 : -1;
  };
  while (true) {
    double w = 1.0;
    for (const auto& e : lat.edges) w *= 1.0 + t * N * dot(comp[e.tail], comp[e.head]);
    acc.add(w);
    int i = 0;
    while (i < nv && comp[i] == nstate - 1) comp[i++] = 0;
    if (i == nv) break;
    ++comp[i];
  }
  return acc.value();
}

inline EquivalenceReport face_cubic_check(const LoopLattice& sq, double t, int N) {
  if (sq.kind != LatticeKind::square)
    throw std::invalid_argument("face_cubic_check: need a square lattice");
  if (N < 1 || N > 4) throw std::invalid_argument("face_cubic_check: need N in 1..4");
  if (t < 0.0) throw std::invalid_argument("face_cubic_check: need t >= 0");
  // the expansion identity is polynomial in t, so it holds past the
  // nonnegativity threshold t = 1/N too; only sampling needs t <= 1/N
  double lhs = face_cubic_spin_sum(sq, t, N);
  double constant = std::pow(2.0 * N, sq.n_vertices);
  double rhs = constant * partition_function_topological(sq, t, double(N), true);
  return {"face-cubic", lhs, rhs};
}

// ---------------------------------------------------------------------------
// Mixed model on the honeycomb lattice: one-hot face-cubic spins on sublattice
// A, corner spins (+-1,...,+-1)/sqrt(N) on sublattice B. Constant pinned at
// t = 0 is (2N)^(V_A) * 2^(N V_B).
// ---------------------------------------------------------------------------
inline EquivalenceReport mixed_cubic_check(const LoopLattice& honey, double t, int N) {
  if (honey.kind != LatticeKind::honeycomb)
    throw std::invalid_argument("mixed_cubic_check: need a honeycomb lattice");
  if (N < 1 || N > 4) throw std::invalid_argument("mixed_cubic_check: need N in 1..4");
  if (t < 0.0) throw std::invalid_argument("mixed_cubic_check: need t >= 0");
  int cells = honey.lx * honey.ly;  // A and B sites per cell
  double invsq = 1.0 / std::sqrt(double(N));
  // odometer over A states (2N each) and B states (2^N each)
  std::vector<int> a_state(cells, 0), b_state(cells, 0);
  KahanSum acc;
  while (true) {
    double w = 1.0;
    for (const auto& e : honey.edges) {
      // tail is always the A site or B site per construction: A ids even
      int av = (e.tail % 2 == 0) ? e.tail / 2 : e.head / 2;
      int bv = (e.tail % 2 == 0) ? e.head / 2 : e.tail / 2;
      int k = a_state[av] % N;
      double sa = (a_state[av] / N == 0) ? 1.0 : -1.0;
      double sb = ((b_state[bv] >> k) & 1) ? -1.0 : 1.0;
      w *= 1.0 + t * N * sa * sb * invsq;
    }
    acc.add(w);
    int i = 0;
    bool carried = false;
    for (; i < cells; ++i) {
      if (a_state[i] + 1 < 2 * N) {
        ++a_state[i];
        break;
      }
      a_state[i] = 0;
    }
    if (i == cells) {
      for (i = 0; i < cells; ++i) {
        if (b_state[i] + 1 < (1 << N)) {
          ++b_state[i];
          break;
        }
        b_state[i] = 0;
      }
      carried = (i == cells);
    }
    if (carried) break;
  }
  double lhs = acc.value();
  double constant = std::pow(2.0 * N, cells) * std::pow(2.0, double(N) * cells);
  double rhs = constant * partition_function_topological(honey, t, double(N), true);
  return {"mixed-cubic", lhs, rhs};
}

// ---------------------------------------------------------------------------
// Open-string correlator: sum over configs with odd degree exactly at x and x',
// with all homology sectors, over the closed-sector sum. Open configs are
// reached as (closed config) xor (fixed reference path).
// ---------------------------------------------------------------------------
inline std::vector<int> shortest_edge_path(const LoopLattice& lat, int x, int xp) {
  std::vector<int> prev_edge(lat.n_vertices, -1), prev_vertex(lat.n_vertices, -1);
  std::vector<uint8_t> seen(lat.n_vertices, 0);
  std::deque<int> queue{x};
  seen[x] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (v == xp) break;
    for (int e = 0; e < lat.n_edges(); ++e) {
      const auto& ed = lat.edges[e];
      int other = ed.tail == v ? ed.head : (ed.head == v ? ed.tail : -1);
      if (other < 0 || seen[other]) continue;
      seen[other] = 1;
      prev_edge[other] = e;
      prev_vertex[other] = v;
      queue.push_back(other);
    }
  }
  if (!seen[xp]) throw std::invalid_argument("shortest_edge_path: disconnected");
  std::vector<int> path;
  for (int v = xp; v != x; v = prev_vertex[v]) path.push_back(prev_edge[v]);
  return path;
}

inline double string_correlator(const LoopLattice& lat, const WeightModel& model, int x,
                                int xp) {
  if (x == xp) throw std::invalid_argument("string_correlator: need distinct endpoints");
  EdgeMask path = EdgeMask::from_edges(shortest_edge_path(lat, x, xp));
  LoopScratch sc(lat.n_vertices);
  KahanSum num, den;
  for_each_closed(lat, true, [&](const EdgeMask& m, const LoopStats& st) {
    den.add(model.eval(lat, m, st));
    EdgeMask open = m ^ path;
    num.add(model.eval(lat, open, loop_stats(lat, open, sc)));
  });
  return num.value() / den.value();
}

inline double string_correlator(const LoopLattice& lat, double t, double N, int x, int xp) {
  return string_correlator(lat, WeightModel::topological(t, N), x, xp);
}

}  // namespace loopgas
