#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "loopgas/weights.hpp"

namespace loopgas {

struct SpectrumResult {
  std::vector<double> eigenvalues;  // sorted descending
  double entropy = 0.0;             // von Neumann, natural log
};

inline double spectrum_entropy(const std::vector<double>& eig) {
  KahanSum s;
  for (double v : eig)
    if (v > 0.0) s.add(-v * std::log(v));
  return s.value();
}

// ---------------------------------------------------------------------------
// Toric code under independent bit-flip noise of strength p, exact density
// matrix route. Qubits live on square-lattice edges; the code state is the
// uniform superposition over the vertex-star group applied to |0...0>. The
// channel output is rho = sum_E P(E) X_E |gs><gs| X_E over all chains E.
// ---------------------------------------------------------------------------
inline Eigen::VectorXd toric_code_ground_state(const LoopLattice& sq) {
  int nq = sq.n_edges();
  if (nq > 16) throw std::invalid_argument("toric_code_ground_state: too many qubits");
  std::vector<uint64_t> star(sq.n_vertices, 0);
  for (int e = 0; e < nq; ++e) {
    star[sq.edges[e].tail] |= uint64_t(1) << e;
    star[sq.edges[e].head] |= uint64_t(1) << e;
  }
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(int64_t(1) << nq);
  for (uint64_t s = 0; s < (uint64_t(1) << sq.n_vertices); ++s) {
    uint64_t pattern = 0;
    for (int v = 0; v < sq.n_vertices; ++v)
      if ((s >> v) & 1) pattern ^= star[v];
    psi[int64_t(pattern)] += 1.0;
  }
  psi.normalize();
  return psi;
}

inline SpectrumResult toric_code_spectrum_dense(const LoopLattice& sq, double p) {
  if (p < 0.0 || p > 0.5)
    throw std::invalid_argument("toric_code_spectrum_dense: need p in [0, 1/2]");
  int nq = sq.n_edges();
  Eigen::VectorXd gs = toric_code_ground_state(sq);
  int64_t dim = gs.size();
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd flipped(dim);
  for (uint64_t chain = 0; chain < (uint64_t(1) << nq); ++chain) {
    int k = std::popcount(chain);
    double prob = (k == 0 ? 1.0 : std::pow(p, k)) * std::pow(1.0 - p, nq - k);
    if (prob == 0.0) continue;
    for (int64_t b = 0; b < dim; ++b) flipped[b ^ int64_t(chain)] = gs[b];
    rho.noalias() += prob * flipped * flipped.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
  SpectrumResult out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + dim);
  for (double& v : out.eigenvalues)
    if (v < 0.0 && v > -1e-12) v = 0.0;
  std::sort(out.eigenvalues.rbegin(), out.eigenvalues.rend());
  out.entropy = spectrum_entropy(out.eigenvalues);
  return out;
}

// Same spectrum from error-chain combinatorics: chains bucketed by syndrome
// and by the winding parity of the chain itself, which separates homology
// classes within a fixed syndrome. Each bucket contributes one eigenvalue.
inline SpectrumResult toric_code_spectrum_chains(const LoopLattice& sq, double p) {
  if (p < 0.0 || p > 0.5)
    throw std::invalid_argument("toric_code_spectrum_chains: need p in [0, 1/2]");
  int nq = sq.n_edges();
  if (nq > 24) throw std::invalid_argument("toric_code_spectrum_chains: too many edges");
  std::vector<uint64_t> vert_mask(sq.n_vertices, 0);
  uint64_t wx_mask = 0, wy_mask = 0;
  for (int e = 0; e < nq; ++e) {
    vert_mask[sq.edges[e].tail] ^= uint64_t(1) << e;
    vert_mask[sq.edges[e].head] ^= uint64_t(1) << e;
    if (sq.edges[e].wrap_x & 1) wx_mask |= uint64_t(1) << e;
    if (sq.edges[e].wrap_y & 1) wy_mask |= uint64_t(1) << e;
  }
  struct Key {
    std::vector<uint8_t> syndrome;
    int wx, wy;
    bool operator<(const Key& o) const {
      if (syndrome != o.syndrome) return syndrome < o.syndrome;
      if (wx != o.wx) return wx < o.wx;
      return wy < o.wy;
    }
  };
  std::map<Key, KahanSum> buckets;
  for (uint64_t chain = 0; chain < (uint64_t(1) << nq); ++chain) {
    Key key;
    key.syndrome.assign(sq.n_vertices, 0);
    for (int v = 0; v < sq.n_vertices; ++v)
      key.syndrome[v] = uint8_t(std::popcount(chain & vert_mask[v]) & 1);
    key.wx = std::popcount(chain & wx_mask) & 1;
    key.wy = std::popcount(chain & wy_mask) & 1;
    int k = std::popcount(chain);
    buckets[key].add((k == 0 ? 1.0 : std::pow(p, k)) * std::pow(1.0 - p, nq - k));
  }
  SpectrumResult out;
  for (auto& [key, sum] : buckets) out.eigenvalues.push_back(sum.value());
  std::sort(out.eigenvalues.rbegin(), out.eigenvalues.rend());
  out.entropy = spectrum_entropy(out.eigenvalues);
  return out;
}

// ---------------------------------------------------------------------------
// Sign-resolved decomposition: Z_eta = 2^(-E) sum_L (prod_{e in L} eta_e)
// w(L) over an ensemble of distinct closed configs. All 2^E sign vectors at
// once via a Walsh-Hadamard transform of the weight-by-edge-set array; the
// index bit e set means eta_e = -1. Requires E <= 20.
// ---------------------------------------------------------------------------
inline std::vector<double> eta_spectrum_from_configs(const LoopLattice& lat,
                                                     const std::vector<EdgeMask>& configs,
                                                     double t_a, double d_a) {
  int ne = lat.n_edges();
  if (ne > 20) throw std::invalid_argument("eta_spectrum_from_configs: too many edges");
  LoopScratch sc(lat.n_vertices);
  std::vector<double> a(size_t(1) << ne, 0.0);
  for (const EdgeMask& m : configs) {
    LoopStats st = loop_stats(lat, m, sc);
    a[m.w[0]] += weight_topological(st, t_a, d_a).value();
  }
  for (int bit = 0; bit < ne; ++bit) {
    size_t half = size_t(1) << bit;
    for (size_t base = 0; base < a.size(); base += 2 * half)
      for (size_t i = base; i < base + half; ++i) {
        double u = a[i], v = a[i + half];
        a[i] = u + v;
        a[i + half] = u - v;
      }
  }
  double norm = std::ldexp(1.0, -ne);
  for (double& v : a) v *= norm;
  return a;
}

inline SpectrumResult eta_spectrum_maximal(const LoopLattice& lat, double t_a, double d_a,
                                           bool include_winding = true) {
  std::vector<EdgeMask> configs;
  for_each_closed(lat, include_winding,
                  [&](const EdgeMask& m, const LoopStats&) { configs.push_back(m); });
  SpectrumResult out;
  out.eigenvalues = eta_spectrum_from_configs(lat, configs, t_a, d_a);
  std::sort(out.eigenvalues.rbegin(), out.eigenvalues.rend());
  out.entropy = spectrum_entropy(out.eigenvalues);
  return out;
}

}  // namespace loopgas
