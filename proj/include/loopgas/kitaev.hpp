#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "loopgas/lattice.hpp"
#include "loopgas/pfaffian.hpp"
#include "loopgas/util.hpp"

namespace loopgas {

// Brick lattice plus its blue super-honeycomb, with the per-face Majorana
// bilinear data the membrane evaluator consumes. Faces are indexed in cell
// order of their color-0 hexagons, matching blue.plaquettes.
struct SuperHoneycomb {
  BrickHoneycomb brick;
  LoopLattice blue;
  std::vector<int> face_cell;     // blue face -> spin cell of its hexagon
  std::vector<int> face_of_cell;  // spin cell -> blue face, -1 off the sublattice
  struct Pair {
    int a_site = -1, b_site = -1;
  };
  std::vector<std::array<Pair, 3>> face_pairs;  // per face, sorted by b_site

  SuperHoneycomb(int lx, int ly) : brick(lx, ly), blue(super_honeycomb_lattice(lx, ly)) {
    face_of_cell.assign(lx * ly, -1);
    auto ot = BrickHoneycomb::out_types();
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x) {
        if (brick.color(x, y) != 0) continue;
        int c = brick.cell(x, y);
        face_of_cell[c] = int(face_cell.size());
        face_cell.push_back(c);
        const auto& hx = brick.hexagons[c];
        std::array<Pair, 3> ps;
        for (int i = 0; i < 6; i += 2)
          ps[i / 2] = {brick.nbr[hx[i]][ot[i]].other, hx[i]};
        std::sort(ps.begin(), ps.end(),
                  [](const Pair& u, const Pair& v) { return u.b_site < v.b_site; });
        face_pairs.push_back(ps);
      }
    // per-face bilinears tile every Majorana mode exactly once
    std::vector<int> cnt(brick.n_sites(), 0);
    for (const auto& ps : face_pairs)
      for (const auto& p : ps) {
        ++cnt[p.a_site];
        ++cnt[p.b_site];
      }
    for (int c : cnt)
      if (c != 1) throw std::logic_error("face bilinears do not tile the sites");
  }
};

// Quadratic Majorana form H = (i/4) sum_jk K_jk c_j c_k. Sector flags put one
// extra (-1) on every coupling per seam crossing; next-nearest chords inherit
// the parity of their two-link path.
struct MajoranaHamiltonian {
  double j_coupling = 1.0;
  double kappa = 0.0;
  std::array<int, 2> sector{0, 0};
  Eigen::MatrixXd K;
};

inline MajoranaHamiltonian build_hamiltonian(const BrickHoneycomb& br, double J, double kappa,
                                             std::array<int, 2> sector) {
  MajoranaHamiltonian h{J, kappa, sector,
                        Eigen::MatrixXd::Zero(br.n_sites(), br.n_sites())};
  auto seam = [&](int wx, int wy) {
    return ((sector[0] * wx + sector[1] * wy) % 2) ? -1.0 : 1.0;
  };
  for (const auto& l : br.links) {
    double v = -2.0 * J * seam(l.wx, l.wy);
    h.K(l.a, l.b) += v;
    h.K(l.b, l.a) -= v;
  }
  // three chords around every middle site; sign +1 on pairs cyclic in X->Y->Z
  constexpr int chords[3][2] = {{BrickHoneycomb::LX, BrickHoneycomb::LY},
                                {BrickHoneycomb::LY, BrickHoneycomb::LZ},
                                {BrickHoneycomb::LX, BrickHoneycomb::LZ}};
  for (int m = 0; m < br.n_sites(); ++m)
    for (const auto& ch : chords) {
      const auto& na = br.nbr[m][ch[0]];
      const auto& nb = br.nbr[m][ch[1]];
      double eps = ((ch[1] - ch[0] + 3) % 3 == 1) ? 1.0 : -1.0;
      double v = -2.0 * kappa * eps * seam(na.wx ^ nb.wx, na.wy ^ nb.wy);
      h.K(na.other, nb.other) += v;
      h.K(nb.other, na.other) -= v;
    }
  return h;
}

// Ground-state two-point matrix G = -K (-K^2)^{-1/2}; antisymmetric with
// G^2 = -1 when gapped. Zero modes (flagged gapless) are projected out.
struct GroundState {
  Eigen::MatrixXd G;
  double energy = 0.0;
  double min_excitation = 0.0;
  bool gapless = false;
};

inline GroundState ground_covariance(const MajoranaHamiltonian& h) {
  Eigen::MatrixXd S = -(h.K * h.K);
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ground_covariance: eigensolver failed");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  GroundState out;
  out.min_excitation = lam(0);
  out.gapless = out.min_excitation < 1e-10;
  out.energy = -lam.sum() / 4.0;
  Eigen::VectorXd inv =
      lam.unaryExpr([](double x) { return x > 1e-10 ? 1.0 / x : 0.0; });
  out.G = -h.K * (es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose());
  out.G = 0.5 * (out.G - out.G.transpose()).eval();
  return out;
}

// Ground energy in each of the four seam sectors. best is the lexicographically
// first sector within tolerance of the minimum, so exact twist degeneracies
// resolve deterministically.
struct SectorScan {
  std::array<std::array<int, 2>, 4> sectors{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  std::array<double, 4> energy{};
  std::array<int, 2> best{0, 0};
};

inline SectorScan scan_sectors(const BrickHoneycomb& br, double J, double kappa) {
  SectorScan out;
  for (int i = 0; i < 4; ++i) {
    MajoranaHamiltonian h = build_hamiltonian(br, J, kappa, out.sectors[i]);
    Eigen::MatrixXd S = -(h.K * h.K);
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    out.energy[i] = -es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum() / 4.0;
  }
  double emin = *std::min_element(out.energy.begin(), out.energy.end());
  double tol = 1e-8 * std::max(1.0, std::abs(emin));
  for (int i = 0; i < 4; ++i)
    if (out.energy[i] <= emin + tol) {
      out.best = out.sectors[i];
      break;
    }
  return out;
}

// Membrane amplitude of a set of blue faces: with m = 3|S| bilinear pairs
// (a', b) listed face-major, f = (-1)^m sgn(pi) Pf(G restricted to the modes
// in ascending order). Independent of face order; the empty set gives 1.
inline LogValue membrane_log(const Eigen::MatrixXd& G, const SuperHoneycomb& sh,
                             std::vector<int> faces) {
  std::sort(faces.begin(), faces.end());
  std::vector<int> seq;
  seq.reserve(6 * faces.size());
  for (size_t i = 0; i < faces.size(); ++i) {
    if (i > 0 && faces[i] == faces[i - 1])
      throw std::invalid_argument("membrane: duplicate face");
    for (const auto& p : sh.face_pairs.at(faces[i])) {
      seq.push_back(p.a_site);
      seq.push_back(p.b_site);
    }
  }
  const int n = int(seq.size());
  long long inversions = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (seq[i] > seq[j]) ++inversions;
  std::vector<int> asc = seq;
  std::sort(asc.begin(), asc.end());
  Eigen::MatrixXd sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub(i, j) = G(asc[i], asc[j]);
  LogValue pf = pfaffian_log(sub);
  int m = int(faces.size());
  if ((3LL * m + inversions) % 2) pf.sign = -pf.sign;
  return pf;
}

inline double membrane(const Eigen::MatrixXd& G, const SuperHoneycomb& sh,
                       const std::vector<int>& faces) {
  return membrane_log(G, sh, faces).value();
}

// sigma(L) for a loop config given as a set of blue edge ids. The loops must
// bound a face set; the interior is the smaller filling, ties toward the side
// holding face 0. Non-contractible or ill-formed configs are rejected.
// value = sign_sigma * pfaffian_abs, and value^2 equals the determinant of the
// restricted covariance block.
struct MembraneWeight {
  double value = 0.0;
  int sign_sigma = 1;
  double pfaffian_abs = 0.0;
  std::vector<int> interior;
};

inline MembraneWeight membrane_weight(const Eigen::MatrixXd& G, const SuperHoneycomb& sh,
                                      const std::vector<int>& loop_edges) {
  const LoopLattice& bl = sh.blue;
  std::vector<char> in_loop(bl.n_edges(), 0);
  for (int e : loop_edges) {
    if (e < 0 || e >= bl.n_edges()) throw std::invalid_argument("loop edge out of range");
    in_loop[e] = 1;
  }
  auto ef = bl.edge_faces();
  std::vector<std::vector<std::pair<int, int>>> adj(bl.n_plaquettes());
  for (int e = 0; e < bl.n_edges(); ++e) {
    adj[ef[e][0]].push_back({ef[e][1], in_loop[e]});
    adj[ef[e][1]].push_back({ef[e][0], in_loop[e]});
  }
  std::vector<int> side(bl.n_plaquettes(), -1);
  std::vector<int> stack{0};
  side[0] = 0;
  while (!stack.empty()) {
    int p = stack.back();
    stack.pop_back();
    for (auto [q, cross] : adj[p]) {
      int want = side[p] ^ cross;
      if (side[q] == -1) {
        side[q] = want;
        stack.push_back(q);
      } else if (side[q] != want) {
        throw std::domain_error(
            "membrane_weight: config does not bound a face set on the torus");
      }
    }
  }
  int ones = 0;
  for (int s : side) ones += s;
  int pick = 2 * ones < bl.n_plaquettes() ? 1 : 2 * ones > bl.n_plaquettes() ? 0 : side[0];
  MembraneWeight out;
  for (int p = 0; p < bl.n_plaquettes(); ++p)
    if (side[p] == pick) out.interior.push_back(p);
  LogValue lv = membrane_log(G, sh, out.interior);
  out.value = lv.value();
  out.sign_sigma = lv.sign == 0 ? 1 : lv.sign;
  out.pfaffian_abs = lv.sign == 0 ? 0.0 : std::exp(lv.log_abs);
  return out;
}

namespace detail {
// least-squares line y = a + b x; returns {a, b}
inline std::array<double, 2> linear_fit(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need two points");
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  double b = (n * sxy - sx * sy) / den;
  return {(sy - b * sx) / n, b};
}
}  // namespace detail

// Decay length of |G| along a row, in cells: slope of log max-element vs
// distance, skipping the contact term at d=1. Returns 0 when the tail is
// entirely below noise.
inline double correlation_length(const Eigen::MatrixXd& G, const SuperHoneycomb& sh) {
  const BrickHoneycomb& br = sh.brick;
  std::vector<double> ds, ls;
  for (int d = 1; d < br.lx / 2; ++d) {
    double m = 0;
    for (int sa = 0; sa < 2; ++sa)
      for (int sb = 0; sb < 2; ++sb)
        m = std::max(m, std::abs(G(br.site(0, 0, sa), br.site(d, 0, sb))));
    if (m > 1e-12) {
      ds.push_back(d);
      ls.push_back(std::log(m));
    }
  }
  if (ds.size() < 3) return 0.0;
  std::vector<double> dx(ds.begin() + 1, ds.end()), ly(ls.begin() + 1, ls.end());
  double slope = detail::linear_fit(dx, ly)[1];
  if (slope >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / slope;
}

// color-0 faces with cell x < D
inline std::vector<int> strip_faces(const SuperHoneycomb& sh, int D) {
  std::vector<int> out;
  for (int f = 0; f < int(sh.face_cell.size()); ++f)
    if (sh.face_cell[f] % sh.brick.lx < D) out.push_back(f);
  return out;
}

// Membrane of the width-D strip: two y-winding loops a distance D apart. The
// strips at D and D +- 1 can coincide, so the value is locally D-independent
// once D exceeds a few decay lengths; below 3 xi the estimate is flagged.
struct DoubleWilson {
  double value = 0.0;
  double xi = 0.0;
  bool short_distance_warning = false;
};

inline DoubleWilson double_wilson_estimator(const Eigen::MatrixXd& G, const SuperHoneycomb& sh,
                                            int D) {
  if (D < 1 || D >= sh.brick.lx)
    throw std::invalid_argument("double_wilson_estimator: D outside (0, lx)");
  DoubleWilson out;
  out.xi = correlation_length(G, sh);
  out.short_distance_warning = double(D) < 3.0 * out.xi;
  out.value = membrane(G, sh, strip_faces(sh, D));
  return out;
}

inline DoubleWilson double_wilson_estimator(const Eigen::MatrixXd& G,
                                            const SuperHoneycomb& sh) {
  return double_wilson_estimator(G, sh, sh.brick.lx / 2);
}

// Membranes of vertical chains of k faces stacked at x = 0; the boundary loop
// has 4k + 2 blue edges. Used to read the internal tension off the decay.
struct ChainPoint {
  int length = 0;
  double f = 0.0;
};

inline std::vector<ChainPoint> vertical_chain_membranes(const Eigen::MatrixXd& G,
                                                        const SuperHoneycomb& sh, int kmax) {
  if (2 * kmax > sh.brick.ly - 2)
    throw std::invalid_argument("vertical_chain_membranes: chain would wrap the torus");
  std::vector<ChainPoint> out;
  std::vector<int> faces;
  for (int k = 1; k <= kmax; ++k) {
    int f = sh.face_of_cell[sh.brick.cell(0, 2 * (k - 1))];
    if (f < 0) throw std::logic_error("chain cell misses the color-0 sublattice");
    faces.push_back(f);
    out.push_back({4 * k + 2, membrane(G, sh, faces)});
  }
  return out;
}

// Loop-weight extraction from a matched torus pair (lx, ly) and (lx, 2 ly):
// the strip value w factorizes into single-loop amplitudes f = sqrt(w), the
// fugacity estimate is w_small / sqrt(w_large), and the internal tension is
// the decay rate of chain membranes against boundary length. A poor
// exponential fit sets the flag.
struct LoopWeightExtraction {
  double n_est = 0.0;
  double t_int = 0.0;
  double fit_residual = 0.0;
  double dw_small = 0.0;
  double dw_large = 0.0;
  bool flagged = false;
};

inline LoopWeightExtraction extract_loop_weight(const Eigen::MatrixXd& G_small,
                                                const SuperHoneycomb& sh_small,
                                                const Eigen::MatrixXd& G_large,
                                                const SuperHoneycomb& sh_large) {
  if (sh_large.brick.lx != sh_small.brick.lx ||
      sh_large.brick.ly != 2 * sh_small.brick.ly)
    throw std::invalid_argument("extract_loop_weight: need (lx, ly) and (lx, 2 ly)");
  LoopWeightExtraction out;
  int D = sh_small.brick.lx / 2;
  out.dw_small = membrane(G_small, sh_small, strip_faces(sh_small, D));
  out.dw_large = membrane(G_large, sh_large, strip_faces(sh_large, D));
  if (out.dw_small <= 0.0 || out.dw_large <= 0.0)
    throw std::domain_error("extract_loop_weight: strip membrane not positive");
  out.n_est = out.dw_small / std::sqrt(out.dw_large);
  int kmax = std::min(5, (sh_large.brick.ly - 2) / 2);
  auto pts = vertical_chain_membranes(G_large, sh_large, kmax);
  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    xs.push_back(double(p.length));
    ys.push_back(std::log(std::abs(p.f)));
  }
  auto [a, b] = detail::linear_fit(xs, ys);
  out.t_int = std::exp(b);
  for (size_t i = 0; i < xs.size(); ++i)
    out.fit_residual = std::max(out.fit_residual, std::abs(a + b * xs[i] - ys[i]));
  out.flagged = out.fit_residual > 0.05;
  return out;
}

// Everything needed downstream of one torus diagonalization: geometry, the
// sector scan, and G in the minimal sector.
struct TorusGround {
  SuperHoneycomb sh;
  MajoranaHamiltonian ham;
  GroundState gs;
  SectorScan scan;
};

inline TorusGround ground_torus(int lx, int ly, double J, double kappa) {
  SuperHoneycomb sh(lx, ly);
  SectorScan scan = scan_sectors(sh.brick, J, kappa);
  MajoranaHamiltonian ham = build_hamiltonian(sh.brick, J, kappa, scan.best);
  GroundState gs = ground_covariance(ham);
  return {std::move(sh), std::move(ham), std::move(gs), scan};
}

// Loop-gas weight over face-fill configs sigma (bit p = blue face p filled):
// W = t_ext^{|L|} |f(interior)| for the wavefunction ensemble and
// t_ext^{|L|} f^2 for the purity ensemble, where L is the boundary of the
// filled set. Interior = smaller of sigma and its complement, ties toward the
// side holding face 0, so W depends on sigma only through L.
struct KitaevWeightModel {
  const SuperHoneycomb* sh = nullptr;
  const Eigen::MatrixXd* G = nullptr;
  double t_ext = 1.0;
  bool purity = false;
  int n_faces = 0, n_edges = 0, n_words = 0;
  std::vector<std::vector<uint64_t>> face_edge_mask;

  KitaevWeightModel(const SuperHoneycomb& s, const Eigen::MatrixXd& g, double text, bool pur)
      : sh(&s), G(&g), t_ext(text), purity(pur) {
    n_faces = s.blue.n_plaquettes();
    n_edges = s.blue.n_edges();
    n_words = (n_faces + 63) / 64;
    int ew = (n_edges + 63) / 64;
    face_edge_mask.assign(n_faces, std::vector<uint64_t>(ew, 0));
    for (int p = 0; p < n_faces; ++p)
      for (int e : s.blue.plaquettes[p]) face_edge_mask[p][e >> 6] ^= 1ull << (e & 63);
  }

  int boundary_length(const std::vector<uint64_t>& filled) const {
    std::vector<uint64_t> acc(face_edge_mask[0].size(), 0);
    for (int p = 0; p < n_faces; ++p)
      if ((filled[p >> 6] >> (p & 63)) & 1)
        for (size_t w = 0; w < acc.size(); ++w) acc[w] ^= face_edge_mask[p][w];
    int c = 0;
    for (uint64_t w : acc) c += std::popcount(w);
    return c;
  }

  std::vector<int> interior_faces(const std::vector<uint64_t>& filled) const {
    int nfill = 0;
    for (uint64_t w : filled) nfill += std::popcount(w);
    bool use_filled =
        2 * nfill < n_faces || (2 * nfill == n_faces && ((filled[0] & 1) != 0));
    std::vector<int> out;
    for (int p = 0; p < n_faces; ++p)
      if ((((filled[p >> 6] >> (p & 63)) & 1) != 0) == use_filled) out.push_back(p);
    return out;
  }

  double log_weight(const std::vector<uint64_t>& filled) const {
    int L = boundary_length(filled);
    LogValue f = membrane_log(*G, *sh, interior_faces(filled));
    if (f.sign == 0) return -std::numeric_limits<double>::infinity();
    double lw = (purity ? 2.0 : 1.0) * f.log_abs;
    if (L > 0) {
      if (t_ext <= 0.0) return -std::numeric_limits<double>::infinity();
      lw += L * std::log(t_ext);
    }
    return lw;
  }
};

// Sampler adapter: run_metropolis sees only the fill pattern; the fermionic
// amplitude is recomputed from scratch on every proposal.
struct KitaevMcModel {
  const KitaevWeightModel* wm = nullptr;
  template <class State>
  double log_weight(const State& s) const {
    return wm->log_weight(s.sigma);
  }
};

}  // namespace loopgas
