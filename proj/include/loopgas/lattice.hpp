#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopgas {

// Oriented edge tail->head. wrap flags mark crossings of the periodic seams;
// their mod-2 sums over a config give the homology class.
struct Edge {
  int tail = -1;
  int head = -1;
  int8_t wrap_x = 0;
  int8_t wrap_y = 0;
};

enum class LatticeKind { honeycomb, square, triangular, super_honeycomb };

inline const char* kind_name(LatticeKind k) {
  switch (k) {
    case LatticeKind::honeycomb: return "honeycomb";
    case LatticeKind::square: return "square";
    case LatticeKind::triangular: return "triangular";
    case LatticeKind::super_honeycomb: return "super-honeycomb-embedding";
  }
  return "?";
}

// Periodic lattice on the torus. Edge ids are row-major by cell with a fixed
// sublattice/type order, so configs are portable across runs.
// At degenerate dims (l=1) plaquette lists may repeat an edge; boundary uses
// multiset symmetric difference, so such pairs cancel.
struct LoopLattice {
  LatticeKind kind = LatticeKind::honeycomb;
  int lx = 0, ly = 0;
  int n_vertices = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> plaquettes;
  std::vector<int> ref_cycle_x;  // winding (1,0) reference cycle
  std::vector<int> ref_cycle_y;  // winding (0,1)

  int n_edges() const { return int(edges.size()); }
  int n_plaquettes() const { return int(plaquettes.size()); }

  // plaquette pair adjacent to each edge, i.e. the dual-lattice edge. Incidences
  // counted with multiplicity; on the torus every edge has exactly two.
  std::vector<std::array<int, 2>> edge_faces() const {
    std::vector<std::array<int, 2>> faces(edges.size(), {-1, -1});
    for (int p = 0; p < n_plaquettes(); ++p)
      for (int e : plaquettes[p]) {
        if (faces[e][0] < 0)
          faces[e][0] = p;
        else if (faces[e][1] < 0)
          faces[e][1] = p;
        else
          throw std::logic_error("edge borders more than two plaquettes");
      }
    for (auto& f : faces)
      if (f[1] < 0) throw std::logic_error("edge borders fewer than two plaquettes");
    return faces;
  }
};

namespace detail {
inline int wrap(int a, int l) { return ((a % l) + l) % l; }
}

// Honeycomb torus, lx x ly cells, two sites (A, B) and three edges per cell.
// Edge id = 3*cell + type with types z: A(x,y)-B(x,y), x: B(x,y)-A(x+1,y),
// y: B(x,y)-A(x,y+1); cell = x + lx*y; vertex ids A = 2*cell, B = 2*cell+1.
inline LoopLattice honeycomb_lattice(int lx, int ly) {
  if (lx < 1 || ly < 1) throw std::invalid_argument("honeycomb: need lx, ly >= 1");
  LoopLattice lat;
  lat.kind = LatticeKind::honeycomb;
  lat.lx = lx;
  lat.ly = ly;
  lat.n_vertices = 2 * lx * ly;
  auto cell = [&](int x, int y) { return detail::wrap(x, lx) + lx * detail::wrap(y, ly); };
  auto A = [&](int x, int y) { return 2 * cell(x, y); };
  auto B = [&](int x, int y) { return 2 * cell(x, y) + 1; };
  auto eid = [&](int x, int y, int type) { return 3 * cell(x, y) + type; };
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      lat.edges.push_back({A(x, y), B(x, y), 0, 0});
      lat.edges.push_back({B(x, y), A(x + 1, y), int8_t(x + 1 == lx ? 1 : 0), 0});
      lat.edges.push_back({B(x, y), A(x, y + 1), 0, int8_t(y + 1 == ly ? 1 : 0)});
    }
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x)
      lat.plaquettes.push_back({eid(x, y, 0), eid(x, y, 1), eid(x + 1, y - 1, 2),
                                eid(x + 1, y - 1, 0), eid(x, y - 1, 1), eid(x, y - 1, 2)});
  for (int x = 0; x < lx; ++x) {
    lat.ref_cycle_x.push_back(eid(x, 0, 0));
    lat.ref_cycle_x.push_back(eid(x, 0, 1));
  }
  for (int y = 0; y < ly; ++y) {
    lat.ref_cycle_y.push_back(eid(0, y, 0));
    lat.ref_cycle_y.push_back(eid(0, y, 2));
  }
  return lat;
}

// Square torus. Edge id = 2*cell + type, types h: (x,y)-(x+1,y), u: (x,y)-(x,y+1).
inline LoopLattice square_lattice(int lx, int ly) {
  if (lx < 1 || ly < 1) throw std::invalid_argument("square: need lx, ly >= 1");
  LoopLattice lat;
  lat.kind = LatticeKind::square;
  lat.lx = lx;
  lat.ly = ly;
  lat.n_vertices = lx * ly;
  auto cell = [&](int x, int y) { return detail::wrap(x, lx) + lx * detail::wrap(y, ly); };
  auto eid = [&](int x, int y, int type) { return 2 * cell(x, y) + type; };
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      lat.edges.push_back({cell(x, y), cell(x + 1, y), int8_t(x + 1 == lx ? 1 : 0), 0});
      lat.edges.push_back({cell(x, y), cell(x, y + 1), 0, int8_t(y + 1 == ly ? 1 : 0)});
    }
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x)
      lat.plaquettes.push_back({eid(x, y, 0), eid(x + 1, y, 1), eid(x, y + 1, 0), eid(x, y, 1)});
  for (int x = 0; x < lx; ++x) lat.ref_cycle_x.push_back(eid(x, 0, 0));
  for (int y = 0; y < ly; ++y) lat.ref_cycle_y.push_back(eid(0, y, 1));
  return lat;
}

// Brick-wall honeycomb torus carrying the spin model whose A-sublattice forms
// the triangular superlattice of the embedding. Cells (x,y), two sites per cell
// (A=0, B=1), site id = 2*cell + sub, cell = x + lx*y. Typed links, A listed
// first: X A(x,y)-B(x,y); Y A(x+1,y)-B(x,y); Z A(sig_y(x),y+1)-B(x,y) with
// sig_y(x) = x on even rows, x+1 on odd rows. Hexagon (x,y) walk
// [B(x,y), A(x+1,y), B(x+1,y), A(sig(x+1),y+1), B(sig(x),y+1), A(sig(x),y+1)]
// has link types [Y,X,Z,Y,X,Z] between consecutive sites, so the outward link
// type at walk position i is fixed: (X,Z,Y,X,Z,Y). Hexagon 3-coloring
// (x + 2*(y&1)) mod 3 needs 3 | lx and 2 | ly; the embedding contract demands
// 6 | lx and 2 | ly.
struct BrickHoneycomb {
  enum { LX = 0, LY = 1, LZ = 2 };
  int lx = 0, ly = 0;
  struct Link {
    int a = -1, b = -1;  // a: A-site id, b: B-site id
    int type = 0;
    int8_t wx = 0, wy = 0;
  };
  std::vector<Link> links;  // cell-major, types X,Y,Z per cell
  struct Nbr {
    int other = -1;
    int8_t wx = 0, wy = 0;
  };
  std::vector<std::array<Nbr, 3>> nbr;       // per site, per link type
  std::vector<std::array<int, 6>> hexagons;  // per cell, walk order above
  std::vector<int> c0_cell;                  // per site: cell of its color-0 hexagon

  int n_sites() const { return 2 * lx * ly; }
  int cell(int x, int y) const { return detail::wrap(x, lx) + lx * detail::wrap(y, ly); }
  int site(int x, int y, int s) const { return 2 * cell(x, y) + s; }
  int sig(int y, int x) const { return (detail::wrap(y, ly) % 2 == 0) ? x : x + 1; }
  int color(int x, int y) const {
    return (detail::wrap(x, lx) + 2 * (detail::wrap(y, ly) & 1)) % 3;
  }
  static constexpr std::array<int, 6> out_types() { return {LX, LZ, LY, LX, LZ, LY}; }

  explicit BrickHoneycomb(int lx_, int ly_) : lx(lx_), ly(ly_) {
    if (lx < 6 || lx % 6 != 0 || ly < 2 || ly % 2 != 0)
      throw std::invalid_argument("super-honeycomb-embedding: need 6 | lx and 2 | ly");
    nbr.assign(n_sites(), {});
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x) {
        int b = site(x, y, 1);
        int sx = sig(y, x);
        links.push_back({site(x, y, 0), b, LX, 0, 0});
        links.push_back({site(x + 1, y, 0), b, LY, int8_t(x + 1 >= lx ? 1 : 0), 0});
        links.push_back({site(sx, y + 1, 0), b, LZ, int8_t(sx >= lx ? 1 : 0),
                         int8_t(y + 1 >= ly ? 1 : 0)});
      }
    for (const Link& l : links) {
      nbr[l.a][l.type] = {l.b, l.wx, l.wy};
      nbr[l.b][l.type] = {l.a, l.wx, l.wy};
    }
    hexagons.resize(lx * ly);
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x) {
        int sx = sig(y, x), sx1 = sig(y, x + 1);
        hexagons[cell(x, y)] = {site(x, y, 1),      site(x + 1, y, 0), site(x + 1, y, 1),
                                site(sx1, y + 1, 0), site(sx, y + 1, 1), site(sx, y + 1, 0)};
      }
    // the three hexagons at a site have distinct colors; store the color-0 one
    c0_cell.assign(n_sites(), -1);
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x)
        if (color(x, y) == 0)
          for (int s : hexagons[cell(x, y)]) {
            if (c0_cell[s] != -1) throw std::logic_error("site on two color-0 hexagons");
            c0_cell[s] = cell(x, y);
          }
    for (int s = 0; s < n_sites(); ++s)
      if (c0_cell[s] < 0) throw std::logic_error("site misses its color-0 hexagon");
  }

  // the three hexagons containing A-site (x,y), as unreduced cell coordinates
  std::array<std::array<int, 2>, 3> a_site_hexagons(int x, int y) const {
    bool odd = detail::wrap(y, ly) % 2 != 0;
    if (odd) return {{{x - 1, y}, {x - 1, y - 1}, {x, y - 1}}};
    return {{{x - 1, y}, {x - 2, y - 1}, {x - 1, y - 1}}};
  }
};

// Blue super-honeycomb lattice of the embedding: vertices are the color-1/2
// hexagons, one edge per A-site (cell) joining its two non-0 hexagons, faces
// are the color-0 hexagons. Edge id = A-site cell; face edge lists run around
// the hexagon boundary. V - E + F = 0 on the torus.
inline LoopLattice super_honeycomb_lattice(int lx, int ly) {
  BrickHoneycomb br(lx, ly);
  LoopLattice lat;
  lat.kind = LatticeKind::super_honeycomb;
  lat.lx = lx;
  lat.ly = ly;
  std::vector<int> vertex_of_cell(lx * ly, -1);
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x)
      if (br.color(x, y) != 0) vertex_of_cell[br.cell(x, y)] = lat.n_vertices++;
  lat.edges.resize(lx * ly);
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      auto hs = br.a_site_hexagons(x, y);
      std::vector<std::array<int, 2>> ends;
      for (auto& h : hs)
        if (br.color(h[0], h[1]) != 0) ends.push_back(h);
      if (ends.size() != 2) throw std::logic_error("A-site without two blue endpoints");
      // wrap parity of the two-leg path endpoint -> A-site -> endpoint
      auto crossed_x = [&](const std::array<int, 2>& h) { return h[0] < 0 ? 1 : 0; };
      auto crossed_y = [&](const std::array<int, 2>& h) { return h[1] < 0 ? 1 : 0; };
      Edge e;
      e.tail = vertex_of_cell[br.cell(ends[0][0], ends[0][1])];
      e.head = vertex_of_cell[br.cell(ends[1][0], ends[1][1])];
      e.wrap_x = int8_t(crossed_x(ends[0]) ^ crossed_x(ends[1]));
      e.wrap_y = int8_t(crossed_y(ends[0]) ^ crossed_y(ends[1]));
      lat.edges[br.cell(x, y)] = e;
    }
  // faces: color-0 hexagons in cell order; boundary edges alternate the
  // out-edge at each B-corner with the corner A-sites
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      if (br.color(x, y) != 0) continue;
      const auto& hx = br.hexagons[br.cell(x, y)];
      auto ot = BrickHoneycomb::out_types();
      std::vector<int> es;
      for (int i = 0; i < 6; ++i) {
        int s = hx[i];
        if (i % 2 == 0) {  // B-corner: the outward edge's A-site
          int ap = br.nbr[s][ot[i]].other;
          es.push_back(ap / 2);
        } else {  // corner A-site
          es.push_back(s / 2);
        }
      }
      lat.plaquettes.push_back(es);
    }
  // reference winding cycles by BFS over (vertex, wrap parities)
  auto find_cycle = [&](int want_wx, int want_wy) {
    int V = lat.n_vertices;
    std::vector<std::vector<std::pair<int, int>>> adj(V);  // (edge id, other end)
    for (int e = 0; e < lat.n_edges(); ++e) {
      adj[lat.edges[e].tail].push_back({e, lat.edges[e].head});
      adj[lat.edges[e].head].push_back({e, lat.edges[e].tail});
    }
    std::vector<int> par_edge(4 * V, -1), par_state(4 * V, -1);
    std::vector<char> seen(4 * V, 0);
    std::vector<int> queue{0};  // state = 4*v + 2*wx + wy, start (v=0, 0, 0)
    seen[0] = 1;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int st = queue[qi];
      int v = st / 4, px = (st / 2) % 2, py = st % 2;
      for (auto [e, w] : adj[v]) {
        int nst = 4 * w + 2 * (px ^ lat.edges[e].wrap_x) + (py ^ lat.edges[e].wrap_y);
        if (seen[nst]) continue;
        seen[nst] = 1;
        par_edge[nst] = e;
        par_state[nst] = st;
        queue.push_back(nst);
      }
    }
    int target = 4 * 0 + 2 * want_wx + want_wy;
    if (!seen[target]) throw std::logic_error("no winding cycle found");
    std::vector<int> cyc;
    for (int st = target; st != 0; st = par_state[st]) cyc.push_back(par_edge[st]);
    return cyc;
  };
  lat.ref_cycle_x = find_cycle(1, 0);
  lat.ref_cycle_y = find_cycle(0, 1);
  return lat;
}

inline LoopLattice honeycomb_lattice(int lx, int ly);
inline LoopLattice square_lattice(int lx, int ly);
inline LoopLattice triangular_lattice(int lx, int ly);

inline LoopLattice build_lattice(LatticeKind kind, int lx, int ly) {
  switch (kind) {
    case LatticeKind::honeycomb: return honeycomb_lattice(lx, ly);
    case LatticeKind::square: return square_lattice(lx, ly);
    case LatticeKind::triangular: return triangular_lattice(lx, ly);
    case LatticeKind::super_honeycomb: return super_honeycomb_lattice(lx, ly);
  }
  throw std::invalid_argument("build_lattice: unknown lattice kind");
}

// Triangular torus (square lattice plus up-right diagonals). Edge id = 3*cell +
// type, types h: (x,y)-(x+1,y), u: (x,y)-(x,y+1), d: (x,y)-(x+1,y+1). Two
// triangle plaquettes per cell: lower-right then upper-left.
inline LoopLattice triangular_lattice(int lx, int ly) {
  if (lx < 1 || ly < 1) throw std::invalid_argument("triangular: need lx, ly >= 1");
  LoopLattice lat;
  lat.kind = LatticeKind::triangular;
  lat.lx = lx;
  lat.ly = ly;
  lat.n_vertices = lx * ly;
  auto cell = [&](int x, int y) { return detail::wrap(x, lx) + lx * detail::wrap(y, ly); };
  auto eid = [&](int x, int y, int type) { return 3 * cell(x, y) + type; };
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      int8_t wx = int8_t(x + 1 == lx ? 1 : 0);
      int8_t wy = int8_t(y + 1 == ly ? 1 : 0);
      lat.edges.push_back({cell(x, y), cell(x + 1, y), wx, 0});
      lat.edges.push_back({cell(x, y), cell(x, y + 1), 0, wy});
      lat.edges.push_back({cell(x, y), cell(x + 1, y + 1), wx, wy});
    }
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      lat.plaquettes.push_back({eid(x, y, 0), eid(x + 1, y, 1), eid(x, y, 2)});
      lat.plaquettes.push_back({eid(x, y, 1), eid(x, y + 1, 0), eid(x, y, 2)});
    }
  for (int x = 0; x < lx; ++x) lat.ref_cycle_x.push_back(eid(x, 0, 0));
  for (int y = 0; y < ly; ++y) lat.ref_cycle_y.push_back(eid(0, y, 1));
  return lat;
}

}  // namespace loopgas
