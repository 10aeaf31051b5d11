#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "loopgas/qdouble.hpp"

using namespace loopgas;
using Catch::Matchers::WithinRel;

namespace {

std::multiset<int> class_sizes(const std::vector<std::vector<int>>& classes) {
  std::multiset<int> out;
  for (const auto& c : classes) out.insert(int(c.size()));
  return out;
}

}  // namespace

TEST_CASE("group construction and anyon data") {
  for (const char* name : {"Z2", "Z3", "S3", "S4", "D4", "D5", "D6"}) {
    auto g = build_group(name);
    // orbit-stabilizer for every element
    for (int x = 0; x < g.order; ++x)
      REQUIRE(g.class_size(x) * int(g.centralizer(x).size()) == g.order);
  }
  REQUIRE(build_group("S3").order == 6);
  REQUIRE(build_group("S4").order == 24);
  REQUIRE(build_group("D6").order == 12);
  REQUIRE_THROWS_AS(build_group("E8"), std::invalid_argument);
}

TEST_CASE("order-two classes match the flux-anyon table") {
  REQUIRE(class_sizes(order_two_classes(build_group("Z2"))) == std::multiset<int>{1});
  REQUIRE(class_sizes(order_two_classes(build_group("Z3"))) == std::multiset<int>{});
  REQUIRE(class_sizes(order_two_classes(build_group("S3"))) == std::multiset<int>{3});
  REQUIRE(class_sizes(order_two_classes(build_group("S4"))) == std::multiset<int>{3, 6});
  REQUIRE(class_sizes(order_two_classes(build_group("D4"))) == std::multiset<int>{1, 2, 2});
  REQUIRE(class_sizes(order_two_classes(build_group("D5"))) == std::multiset<int>{5});
  REQUIRE(class_sizes(order_two_classes(build_group("D6"))) == std::multiset<int>{1, 3, 3});
}

TEST_CASE("group text round-trip") {
  auto s3 = build_group("S3");
  std::istringstream in(group_to_text(s3));
  auto back = group_from_text(in, "S3-copy");
  REQUIRE(back.order == s3.order);
  REQUIRE(back.mult == s3.mult);
  REQUIRE(back.identity == s3.identity);
  std::istringstream bad("3\n0 1 2\n1 2 0\n");
  REQUIRE_THROWS_AS(group_from_text(bad), std::invalid_argument);
}

TEST_CASE("minimal hexagon overlap, S3") {
  auto G = build_group("S3");
  int g = -1;  // any involution
  for (int x = 0; x < G.order; ++x)
    if (G.is_involution(x)) g = x;
  REQUIRE(G.class_size(g) == 3);

  auto patch = FluxFreePatch::build(triangles_around_vertex(1, 1));
  REQUIRE(patch.n_edges == 12);
  REQUIRE(patch.free_edges.size() == 6);
  auto red = hexagon_red(patch, 1, 1);
  REQUIRE(red.size() == 6);

  auto count = overlap_bruteforce(patch, G, g, red);
  REQUIRE(count.total == 46656);  // 6^6: every free assignment propagates
  // f = 3^(1-4) = 1/27, exact
  REQUIRE(count.equals_power(3, 1, 4));
  REQUIRE_THAT(count.value(), WithinRel(1.0 / 27.0, 1e-14));

  // projector form agrees, and stays invariant when any one pinned bond's
  // check is dropped (one projector per loop is redundant)
  auto proj = overlap_bruteforce_projectors(patch, G, g, red);
  REQUIRE(proj.accepted == count.accepted);
  REQUIRE(proj.total == count.total);
  std::vector<int> pinned = {patch.edge(0, 0, 0), patch.edge(0, 1, 0), patch.edge(0, 0, 1),
                             patch.edge(1, 0, 1)};
  for (int bond : pinned) {
    auto dropped = overlap_bruteforce_projectors(patch, G, g, red, bond);
    REQUIRE(dropped.accepted == count.accepted);
  }
}

TEST_CASE("open and branched strings have zero overlap") {
  auto G = build_group("S3");
  int g = -1;
  for (int x = 0; x < G.order; ++x)
    if (G.is_involution(x)) g = x;
  auto patch = FluxFreePatch::build(triangles_around_vertex(1, 1));
  auto red = hexagon_red(patch, 1, 1);

  auto open_red = red;
  open_red.erase(patch.edge(1, 1, 2));
  REQUIRE(overlap_bruteforce(patch, G, g, open_red).accepted == 0);

  auto branched = red;
  branched.insert(patch.edge(2, 1, 1));  // third red bond in one triangle
  REQUIRE(overlap_bruteforce(patch, G, g, branched).accepted == 0);
}

TEST_CASE("Z2 strings keep full overlap") {
  auto G = build_group("Z2");
  auto patch = FluxFreePatch::build(triangles_around_vertex(1, 1));
  auto red = hexagon_red(patch, 1, 1);
  auto count = overlap_bruteforce(patch, G, 1, red);
  REQUIRE(count.accepted == count.total);
}

TEST_CASE("figure-eight overlap has cyclomatic number two") {
  auto G = build_group("S3");
  int g = -1;
  for (int x = 0; x < G.order; ++x)
    if (G.is_involution(x)) g = x;
  auto refs = triangles_around_vertex(1, 1);
  auto more = triangles_around_vertex(2, 2);
  refs.insert(refs.end(), more.begin(), more.end());
  auto patch = FluxFreePatch::build(refs);
  auto red = hexagon_red(patch, 1, 1);
  for (int e : hexagon_red(patch, 2, 2)) {
    if (red.count(e))
      red.erase(e);  // the shared diagonal cancels
    else
      red.insert(e);
  }
  REQUIRE(red.size() == 10);
  auto count = overlap_bruteforce(patch, G, g, red);
  REQUIRE(count.equals_power(3, 2, 8));  // f = 3^2 / 3^8
  REQUIRE_THAT(count.value(), WithinRel(std::pow(3.0, -6.0), 1e-12));
}

TEST_CASE("torus shadow and closed-form weight") {
  auto tri = triangular_lattice(4, 4);
  auto eid = [&](int x, int y, int t) { return 3 * ((x & 3) + 4 * (y & 3)) + t; };
  // hexagon of bonds around vertex (1,1)
  EdgeMask red = EdgeMask::from_edges({eid(0, 1, 0), eid(1, 1, 0), eid(1, 0, 1), eid(1, 1, 1),
                                       eid(0, 0, 2), eid(1, 1, 2)});
  REQUIRE(flux_string_closed(tri, red));
  auto sh = shadow(tri, red);
  auto sq = square_lattice(4, 4);
  auto sq_eid = [&](int x, int y, int t) { return 2 * (x + 4 * y) + t; };
  EdgeMask expect = EdgeMask::from_edges(
      {sq_eid(0, 0, 0), sq_eid(0, 1, 0), sq_eid(0, 0, 1), sq_eid(1, 0, 1)});
  REQUIRE(sh == expect);
  REQUIRE(is_closed(sq, sh));
  REQUIRE(cyclomatic_number(sq, sh) == 1);

  auto G = build_group("S3");
  int g = -1;
  for (int x = 0; x < G.order; ++x)
    if (G.is_involution(x)) g = x;
  REQUIRE_THAT(weight_quantum_double(tri, red, G, g).value(), WithinRel(1.0 / 27.0, 1e-13));

  // figure-eight through vertex (2,2): shadow C=2, |shadow|=8
  EdgeMask red2 = EdgeMask::from_edges({eid(1, 2, 0), eid(2, 2, 0), eid(2, 1, 1), eid(2, 2, 1),
                                        eid(1, 1, 2), eid(2, 2, 2)});
  EdgeMask fig8 = red ^ red2;
  REQUIRE(fig8.count() == 10);
  auto sh8 = shadow(tri, fig8);
  REQUIRE(sh8.count() == 8);
  REQUIRE(cyclomatic_number(sq, sh8) == 2);
  REQUIRE_THAT(weight_quantum_double(tri, fig8, G, g).value(),
               WithinRel(9.0 / 6561.0, 1e-13));

  // open string: zero, and shadow refuses it
  EdgeMask open_red = red ^ EdgeMask::from_edges({eid(1, 1, 2)});
  REQUIRE(weight_quantum_double(tri, open_red, G, g).sign == 0);
  REQUIRE_THROWS_AS(shadow(tri, open_red), std::invalid_argument);
  // identity or non-involution rejected
  REQUIRE_THROWS_AS(weight_quantum_double(tri, red, G, G.identity), std::invalid_argument);
}

TEST_CASE("induced loop-model parameters") {
  auto s3 = build_group("S3");
  int g = -1;
  for (int x = 0; x < s3.order; ++x)
    if (s3.is_involution(x)) g = x;
  auto pur = qd_purity_params(s3, g, 0.5);
  REQUIRE_THAT(pur.t, WithinRel(1.0 / 9.0, 1e-14));
  REQUIRE(pur.N == 9.0);
  REQUIRE(pur.regime == PhaseRegime::short_loop);
  REQUIRE(qd_purity_params(s3, g, 0.0).t == 0.0);

  auto maxdec = qd_max_decoherence_params(s3, g);
  REQUIRE_THAT(maxdec.t, WithinRel(1.0 / 3.0, 1e-14));
  REQUIRE(maxdec.N == 3.0);
  REQUIRE(maxdec.regime == PhaseRegime::short_loop);

  auto z2 = build_group("Z2");
  auto z2p = qd_max_decoherence_params(z2, 1);
  REQUIRE(z2p.t == 1.0);
  REQUIRE(z2p.N == 1.0);
  REQUIRE(z2p.regime == PhaseRegime::dense);
  REQUIRE_THAT(qd_purity_params(z2, 1, 0.5).t, WithinRel(1.0, 1e-14));

  auto d4 = build_group("D4");
  int refl = -1;  // a class-size-2 involution
  for (int x = 0; x < d4.order; ++x)
    if (d4.is_involution(x) && d4.class_size(x) == 2) refl = x;
  auto crit = qd_max_decoherence_params(d4, refl);
  REQUIRE(crit.t == 0.5);
  REQUIRE(crit.N == 2.0);
  REQUIRE(crit.regime == PhaseRegime::critical);
}
