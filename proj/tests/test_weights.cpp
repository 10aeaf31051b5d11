#include <catch2/catch_amalgamated.hpp>

#include "loopgas/weights.hpp"

using namespace loopgas;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("critical tensions") {
  REQUIRE_THAT(t_c_honeycomb(1.0), WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
  REQUIRE_THAT(t_c_honeycomb(2.0), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
  REQUIRE_THAT(t_c_honeycomb(std::sqrt(2.0)), WithinAbs(0.6013448869350453, 1e-12));
  REQUIRE_THAT(t_self_dual_square(), WithinAbs(0.41421356237309515, 1e-15));
}

TEST_CASE("decoherence tension map and inverse") {
  REQUIRE(external_tension(0.0) == 0.0);
  REQUIRE_THAT(external_tension(0.5), WithinAbs(1.0, 1e-15));
  // the self-dual square tension corresponds to p ~ 0.178
  REQUIRE_THAT(error_rate_for_tension(t_self_dual_square()), WithinAbs(0.178, 0.001));
  for (double p : {0.01, 0.1, 0.25, 0.4, 0.49}) {
    REQUIRE_THAT(error_rate_for_tension(external_tension(p)), WithinAbs(p, 1e-12));
  }
  for (double t : {0.05, 0.3, 0.7, 0.99}) {
    REQUIRE_THAT(external_tension(error_rate_for_tension(t)), WithinAbs(t, 1e-12));
  }
  REQUIRE_THROWS_AS(external_tension(0.7), std::invalid_argument);
}

TEST_CASE("topological and abelian weights") {
  auto lat = honeycomb_lattice(3, 3);
  EdgeMask empty;
  REQUIRE(weight_topological(lat, empty, 0.5, 2.0).value() == 1.0);
  REQUIRE(weight_abelian(lat, empty) == 1);

  auto hex = boundary(lat, 1);
  REQUIRE(weight_abelian(lat, hex) == 1);
  REQUIRE(weight_abelian(lat, EdgeMask::from_edges({0})) == 0);
  REQUIRE_THAT(weight_topological(lat, hex, 0.5, 2.0).value(), WithinRel(1.0 / 32.0, 1e-14));
  for (double d : {1.5, 2.0, 3.0}) {
    REQUIRE_THAT(weight_topological(lat, hex, 1.0 / d, d).value(),
                 WithinRel(std::pow(d, -5.0), 1e-13));
  }
  REQUIRE(weight_topological(lat, hex, 0.0, 2.0).value() == 0.0);
  REQUIRE(weight_topological(lat, empty, 0.0, 2.0).value() == 1.0);
  // N=1 reduces to the plain tension weight
  REQUIRE_THAT(weight_topological(lat, hex, 0.37, 1.0).value(),
               WithinRel(std::pow(0.37, 6.0), 1e-14));

  // factorization over disjoint components
  int far = -1;
  for (int p = 1; p < lat.n_plaquettes(); ++p)
    if ((hex & boundary(lat, uint64_t(1) << p)).count() == 0) far = p;
  auto both = boundary(lat, 1 | (uint64_t(1) << far));
  double w1 = weight_topological(lat, hex, 0.4, 1.7).value();
  double w2 = weight_topological(lat, boundary(lat, uint64_t(1) << far), 0.4, 1.7).value();
  REQUIRE_THAT(weight_topological(lat, both, 0.4, 1.7).value(), WithinRel(w1 * w2, 1e-13));
}

TEST_CASE("purity weight") {
  auto lat = honeycomb_lattice(3, 3);
  auto hex = boundary(lat, 1);
  REQUIRE(weight_purity(LoopStats{}, 0.3, 0.5, 2.0).value() == 1.0);
  LoopScratch sc(lat.n_vertices);
  auto st = loop_stats(lat, hex, sc);
  // p=1/2: decoherence factor is exactly 1 per edge
  REQUIRE_THAT(weight_purity(st, 0.5, 0.5, 2.0).value(),
               WithinRel(std::pow(0.5, 12.0) * 4.0, 1e-13));
  double f = external_tension(0.3);
  REQUIRE_THAT(weight_purity(st, 0.3, 0.5, 2.0).value(),
               WithinRel(std::pow(f, 6.0) * std::pow(0.5, 12.0) * 4.0, 1e-13));
  REQUIRE(weight_purity(st, 0.0, 0.5, 2.0).value() == 0.0);
}

TEST_CASE("signed weight") {
  auto lat = honeycomb_lattice(3, 3);
  auto hex = boundary(lat, 1);
  std::vector<int8_t> eta(lat.n_edges(), 1);
  double base = weight_topological(lat, hex, 0.5, 2.0).value();
  REQUIRE_THAT(weight_signed(lat, hex, eta, 0.5, 2.0).value(), WithinRel(base, 1e-14));
  int e0 = -1, e1 = -1;
  hex.for_each_bit([&](int e) { (e0 < 0 ? e0 : e1) = e; });
  eta[e0] = -1;
  REQUIRE_THAT(weight_signed(lat, hex, eta, 0.5, 2.0).value(), WithinRel(-base, 1e-14));
  eta[e1] = -1;
  REQUIRE_THAT(weight_signed(lat, hex, eta, 0.5, 2.0).value(), WithinRel(base, 1e-14));
  // magnitude is eta-independent
  REQUIRE_THAT(std::abs(weight_signed(lat, hex, eta, 0.5, 2.0).value()), WithinRel(base, 1e-14));
}

TEST_CASE("renyi summand") {
  auto lat = honeycomb_lattice(3, 3);
  auto hex = boundary(lat, 1);
  EdgeMask empty;
  REQUIRE_THAT(renyi_summand(lat, {hex, hex}, 0.5, 2.0).value(),
               WithinRel(std::pow(0.5, 12.0) * 4.0, 1e-13));
  REQUIRE(renyi_summand(lat, {empty, empty, empty}, 0.5, 2.0).value() == 1.0);
  REQUIRE_THAT(renyi_summand(lat, {hex, hex, empty}, 0.5, 2.0).value(),
               WithinRel(std::pow(0.5, 12.0) * 4.0, 1e-13));
  REQUIRE_THROWS_AS(renyi_summand(lat, {hex, empty}, 0.5, 2.0), std::invalid_argument);
}
