#include <catch2/catch_amalgamated.hpp>

#include "loopgas/exact.hpp"
#include "loopgas/spectra.hpp"

using namespace loopgas;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dephased code spectrum: dense and chain routes agree") {
  LoopLattice sq = square_lattice(2, 2);
  for (double p : {0.0, 0.1, 0.25, 0.5}) {
    SpectrumResult dense = toric_code_spectrum_dense(sq, p);
    SpectrumResult chains = toric_code_spectrum_chains(sq, p);
    REQUIRE(dense.eigenvalues.size() == 256);
    // chain buckets carry the nonzero part of the spectrum; pad with zeros
    std::vector<double> padded = chains.eigenvalues;
    padded.resize(dense.eigenvalues.size(), 0.0);
    std::sort(padded.rbegin(), padded.rend());
    double worst = 0.0;
    for (size_t i = 0; i < padded.size(); ++i)
      worst = std::max(worst, std::abs(padded[i] - dense.eigenvalues[i]));
    INFO("p=" << p);
    CHECK(worst < 1e-10);
    KahanSum tr;
    for (double v : chains.eigenvalues) tr.add(v);
    CHECK_THAT(tr.value(), WithinRel(1.0, 1e-12));
    CHECK_THAT(dense.entropy, WithinAbs(chains.entropy, 1e-9));
  }
}

TEST_CASE("dephased code spectrum: limits and monotonicity") {
  LoopLattice sq = square_lattice(2, 2);
  CHECK_THAT(toric_code_spectrum_chains(sq, 0.0).eigenvalues.front(),
             WithinRel(1.0, 1e-12));
  CHECK_THAT(toric_code_spectrum_chains(sq, 0.0).entropy, WithinAbs(0.0, 1e-12));
  // at p = 1/2 every chain is equally likely: uniform over all 32 sectors
  SpectrumResult flat = toric_code_spectrum_chains(sq, 0.5);
  size_t nonzero = 0;
  for (double v : flat.eigenvalues)
    if (v > 1e-14) ++nonzero;
  CHECK(nonzero == 32);
  CHECK_THAT(flat.eigenvalues.front(), WithinRel(1.0 / 32.0, 1e-12));
  CHECK_THAT(flat.entropy, WithinRel(std::log(32.0), 1e-12));
  double prev = -1.0;
  for (double p : {0.0, 0.1, 0.25, 0.5}) {
    double s = toric_code_spectrum_chains(sq, p).entropy;
    CHECK(s >= prev - 1e-12);
    prev = s;
  }
}

TEST_CASE("sign-resolved spectrum via the transform") {
  LoopLattice hc = honeycomb_lattice(2, 2);
  double t = 0.55, d = std::sqrt(2.0);
  SpectrumResult spec = eta_spectrum_maximal(hc, t, d, true);
  REQUIRE(spec.eigenvalues.size() == size_t(1) << 12);

  // all-plus signs dominate and reproduce the sign-free sum
  double clean = std::ldexp(partition_function_topological(hc, t, d, true), -12);
  CHECK_THAT(spec.eigenvalues.front(), WithinRel(clean, 1e-13));

  KahanSum total;
  for (double v : spec.eigenvalues) total.add(v);
  CHECK_THAT(total.value(), WithinRel(1.0, 1e-12));
}

TEST_CASE("sign-resolved spectrum of the two-config ensemble") {
  LoopLattice hc = honeycomb_lattice(2, 2);
  EdgeMask hex = boundary(hc, uint64_t{1});
  double t = 0.4, d = 1.8;
  std::vector<EdgeMask> ensemble{EdgeMask{}, hex};
  std::vector<double> z = eta_spectrum_from_configs(hc, ensemble, t, d);
  double hi = (1.0 + std::pow(t, 6) * d) / 4096.0;
  double lo = (1.0 - std::pow(t, 6) * d) / 4096.0;
  size_t n_hi = 0, n_lo = 0;
  KahanSum plus_class;
  for (size_t k = 0; k < z.size(); ++k) {
    if (std::abs(z[k] - hi) < 1e-15)
      ++n_hi;
    else if (std::abs(z[k] - lo) < 1e-15)
      ++n_lo;
    if (std::popcount(uint64_t(k) & hex.w[0]) % 2 == 0) plus_class.add(z[k]);
  }
  CHECK(n_hi == 2048);
  CHECK(n_lo == 2048);
  // summed over the even sign class this is the (1 + t^6 d)/2 branch
  CHECK_THAT(plus_class.value(), WithinRel((1.0 + std::pow(t, 6) * d) / 2.0, 1e-12));
}

TEST_CASE("size caps") {
  CHECK_THROWS_AS(eta_spectrum_maximal(honeycomb_lattice(3, 3), 0.3, 1.0, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(toric_code_spectrum_dense(square_lattice(3, 3), 0.1),
                  std::invalid_argument);
}
