#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "loopgas/pfaffian.hpp"

using namespace loopgas;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd random_skew(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      a(i, j) = gauss(rng);
      a(j, i) = -a(i, j);
    }
  return a;
}

}  // namespace

TEST_CASE("pfaffian base cases") {
  REQUIRE(pfaffian(Eigen::MatrixXd::Zero(0, 0)) == 1.0);
  Eigen::MatrixXd a(2, 2);
  a << 0, 3.5, -3.5, 0;
  REQUIRE_THAT(pfaffian(a), WithinRel(3.5, 1e-14));
  a << 0, -2.0, 2.0, 0;
  REQUIRE_THAT(pfaffian(a), WithinRel(-2.0, 1e-14));
  REQUIRE(pfaffian(Eigen::MatrixXd::Zero(3, 3)) == 0.0);
  REQUIRE(pfaffian(Eigen::MatrixXd::Zero(4, 4)) == 0.0);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  REQUIRE_THROWS_AS(pfaffian(bad), std::invalid_argument);
}

TEST_CASE("pfaffian of canonical block matrix") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    int pairs = 1 + int(rng() % 5);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * pairs, 2 * pairs);
    double prod = 1.0;
    for (int i = 0; i < pairs; ++i) {
      double v = u(rng);
      a(2 * i, 2 * i + 1) = v;
      a(2 * i + 1, 2 * i) = -v;
      prod *= v;
    }
    REQUIRE_THAT(pfaffian(a), WithinRel(prod, 1e-12));
  }
}

TEST_CASE("pfaffian squared equals determinant") {
  std::mt19937_64 rng(12345);
  for (int rep = 0; rep < 200; ++rep) {
    int n = 2 * (1 + int(rng() % 6));
    Eigen::MatrixXd a = random_skew(n, rng);
    double pf = pfaffian(a);
    double det = a.determinant();
    REQUIRE(std::abs(pf * pf - det) <= 1e-9 * std::max(std::abs(det), 1.0));
  }
}

TEST_CASE("pfaffian permutation parity") {
  std::mt19937_64 rng(99);
  Eigen::MatrixXd a = random_skew(6, rng);
  // transposing two modes flips the sign
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(6, 6);
  p.row(1).swap(p.row(4));
  Eigen::MatrixXd b = p * a * p.transpose();
  REQUIRE_THAT(pfaffian(b), WithinRel(-pfaffian(a), 1e-11));
}

TEST_CASE("pfaffian log form handles scale") {
  // 40 modes with entries ~1e3: value overflows naive products, log form stays finite
  std::mt19937_64 rng(5);
  Eigen::MatrixXd a = 1e3 * random_skew(40, rng);
  LogValue lv = pfaffian_log(a);
  REQUIRE(std::isfinite(lv.log_abs));
  REQUIRE(lv.sign != 0);
  // det = pf^2 in log space: log|det| = 2 log|pf|
  double logdet = 0.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  for (int i = 0; i < 40; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  REQUIRE_THAT(2.0 * lv.log_abs, WithinRel(logdet, 1e-10));
}
