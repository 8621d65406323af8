#include <doctest.h>

#include "disent/entanglement.hpp"
#include "disent/hilbert.hpp"
#include "disent/twospin.hpp"

using namespace disent;

TEST_CASE("product_state basic shapes") {
  Eigen::Vector2cd u(1, 0), v(1, 0);
  auto s = product_state(u, v);
  CHECK(s.c(0, 0) == Complex(1, 0));
  CHECK(s.c(0, 1) == Complex(0, 0));
  CHECK(s.c(1, 0) == Complex(0, 0));
  CHECK(s.c(1, 1) == Complex(0, 0));

  Eigen::Vector2cd up(1, 1);
  auto s2 = product_state(up, v);
  CHECK(std::abs(s2.c(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s2.c(1, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s2.c(0, 1)) == 0.0);
}

TEST_CASE("product_state rejects zero factors") {
  Eigen::Vector2cd z = Eigen::Vector2cd::Zero(), v(1, 0);
  CHECK_THROWS_WITH_AS(product_state(z, v),
                       doctest::Contains("degenerate factor"),
                       std::invalid_argument);
}

TEST_CASE("product states carry zero entanglement") {
  for (int n1 = 2; n1 <= 4; ++n1)
    for (int n2 = 2; n2 <= 4; ++n2)
      for (int k = 0; k < 100; ++k) {
        auto s = random_product_state(n1, n2, 1000 * n1 + 100 * n2 + k);
        CHECK(q_witness(s) <= 1e-14);
      }
}

TEST_CASE("random_state is deterministic and normalized") {
  auto a = random_state(2, 2, 7);
  auto b = random_state(2, 2, 7);
  CHECK(a.c == b.c);
  auto c = random_state(3, 4, 123);
  CHECK(std::abs(c.norm() - 1.0) < 1e-14);
}

TEST_CASE("random_state mean entanglement matches the Haar oracle run") {
  // empirical interval frozen from a 1e4-sample purity-oracle run
  double acc = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) acc += q_purity(random_state(2, 2, 50000 + k));
  const double mean = acc / n;
  CHECK(mean >= 0.19);
  CHECK(mean <= 0.21);
}

TEST_CASE("flatten/unflatten round trip, row-major layout") {
  for (int n1 = 2; n1 <= 6; ++n1)
    for (int n2 = 2; n2 <= 6; ++n2) {
      auto s = random_state(n1, n2, 17 * n1 + n2);
      const StateVector v = flatten(s);
      CHECK(unflatten(v, n1, n2) == s.c);
      // k1-major ordering
      CHECK(v(1 * n2 + 0) == s.c(1, 0));
      CHECK(v(0 * n2 + 1) == s.c(0, 1));
    }
}

TEST_CASE("apply_local: identity, norm and Q preservation") {
  auto s = random_state(3, 2, 42);
  const auto id1 = Eigen::MatrixXcd::Identity(3, 3);
  const auto id2 = Eigen::MatrixXcd::Identity(2, 2);
  CHECK(apply_local(s, id1, id2).c == s.c);

  for (int k = 0; k < 50; ++k) {
    const int n1 = 2 + k % 3, n2 = 2 + (k / 3) % 3;
    auto st = random_state(n1, n2, 900 + k);
    const auto u1 = random_unitary(n1, 1700 + k);
    const auto u2 = random_unitary(n2, 1800 + k);
    auto tr = apply_local(st, u1, u2);
    CHECK(std::abs(tr.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(q_witness(tr) - q_witness(st)) <= 1e-12);
    CHECK(std::abs(q_purity(tr) - q_purity(st)) <= 1e-12);
  }
}

TEST_CASE("apply_local rejects non-unitary input") {
  auto s = random_state(2, 2, 5);
  Eigen::Matrix2cd bad = Eigen::Matrix2cd::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(apply_local(s, bad, Eigen::Matrix2cd::Identity()),
                  std::invalid_argument);
}

TEST_CASE("drive-frame rotation round trip") {
  TwoSpinParams p;
  p.omega_a = 1.0;
  p.omega_b = 2.0;
  p.omega_1 = 0.5;
  p.delta = 0.3;
  auto s = random_state(2, 2, 11);
  const Eigen::Matrix2cd u = u_b1(0.73, p);
  auto fwd = apply_local(s, Eigen::Matrix2cd::Identity(), u);
  auto back = apply_local(fwd, Eigen::Matrix2cd::Identity(),
                          Eigen::Matrix2cd(u.adjoint()));
  CHECK((back.c - s.c).norm() <= 1e-12);
}
