#include <doctest.h>

#include "disent/entanglement.hpp"
#include "disent/hilbert.hpp"

using namespace disent;

namespace {

BipartiteState bell_state() {
  BipartiteState s;
  s.c.resize(2, 2);
  s.c << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
  return s;
}

BipartiteState two_spin(Complex a, Complex b, Complex c, Complex d) {
  BipartiteState s;
  s.c.resize(2, 2);
  s.c << a, b, c, d;
  return s;
}

}  // namespace

TEST_CASE("reduced purity: product, Bell, and both-sided equality") {
  auto p = random_product_state(3, 3, 2);
  CHECK(std::abs(reduced_purity(p) - 1.0) < 1e-13);
  CHECK(std::abs(reduced_purity(bell_state()) - 0.5) < 1e-14);

  // purity of the other subsystem, via C^H C, agrees
  auto s = random_state(3, 3, 31);
  const Eigen::MatrixXcd gram2 = s.c.adjoint() * s.c;
  const double p2 = (gram2 * gram2).trace().real();
  CHECK(std::abs(reduced_purity(s) - p2) < 1e-12);
}

TEST_CASE("reduced purity rejects unnormalized states") {
  BipartiteState s;
  s.c = Eigen::MatrixXcd::Ones(2, 2);
  CHECK_THROWS_AS(reduced_purity(s), std::invalid_argument);
  CHECK_THROWS_AS(q_witness(s), std::invalid_argument);
}

TEST_CASE("witness enumeration: counts and ordering") {
  CHECK(enumerate_witnesses(random_state(2, 2, 1)).size() == 1);
  CHECK(enumerate_witnesses(random_state(2, 3, 1)).size() == 3);
  CHECK(enumerate_witnesses(random_state(3, 3, 1)).size() == 9);
  CHECK(enumerate_witnesses(random_state(4, 4, 1)).size() == 36);

  const auto ws = enumerate_witnesses(random_state(2, 3, 9));
  CHECK(ws[0].k2p == 0);
  CHECK(ws[0].k2pp == 1);
  CHECK(ws[1].k2p == 0);
  CHECK(ws[1].k2pp == 2);
  CHECK(ws[2].k2p == 1);
  CHECK(ws[2].k2pp == 2);
}

TEST_CASE("two-spin witness structure") {
  const Complex a(0.3, 0.1), b(-0.2, 0.4), c(0.5, -0.3), d(0.1, 0.55);
  auto s = two_spin(a, b, c, d);
  s.c /= s.c.norm();
  const auto ws = enumerate_witnesses(s);
  REQUIRE(ws.size() == 1);
  const Witness& w = ws.front();
  CHECK(w.k1p == 0);
  CHECK(w.k1pp == 1);
  CHECK(w.k2p == 0);
  CHECK(w.k2pp == 1);
  const Complex dn = s.c(1, 1), cn = s.c(1, 0);
  CHECK(std::abs(w.vec(0) - std::conj(dn)) < 1e-15);
  CHECK(std::abs(w.vec(1) + std::conj(cn)) < 1e-15);
  CHECK(std::abs(w.vec(2)) == 0.0);
  CHECK(std::abs(w.vec(3)) == 0.0);
  CHECK(std::abs(w.norm_sq() - (std::norm(cn) + std::norm(dn))) < 1e-15);
  // overlap is the determinant of C
  const Complex det = s.c(0, 0) * s.c(1, 1) - s.c(0, 1) * s.c(1, 0);
  CHECK(std::abs(w.overlap(flatten(s)) - det) < 1e-15);
}

TEST_CASE("two-spin closed form Q = 2|ad - bc|^2") {
  for (int k = 0; k < 200; ++k) {
    auto s = random_state(2, 2, 400 + k);
    const Complex det = s.c(0, 0) * s.c(1, 1) - s.c(0, 1) * s.c(1, 0);
    CHECK(std::abs(q_witness(s) - 2.0 * std::norm(det)) <= 1e-14);
  }
  CHECK(std::abs(q_witness(bell_state()) - 0.5) < 1e-15);
}

TEST_CASE("Q is bounded by 1/2 for two spins") {
  for (int k = 0; k < 1000; ++k)
    CHECK(q_witness(random_state(2, 2, 7000 + k)) <= 0.5 + 1e-12);
}

TEST_CASE("witness-sum route equals the purity oracle") {
  double r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int n1 = 2 + k % 3, n2 = 2 + (k / 3) % 3;
    auto s = random_state(n1, n2, 20000 + k);
    r = std::max(r, std::abs(q_witness(s) - q_purity(s)));
  }
  CHECK(r <= 1e-12);
  // larger dimensions
  for (int n1 = 5; n1 <= 6; ++n1)
    for (int n2 = 2; n2 <= 6; ++n2)
      for (int k = 0; k < 25; ++k) {
        auto s = random_state(n1, n2, 31000 + 100 * n1 + 10 * n2 + k);
        CHECK(std::abs(q_witness(s) - q_purity(s)) <= 1e-12);
      }
}

TEST_CASE("every witness overlap vanishes on product states") {
  double r = 0.0;
  for (int n1 = 2; n1 <= 4; ++n1)
    for (int n2 = 2; n2 <= 4; ++n2)
      for (int k = 0; k < 30; ++k) {
        auto s = random_product_state(n1, n2, 600 * n1 + 40 * n2 + k);
        const StateVector psi = flatten(s);
        for (const auto& w : enumerate_witnesses(s))
          r = std::max(r, std::abs(w.overlap(psi)));
      }
  CHECK(r <= 1e-14);
}
