#include <catch2/catch_amalgamated.hpp>

#include "oracle.hpp"
#include "prbox/qstate.hpp"

using namespace prbox;
using Catch::Approx;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TEST_CASE("tensor of basis and superposition states", "[qstate]") {
  PureState up = PureState::up(), down = PureState::down();
  auto uu = tensor(up, up);
  CHECK(uu.amplitudes() == std::vector<cxd>{1, 0, 0, 0});

  PureState plus(1, {kInvSqrt2, kInvSqrt2});
  auto up_plus = tensor(up, plus);
  CHECK(std::abs(up_plus[0] - kInvSqrt2) < 1e-15);
  CHECK(std::abs(up_plus[1] - kInvSqrt2) < 1e-15);
  CHECK(std::abs(up_plus[2]) < 1e-15);
  CHECK(std::abs(up_plus[3]) < 1e-15);
}

TEST_CASE("tensor preserves the norm for random factors", "[qstate]") {
  SplitMix64 g(101);
  for (int i = 0; i < 100; ++i) {
    auto a = oracle::random_state(1 + static_cast<int>(g.next_below(2)), g);
    auto b = oracle::random_state(1 + static_cast<int>(g.next_below(2)), g);
    auto t = tensor(a, b);
    double n = 0;
    for (const auto& amp : t.amplitudes()) n += std::norm(amp);
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-12);
  }
}

TEST_CASE("tensor is associative", "[qstate]") {
  // exact for basis states
  auto u = PureState::up(), d = PureState::down();
  CHECK(tensor(tensor(u, d), u).amplitudes() ==
        tensor(u, tensor(d, u)).amplitudes());
  // within tolerance generally
  SplitMix64 g(55);
  for (int i = 0; i < 20; ++i) {
    auto a = oracle::random_state(1, g);
    auto b = oracle::random_state(1, g);
    auto c = oracle::random_state(1, g);
    auto lhs = tensor(tensor(a, b), c);
    auto rhs = tensor(a, tensor(b, c));
    for (std::size_t k = 0; k < lhs.dim(); ++k)
      CHECK(std::abs(lhs[k] - rhs[k]) < 1e-12);
  }
}

TEST_CASE("direction unitary special values", "[qstate]") {
  auto id = direction_unitary({0, 0});
  CHECK(std::abs(id(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(id(0, 1)) < 1e-15);

  auto flip = direction_unitary({pi, 0});
  CHECK(std::abs(flip(0, 0)) < 1e-15);
  CHECK(std::abs(flip(0, 1) + 1.0) < 1e-15);
  CHECK(std::abs(flip(1, 0) - 1.0) < 1e-15);
  CHECK(std::abs(flip(1, 1)) < 1e-15);

  // evaluated by hand: cos(pi/4) on the diagonal, +i sin(pi/4) off it
  auto v = direction_unitary({pi / 2, pi / 2});
  CHECK(std::abs(v(0, 0) - kInvSqrt2) < 1e-12);
  CHECK(std::abs(v(0, 1) - cxd(0, kInvSqrt2)) < 1e-12);
  CHECK(std::abs(v(1, 0) - cxd(0, kInvSqrt2)) < 1e-12);
  CHECK(std::abs(v(1, 1) - kInvSqrt2) < 1e-12);
}

TEST_CASE("direction unitary is unitary for random directions", "[qstate]") {
  SplitMix64 g(7);
  for (int i = 0; i < 10000; ++i) {
    auto d = oracle::random_direction(g);
    CHECK_NOTHROW(direction_unitary(d));  // the constructor checks U U* = I
  }
}

TEST_CASE("measurement directions canonicalize", "[qstate]") {
  MeasurementDirection d(-pi / 2, 7 * pi);
  CHECK(d.omega == Approx(3 * pi / 2));
  CHECK(d.phi == Approx(pi));
  CHECK_THROWS_AS(MeasurementDirection(std::nan(""), 0),
                  std::invalid_argument);

  // folding flips to the same projector pair
  auto f = d.folded();
  CHECK(f.omega <= pi + 1e-15);
  auto p1 = local_projector(1, 1, d, Spin::up);
  auto p2 = local_projector(1, 1, f, Spin::up);
  CHECK(p1.max_abs_diff(p2) < 1e-12);
}

TEST_CASE("local projector special cases", "[qstate]") {
  auto pz = local_projector(1, 1, MeasurementDirection::z(), Spin::up);
  CHECK(std::abs(pz(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(pz(1, 1)) < 1e-15);

  auto p2 = local_projector(2, 2, MeasurementDirection::z(), Spin::down);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double expect = (i == j && (i == 1 || i == 3)) ? 1.0 : 0.0;
      CHECK(std::abs(p2(i, j) - expect) < 1e-15);
    }

  CHECK_THROWS_AS(local_projector(2, 3, MeasurementDirection::z(), Spin::up),
                  std::out_of_range);
}

TEST_CASE("local projectors are idempotent and resolve the identity",
          "[qstate]") {
  SplitMix64 g(13);
  for (int i = 0; i < 200; ++i) {
    int n = 1 + static_cast<int>(g.next_below(3));
    int k = 1 + static_cast<int>(g.next_below(n));
    auto d = oracle::random_direction(g);
    auto p = local_projector(n, k, d, Spin::up);
    auto q = local_projector(n, k, d, Spin::down);

    // P^2 = P
    std::size_t dim = p.dim();
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) {
        cxd acc(0);
        for (std::size_t m = 0; m < dim; ++m) acc += p(r, m) * p(m, c);
        CHECK(std::abs(acc - p(r, c)) < 1e-12);
      }

    // P + P_complement = identity
    Operator sum = p;
    sum += q;
    CHECK(sum.max_abs_diff(Operator::identity(n)) < 1e-12);
  }
}

TEST_CASE("bell basis", "[qstate]") {
  auto basis = bell_basis();
  CHECK(std::abs(basis[0][0] - kInvSqrt2) < 1e-15);
  CHECK(std::abs(basis[0][3] - kInvSqrt2) < 1e-15);
  CHECK(std::abs(basis[0][1]) < 1e-15);

  CHECK(std::abs(inner_product(basis[0], basis[3])) < 1e-15);

  // Gram matrix is the identity
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cxd g = inner_product(basis[i], basis[j]);
      CHECK(std::abs(g - (i == j ? cxd(1) : cxd(0))) < 1e-12);
    }
}

TEST_CASE("schmidt decomposition of simple states", "[qstate]") {
  auto prod = schmidt_decompose(tensor(PureState::up(), PureState::up()));
  CHECK(prod.coefficients[0] == Approx(1.0).margin(1e-12));
  CHECK(prod.coefficients[1] == Approx(0.0).margin(1e-12));

  auto maxent = schmidt_decompose(PureState(2, {kInvSqrt2, 0, 0, kInvSqrt2}));
  CHECK(maxent.coefficients[0] == Approx(kInvSqrt2).margin(1e-12));
  CHECK(maxent.coefficients[1] == Approx(kInvSqrt2).margin(1e-12));
  // degenerate spectrum of a diagonal state keeps the computational basis
  CHECK(std::abs(std::abs(maxent.basis_a(0, 0)) - 1.0) < 1e-10);
}

TEST_CASE("schmidt decomposition reconstructs random states", "[qstate]") {
  SplitMix64 g(29);
  for (int i = 0; i < 200; ++i) {
    auto s = oracle::random_state(2, g);
    auto sd = schmidt_decompose(s);
    CHECK(std::abs(sd.coefficients[0] * sd.coefficients[0] +
                   sd.coefficients[1] * sd.coefficients[1] - 1.0) < 1e-12);
    CHECK(sd.coefficients[0] >= sd.coefficients[1]);
    CHECK(phase_aligned_distance(schmidt_reconstruct(sd), s) < 1e-10);
  }
}

TEST_CASE("state construction validates", "[qstate]") {
  CHECK_THROWS_AS(PureState(2, {1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(PureState(1, {0.9, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(PureState::basis_state(1, 5), std::out_of_range);
}

TEST_CASE("states equal up to a global phase", "[qstate]") {
  SplitMix64 g(31);
  auto s = oracle::random_state(2, g);
  std::vector<cxd> rotated;
  for (const auto& a : s.amplitudes()) rotated.push_back(a * std::polar(1.0, 1.234));
  PureState t(2, rotated);
  CHECK(equal_up_to_global_phase(s, t));
  CHECK_FALSE(equal_up_to_global_phase(s, oracle::random_state(2, g)));
}
