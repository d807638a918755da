#include <catch2/catch_amalgamated.hpp>

#include "rmscat/rng.hpp"
#include "rmscat/se2.hpp"

using namespace rmscat;

TEST_CASE("group axioms hold on random elements") {
  SplitMix64 rng(41);
  for (int t = 0; t < 1000; ++t) {
    RigidMotion g1(rng.normal(), rng.normal(), rng.uniform() * 2 * kPi);
    RigidMotion g2(rng.normal(), rng.normal(), rng.uniform() * 2 * kPi);
    RigidMotion g3(rng.normal(), rng.normal(), rng.uniform() * 2 * kPi);
    // associativity
    RigidMotion a = g_product(g_product(g1, g2), g3);
    RigidMotion b = g_product(g1, g_product(g2, g3));
    REQUIRE(std::abs(a.v1 - b.v1) < 1e-12);
    REQUIRE(std::abs(a.v2 - b.v2) < 1e-12);
    double dt = std::fmod(std::abs(a.theta - b.theta), 2 * kPi);
    REQUIRE(std::min(dt, 2 * kPi - dt) < 1e-12);
    // inverse
    RigidMotion e = g_product(g1, g_inverse(g1));
    REQUIRE(std::abs(e.v1) < 1e-12);
    REQUIRE(std::abs(e.v2) < 1e-12);
    double et = std::fmod(e.theta, 2 * kPi);
    REQUIRE(std::min(et, 2 * kPi - et) < 1e-12);
    // identity
    RigidMotion id(0, 0, 0);
    RigidMotion ge = g_product(g1, id);
    REQUIRE(std::abs(ge.v1 - g1.v1) < 1e-12);
    REQUIRE(std::abs(ge.theta - g1.theta) < 1e-12);
  }
}

TEST_CASE("the group is non-commutative") {
  RigidMotion g1(1.0, 0.0, 0.0);
  RigidMotion g2(0.0, 0.0, kPi / 2.0);
  RigidMotion ab = g_product(g1, g2), ba = g_product(g2, g1);
  REQUIRE((std::abs(ab.v1 - ba.v1) > 0.5 || std::abs(ab.v2 - ba.v2) > 0.5));
}

TEST_CASE("group action on points matches product composition") {
  SplitMix64 rng(42);
  for (int t = 0; t < 100; ++t) {
    RigidMotion g1(rng.normal(), rng.normal(), rng.uniform() * 2 * kPi);
    RigidMotion g2(rng.normal(), rng.normal(), rng.uniform() * 2 * kPi);
    double u1 = rng.normal(), u2 = rng.normal();
    auto inner = g_act_point(g2, u1, u2);
    auto lhs = g_act_point(g1, inner[0], inner[1]);
    auto rhs = g_act_point(g_product(g1, g2), u1, u2);
    REQUIRE(std::abs(lhs[0] - rhs[0]) < 1e-12);
    REQUIRE(std::abs(lhs[1] - rhs[1]) < 1e-12);
  }
}

TEST_CASE("reference convolution against a Dirac input reproduces the filter") {
  SplitMix64 rng(43);
  const int n = 8, T = 4;
  SE2Volume x(n, n, T, 2 * kPi), y(n, n, T, 2 * kPi);
  x.at(0, 0, 0) = 1.0;
  for (auto& sl : y.slices)
    for (auto& z : sl.samples) z = cplx(rng.normal(), rng.normal());
  SE2Volume out = se2_convolve_reference(x, y);
  // x = delta at group identity: out = y * dtheta
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        REQUIRE(std::abs(out.at(r, c, t) - y.at(r, c, t) * x.theta_step()) < 1e-9);
}

TEST_CASE("reference convolution is left-invariant at lattice-exact angles") {
  SplitMix64 rng(44);
  const int n = 8, T = 4;  // theta step pi/2: exact grid rotations
  SE2Volume x(n, n, T, 2 * kPi), y(n, n, T, 2 * kPi);
  for (auto& sl : x.slices)
    for (auto& z : sl.samples) z = rng.normal();
  for (auto& sl : y.slices)
    for (auto& z : sl.samples) z = rng.normal();
  SE2Volume wx = se2_convolve_reference(x, y);
  SE2Volume xs = se2_translate(x, 3, 2, 1);
  SE2Volume wxs = se2_convolve_reference(xs, y);
  SE2Volume want = se2_translate(wx, 3, 2, 1);
  double err = 0;
  for (int t = 0; t < T; ++t)
    for (size_t i = 0; i < wxs.slices[t].size(); ++i)
      err = std::max(err, std::abs(wxs.slices[t].samples[i] - want.slices[t].samples[i]));
  REQUIRE(err < 1e-9);
}

TEST_CASE("group translation by the identity is the identity") {
  SplitMix64 rng(45);
  SE2Volume x(8, 8, 4, kPi);
  for (auto& sl : x.slices)
    for (auto& z : sl.samples) z = rng.normal();
  SE2Volume y = se2_translate(x, 0, 0, 0);
  for (int t = 0; t < 4; ++t)
    for (size_t i = 0; i < y.slices[t].size(); ++i)
      REQUIRE(std::abs(y.slices[t].samples[i] - x.slices[t].samples[i]) < 1e-12);
}

TEST_CASE("bilinear sampling is exact at integer coordinates") {
  SplitMix64 rng(46);
  ComplexGrid g(8, 8);
  for (auto& z : g.samples) z = cplx(rng.normal(), rng.normal());
  for (int r = -8; r < 16; ++r)
    for (int c = -8; c < 16; ++c)
      REQUIRE(std::abs(detail::sample_periodic_bilinear(g, double(c), double(r)) -
                       g.at((r + 16) % 8, (c + 16) % 8)) < 1e-12);
}
