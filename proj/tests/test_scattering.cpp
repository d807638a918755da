#include <catch2/catch_amalgamated.hpp>

#include "rmscat/rng.hpp"
#include "rmscat/scattering.hpp"

using namespace rmscat;

namespace {

Image2D random_image(int n, SplitMix64& rng) {
  Image2D x(n, n);
  for (auto& v : x.samples) v = rng.normal();
  return x;
}

double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double l2(const std::vector<double>& a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("constant input: only the zeroth layer is nonzero") {
  Image2D x(32, 32);
  for (auto& v : x.samples) v = 0.75;
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 4;
  cfg.K = 1;
  for (auto variant : {0, 1}) {
    ScatteringOutput out = variant ? rigid_motion_scattering(x, cfg) : translation_scattering(x, cfg);
    for (const auto& e : out.entries) {
      if (e.m == 0) {
        // S0 = constant x window gain
        double lo = 1e300, hi = -1e300;
        for (const auto& z : e.data.slices[0].samples) {
          lo = std::min(lo, z.real());
          hi = std::max(hi, z.real());
        }
        REQUIRE(hi - lo < 1e-10);
        REQUIRE(hi > 0.1);
      } else {
        for (const auto& sl : e.data.slices)
          for (const auto& z : sl.samples) REQUIRE(std::abs(z) <= 1e-8);
      }
    }
  }
}

TEST_CASE("translation path counts follow the frequency-increasing rule") {
  SplitMix64 rng(61);
  Image2D x = random_image(32, rng);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 8;
  cfg.oversampling = 0;
  ScatteringOutput out = translation_scattering(x, cfg);
  int s0 = 0, s1 = 0, s2 = 0;
  for (const auto& e : out.entries) {
    s0 += e.m == 0;
    s1 += e.m == 1;
    s2 += e.m == 2;
    if (e.m == 2) REQUIRE(e.j2 > e.j1);
  }
  REQUIRE(s0 == 1);
  REQUIRE(s1 == 24);
  REQUIRE(s2 == 192);
}

TEST_CASE("feature vector ordering, length and determinism") {
  SplitMix64 rng(62);
  Image2D x = random_image(32, rng);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 8;
  cfg.K = 3;
  ScatteringOutput out = translation_scattering(x, cfg);
  auto v1 = feature_vector(out, Pooling::global_average);
  auto v2 = feature_vector(out, Pooling::global_average);
  REQUIRE(v1 == v2);  // bit-identical
  REQUIRE(v1.size() == out.entries.size());
  // canonical ordering: ascending (m, j1, t1, j2, t2)
  for (size_t i = 1; i < out.entries.size(); ++i) {
    const auto& a = out.entries[i - 1];
    const auto& b = out.entries[i];
    REQUIRE(std::tie(a.m, a.j1, a.t1, a.j2, a.l2) <= std::tie(b.m, b.j1, b.t1, b.j2, b.l2));
  }
  ScatteringOutput empty;
  REQUIRE(feature_vector(empty, Pooling::global_average).empty());
}

TEST_CASE("globally pooled coefficients of layers m >= 1 are nonnegative") {
  SplitMix64 rng(63);
  Image2D x = random_image(32, rng);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 4;
  cfg.K = 2;
  for (auto variant : {0, 1}) {
    ScatteringOutput out = variant ? rigid_motion_scattering(x, cfg) : translation_scattering(x, cfg);
    for (const auto& e : out.entries)
      if (e.m >= 1) REQUIRE(e.mean() >= -1e-12);
  }
}

TEST_CASE("non-expansiveness at maximal oversampling, both variants") {
  SplitMix64 rng(64);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 4;
  cfg.K = 2;
  cfg.oversampling = 3;
  for (int trial = 0; trial < 5; ++trial) {
    Image2D x = random_image(32, rng), y = random_image(32, rng);
    double dxy = 0;
    for (size_t i = 0; i < x.size(); ++i) dxy += (x.samples[i] - y.samples[i]) * (x.samples[i] - y.samples[i]);
    dxy = std::sqrt(dxy);
    REQUIRE(scattering_distance(translation_scattering(x, cfg), translation_scattering(y, cfg)) <=
            dxy * (1 + 1e-9));
    REQUIRE(scattering_distance(rigid_motion_scattering(x, cfg), rigid_motion_scattering(y, cfg)) <=
            dxy * (1 + 1e-9));
  }
}

TEST_CASE("scattering energy never exceeds the input energy") {
  SplitMix64 rng(65);
  Image2D x = random_image(32, rng);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 4;
  cfg.K = 2;
  cfg.oversampling = 3;
  double nx = sq_norm(to_complex(x));
  REQUIRE(scattering_sq_norm(translation_scattering(x, cfg)) <= nx * (1 + 1e-9));
  REQUIRE(scattering_sq_norm(rigid_motion_scattering(x, cfg)) <= nx * (1 + 1e-9));
}

TEST_CASE("K = 0 rigid-motion outputs shift exactly under quarter turns") {
  SplitMix64 rng(66);
  const int n = 32, C = 8;
  Image2D x = random_image(n, rng);
  Image2D xr = detail::rotate90_ccw(x);
  ScatteringConfig cfg;
  cfg.J = 2;
  cfg.C = C;
  cfg.K = 0;
  cfg.oversampling = 8;
  ScatteringOutput a = rigid_motion_scattering(x, cfg);
  ScatteringOutput b = rigid_motion_scattering(xr, cfg);
  double err = 0;
  for (size_t i = 0; i < a.entries.size(); ++i) {
    const SE2Volume& va = a.entries[i].data;
    const SE2Volume& vb = b.entries[i].data;
    int shift = int(std::lround(kPi / 2 / va.theta_step())) % va.n_theta;
    for (int t = 0; t < vb.n_theta; ++t) {
      int ts = (t - shift + va.n_theta) % va.n_theta;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          err = std::max(err, std::abs(vb.at(r, c, t).real() - va.at(n - 1 - c, r, ts).real()));
    }
  }
  REQUIRE(err <= 1e-10);
}

TEST_CASE("maximal angular averaging gives quarter-turn invariant features") {
  SplitMix64 rng(67);
  const int n = 32;
  Image2D x = random_image(n, rng);
  Image2D xr = detail::rotate90_ccw(x);
  ScatteringConfig cfg;
  cfg.J = 2;
  cfg.C = 8;
  cfg.K = 3;  // log2(C): maximal angular averaging
  cfg.oversampling = 8;
  // interior crop to half dims excludes periodization effects at the boundary
  auto cropped_features = [&](const ScatteringOutput& out) {
    std::vector<double> v;
    for (const auto& e : out.entries) {
      double s = 0;
      size_t cnt = 0;
      for (const auto& sl : e.data.slices) {
        ComplexGrid c = center_crop(sl, sl.height / 2, sl.width / 2);
        for (const auto& z : c.samples) s += z.real();
        cnt += c.size();
      }
      v.push_back(s / double(cnt));
    }
    return v;
  };
  auto fa = cropped_features(rigid_motion_scattering(x, cfg));
  auto fb = cropped_features(rigid_motion_scattering(xr, cfg));
  REQUIRE(l2(fa, fb) <= 1e-3 * l2(fa));
}

TEST_CASE("deformation stability probe") {
  SplitMix64 rng(68);
  const int n = 32;
  Image2D x = random_image(n, rng);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 4;
  cfg.oversampling = 3;

  SECTION("zero field returns 0 by convention") {
    DeformationField tau;
    tau.tau_row = Image2D(n, n);
    tau.tau_col = Image2D(n, n);
    REQUIRE(deformation_stability_probe(x, tau, cfg) == 0.0);
  }

  SECTION("constant integer shift: numerator vanishes under global pooling") {
    DeformationField tau;
    tau.tau_row = Image2D(n, n);
    tau.tau_col = Image2D(n, n);
    for (auto& v : tau.tau_row.samples) v = 4.0;
    for (auto& v : tau.tau_col.samples) v = -7.0;
    tau.grad_norm = 0.0;
    double ratio = deformation_stability_probe(x, tau, cfg);
    // numerator = ratio * ||x|| * 2^-J ||tau||_inf
    double tau_inf = std::hypot(4.0, 7.0);
    double numerator = ratio * std::sqrt(sq_norm(to_complex(x))) * tau_inf / 8.0;
    REQUIRE(numerator <= 1e-6);
  }

  SECTION("halving a smooth field's amplitude does not inflate the ratio") {
    int worse = 0;
    const int trials = 5;
    for (int trial = 0; trial < trials; ++trial) {
      DeformationField tau;
      tau.tau_row = Image2D(n, n);
      tau.tau_col = Image2D(n, n);
      double a1 = 2 * rng.uniform() - 1, a2 = 2 * rng.uniform() - 1;
      double p1 = rng.uniform() * 2 * kPi, p2 = rng.uniform() * 2 * kPi;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          tau.tau_row.at(r, c) = 0.8 * a1 * std::sin(2 * kPi * c / n + p1);
          tau.tau_col.at(r, c) = 0.8 * a2 * std::sin(2 * kPi * r / n + p2);
        }
      }
      tau.grad_norm = 0.8 * (std::abs(a1) + std::abs(a2)) * 2 * kPi / n;
      double r1 = deformation_stability_probe(x, tau, cfg);
      for (auto& v : tau.tau_row.samples) v *= 0.5;
      for (auto& v : tau.tau_col.samples) v *= 0.5;
      tau.grad_norm *= 0.5;
      double r2 = deformation_stability_probe(x, tau, cfg);
      if (r2 > 1.5 * r1) ++worse;
    }
    REQUIRE(worse <= trials / 2);  // median over trials does not inflate
  }
}

TEST_CASE("cascade backend agrees with direct for both variants") {
  SplitMix64 rng(69);
  Image2D x = random_image(32, rng);
  ScatteringConfig cfg;
  cfg.J = 3;
  cfg.C = 4;
  cfg.K = 1;
  cfg.oversampling = 1;
  ScatteringOutput td = translation_scattering(x, cfg);
  ScatteringOutput rd = rigid_motion_scattering(x, cfg);
  cfg.backend = RMBackend::cascade;
  ScatteringOutput tc = translation_scattering(x, cfg);
  ScatteringOutput rc = rigid_motion_scattering(x, cfg);
  REQUIRE(scattering_distance(td, tc) <= 1e-10 * std::sqrt(scattering_sq_norm(td)));
  REQUIRE(scattering_distance(rd, rc) <= 1e-10 * std::sqrt(scattering_sq_norm(rd)));
}
