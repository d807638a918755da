#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace rmscat {

inline constexpr double kPi = std::numbers::pi;

struct RigidMotion {
  double v1 = 0, v2 = 0;  // translation (u1, u2) in pixels
  double theta = 0;       // radians, stored in [0, 2*pi)

  RigidMotion() = default;
  RigidMotion(double a, double b, double t) : v1(a), v2(b), theta(reduce(t)) {}

  static double reduce(double t) {
    double r = std::fmod(t, 2 * kPi);
    return r < 0 ? r + 2 * kPi : r;
  }
};

inline std::array<double, 2> rotate_vec(double theta, double a, double b) {
  double c = std::cos(theta), s = std::sin(theta);
  return {c * a - s * b, s * a + c * b};
}

inline RigidMotion g_product(const RigidMotion& g1, const RigidMotion& g2) {
  auto rv = rotate_vec(g1.theta, g2.v1, g2.v2);
  return RigidMotion(g1.v1 + rv[0], g1.v2 + rv[1], g1.theta + g2.theta);
}

inline RigidMotion g_inverse(const RigidMotion& g) {
  auto rv = rotate_vec(-g.theta, g.v1, g.v2);
  return RigidMotion(-rv[0], -rv[1], -g.theta);
}

inline std::array<double, 2> g_act_point(const RigidMotion& g, double u1, double u2) {
  auto rv = rotate_vec(g.theta, u1, u2);
  return {g.v1 + rv[0], g.v2 + rv[1]};
}

// Function on a spatial grid times a discrete orientation circle.
// period is pi (first-layer modulus volumes) or 2*pi (general volumes).
struct SE2Volume {
  int height = 0, width = 0, n_theta = 0;
  double period = 2 * kPi;
  std::vector<ComplexGrid> slices;  // one spatial grid per orientation sample

  SE2Volume() = default;
  SE2Volume(int h, int w, int t, double p) : height(h), width(w), n_theta(t), period(p) {
    if (t < 1) throw std::invalid_argument("SE2Volume: n_theta must be >= 1");
    slices.assign(size_t(t), ComplexGrid(h, w));
  }

  double theta_step() const { return period / n_theta; }

  cplx& at(int r, int c, int t) { return slices[size_t(t)].at(r, c); }
  const cplx& at(int r, int c, int t) const { return slices[size_t(t)].at(r, c); }

  bool same_shape(const SE2Volume& o) const {
    return height == o.height && width == o.width && n_theta == o.n_theta &&
           std::abs(period - o.period) < 1e-12;
  }

  double sq_norm() const {
    double s = 0;
    for (const auto& sl : slices) s += rmscat::sq_norm(sl);
    return s;
  }
};

namespace detail {

// Bilinear sample of a periodic spatial grid at real coordinates (u1, u2),
// where column index carries u1 and row index carries u2.
inline cplx sample_periodic_bilinear(const ComplexGrid& g, double u1, double u2) {
  double c = u1 - std::floor(u1 / g.width) * g.width;
  double r = u2 - std::floor(u2 / g.height) * g.height;
  if (c >= g.width) c -= g.width;    // rounding can land exactly on the period
  if (r >= g.height) r -= g.height;
  int c0 = int(c), r0 = int(r);
  double fc = c - c0, fr = r - r0;
  int c1 = (c0 + 1) % g.width, r1 = (r0 + 1) % g.height;
  return (1 - fr) * ((1 - fc) * g.at(r0, c0) + fc * g.at(r0, c1)) +
         fr * ((1 - fc) * g.at(r1, c0) + fc * g.at(r1, c1));
}

}  // namespace detail

// Brute-force left-invariant SE(2) convolution:
//   out(v,t) = sum_{v',t'} x(v',t') y(r_{-theta'}(v-v'), t-t') * dv * dtheta.
// Spatial filters are stored wrap-around (origin at index 0). Quadratic cost;
// test oracle only.
inline SE2Volume se2_convolve_reference(const SE2Volume& x, const SE2Volume& y) {
  if (!x.same_shape(y)) throw std::invalid_argument("se2_convolve_reference: shape mismatch");
  const int H = x.height, W = x.width, T = x.n_theta;
  const double dtheta = x.theta_step();
  SE2Volume out(H, W, T, x.period);
  for (int tp = 0; tp < T; ++tp) {
    const double theta_p = tp * dtheta;
    const double ct = std::cos(-theta_p), st = std::sin(-theta_p);
    for (int t = 0; t < T; ++t) {
      const ComplexGrid& ysl = y.slices[size_t(((t - tp) % T + T) % T)];
      for (int vr = 0; vr < H; ++vr) {
        for (int vc = 0; vc < W; ++vc) {
          cplx acc = 0;
          for (int pr = 0; pr < H; ++pr) {
            for (int pc = 0; pc < W; ++pc) {
              // centered periodic representative of the displacement, so the
              // rotation acts about the filter origin rather than across the
              // wrap seam (exactly equivalent at lattice-exact angles)
              int d1 = ((vc - pc + W / 2) % W + W) % W - W / 2;
              int d2 = ((vr - pr + H / 2) % H + H) % H - H / 2;
              double a1 = ct * d1 - st * d2;
              double a2 = st * d1 + ct * d2;
              acc += x.at(pr, pc, tp) * detail::sample_periodic_bilinear(ysl, a1, a2);
            }
          }
          out.at(vr, vc, t) += acc * dtheta;
        }
      }
    }
  }
  return out;
}

// Group translation of a sampled volume by g0 = (integer v0, theta0 on the
// orientation grid): (g0.x)(v,theta) = x(g0^{-1}(v,theta)).
inline SE2Volume se2_translate(const SE2Volume& x, int v0_c, int v0_r, int t0) {
  const int H = x.height, W = x.width, T = x.n_theta;
  const double theta0 = t0 * x.theta_step();
  const double ct = std::cos(-theta0), st = std::sin(-theta0);
  SE2Volume out(H, W, T, x.period);
  for (int t = 0; t < T; ++t) {
    const ComplexGrid& xs = x.slices[size_t(((t - t0) % T + T) % T)];
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        double d1 = c - v0_c, d2 = r - v0_r;
        out.at(r, c, t) = detail::sample_periodic_bilinear(xs, ct * d1 - st * d2, st * d1 + ct * d2);
      }
    }
  }
  return out;
}

}  // namespace rmscat
