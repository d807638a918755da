#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "rng.hpp"
#include "scattering.hpp"

namespace rmscat {

struct ScalingBench {
  std::vector<int> sizes;       // image side lengths
  std::vector<double> seconds;  // wall time per size
  double exponent = 0;          // slope of log(time) vs log(pixel count)
};

inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double num = 0, den = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

// Wall time of translation scattering at fixed depth across image sizes; the
// exponent measures how the cascade cost scales with pixel count.
inline ScalingBench run_scaling_bench(const std::vector<int>& sizes, RMBackend backend,
                                      int J = 4, int C = 8, int repeats = 1) {
  ScalingBench b;
  b.sizes = sizes;
  SplitMix64 rng(123);
  std::vector<double> pixels;
  for (int n : sizes) {
    Image2D x(n, n);
    for (auto& v : x.samples) v = rng.uniform();
    ScatteringConfig cfg;
    cfg.J = J;
    cfg.C = C;
    cfg.M = 2;
    cfg.oversampling = 0;
    cfg.backend = backend;
    translation_scattering(x, cfg);  // warm-up (filter sampling, caches)
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      translation_scattering(x, cfg);
      auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    b.seconds.push_back(best);
    pixels.push_back(double(n) * double(n));
  }
  b.exponent = fit_loglog_slope(pixels, b.seconds);
  return b;
}

}  // namespace rmscat
