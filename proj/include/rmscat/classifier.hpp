#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "datasets.hpp"
#include "parallel.hpp"
#include "scattering.hpp"
#include "signals.hpp"

namespace rmscat {

// Per-class affine model: log-feature mean plus an orthonormal principal
// basis; classification minimizes the orthogonal residual to mu + span(basis).
struct ClassModel {
  int class_id = 0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd basis;  // columns orthonormal
};

struct TrainConfig {
  std::vector<double> dilation_factors = {1.0, std::sqrt(2.0), 2.0, 2.0 * std::sqrt(2.0)};
  double log_delta = 1e-6;
  int basis_dim = -1;  // < 0: keep all directions above the cutoff

  void validate() const {
    if (dilation_factors.empty()) throw std::invalid_argument("TrainConfig: dilation_factors empty");
    for (double f : dilation_factors)
      if (!(f > 0)) throw std::invalid_argument("TrainConfig: dilation factors must be positive");
    if (!(log_delta > 0)) throw std::invalid_argument("TrainConfig: log_delta must be positive");
  }
};

// Elementwise log(v + delta). Entries are scattering-modulus averages and must
// be nonnegative up to grid round-off: anything below -1e-9 is corrupt.
inline std::vector<double> log_features(std::vector<double> v, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("log_features: delta must be positive");
  for (auto& x : v) {
    if (x < -1e-9) throw std::invalid_argument("log_features: negative feature entry");
    x = std::log(std::max(x, 0.0) + delta);
  }
  return v;
}

namespace detail {

// Dilate by factor s (resample to s-times the dims, center-crop back).
// Returns an empty image when the resampled grid would be smaller than the
// original (nothing to crop), which callers skip with a warning.
inline Image2D dilated_copy(const Image2D& x, double s) {
  if (s == 1.0) return x;
  int nh = int(std::lround(x.height * s)), nw = int(std::lround(x.width * s));
  if (nh < x.height || nw < x.width) return Image2D();
  return center_crop(resample_image(x, nh, nw), x.height, x.width);
}

}  // namespace detail

// Globally pooled rigid-motion scattering features of an arbitrary-dims image:
// mirror-pad to the next power of 2, scatter, pool each output over its valid
// (unpadded) region.
inline std::vector<double> pooled_scattering_features(const Image2D& x, const ScatteringConfig& cfg) {
  int ph = next_pow2(x.height), pw = next_pow2(x.width);
  Image2D padded = (ph == x.height && pw == x.width) ? x : mirror_pad(x, ph, pw);
  ScatteringOutput out = rigid_motion_scattering(padded, cfg);
  std::vector<double> v;
  for (const auto& e : out.entries) {
    int step = ph / e.data.height;  // spatial decimation of this entry
    int vh = std::max(x.height / step, 1), vw = std::max(x.width / step, 1);
    double s = 0;
    size_t n = 0;
    for (const auto& sl : e.data.slices) {
      ComplexGrid c = center_crop(sl, vh, vw);
      for (const auto& z : c.samples) s += z.real();
      n += c.size();
    }
    v.push_back(n ? s / double(n) : 0.0);
  }
  return v;
}

// One log-feature vector per surviving dilation factor (training-side
// augmentation: each enters the class model separately).
inline std::vector<std::vector<double>> scale_feature_set(const Image2D& x, const ScatteringConfig& scfg,
                                                          const TrainConfig& tcfg) {
  tcfg.validate();
  std::vector<std::vector<double>> out;
  for (double f : tcfg.dilation_factors) {
    Image2D d = detail::dilated_copy(x, f);
    if (d.size() == 0 && f != 1.0) {
      std::fprintf(stderr, "warning: dilation factor %g shrinks the image; skipped\n", f);
      continue;
    }
    out.push_back(log_features(pooled_scattering_features(d.size() ? d : x, scfg), tcfg.log_delta));
  }
  if (out.empty()) throw std::invalid_argument("scale_feature_set: no dilation factor survived");
  return out;
}

// Test-side protocol: average the per-factor log-feature vectors.
inline std::vector<double> scale_pooled_features(const Image2D& x, const ScatteringConfig& scfg,
                                                 const TrainConfig& tcfg) {
  auto set = scale_feature_set(x, scfg, tcfg);
  std::vector<double> avg(set[0].size(), 0.0);
  for (const auto& v : set)
    for (size_t i = 0; i < v.size(); ++i) avg[i] += v[i];
  for (auto& a : avg) a /= double(set.size());
  return avg;
}

inline ClassModel fit_class_model(const std::vector<std::vector<double>>& train_vectors,
                                  const TrainConfig& cfg, int class_id = 0) {
  if (train_vectors.size() < 2) throw std::invalid_argument("fit_class_model: need >= 2 training vectors");
  const int n = int(train_vectors.size()), d = int(train_vectors[0].size());
  for (const auto& v : train_vectors)
    if (int(v.size()) != d) throw std::invalid_argument("fit_class_model: inconsistent dimensions");
  Eigen::MatrixXd X(d, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(j, i) = train_vectors[size_t(i)][size_t(j)];
  ClassModel m;
  m.class_id = class_id;
  m.mu = X.rowwise().mean();
  X.colwise() -= m.mu;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  if (cfg.basis_dim >= 0) rank = std::min(rank, cfg.basis_dim);
  m.basis = svd.matrixU().leftCols(rank);
  return m;
}

inline double residual_distance(const ClassModel& m, const std::vector<double>& v) {
  if (int(v.size()) != m.mu.size()) throw std::invalid_argument("residual_distance: dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> x(v.data(), long(v.size()));
  Eigen::VectorXd r = x - m.mu;
  if (m.basis.cols() > 0) r -= m.basis * (m.basis.transpose() * r);
  return r.norm();
}

inline int classify(const std::vector<ClassModel>& models, const std::vector<double>& v) {
  if (models.empty()) throw std::invalid_argument("classify: no models");
  int best = models[0].class_id;
  double best_r = residual_distance(models[0], v);
  for (size_t i = 1; i < models.size(); ++i) {
    double r = residual_distance(models[i], v);
    if (r < best_r || (r == best_r && models[i].class_id < best)) {
      best_r = r;
      best = models[i].class_id;
    }
  }
  return best;
}

struct AccuracyReport {
  double mean_accuracy = 0, std_accuracy = 0;
  std::vector<double> per_split;
};

// Full split evaluation. Features are extracted once per image (the expensive
// part) and shared across splits; extraction order is index-based so results
// do not depend on the worker count.
inline AccuracyReport evaluate(const DatasetManifest& manifest, const SplitSpec& spec,
                               const TrainConfig& tcfg, const ScatteringConfig& scfg,
                               const LoadOptions& load_opts = {}, int workers = 1,
                               const std::vector<Split>* fixed_splits = nullptr) {
  tcfg.validate();
  std::vector<std::string> missing;
  for (const auto& c : manifest.classes)
    for (const auto& p : c.paths)
      if (!std::filesystem::is_regular_file(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::string msg = "evaluate: missing files:";
    for (const auto& p : missing) msg += "\n  " + p;
    throw IoError(msg);
  }
  std::vector<Split> splits = fixed_splits ? *fixed_splits : make_splits(manifest, spec);

  struct ImageFeatures {
    std::vector<std::vector<double>> train_set;  // per-factor vectors
    std::vector<double> test_avg;                // factor average
  };
  std::vector<std::pair<int, int>> all_items;
  for (int c = 0; c < int(manifest.classes.size()); ++c)
    for (int i = 0; i < int(manifest.classes[size_t(c)].paths.size()); ++i) all_items.emplace_back(c, i);
  std::vector<ImageFeatures> feats(all_items.size());
  std::vector<std::vector<int>> slot(manifest.classes.size());
  for (int t = 0; t < int(all_items.size()); ++t)
    slot[size_t(all_items[size_t(t)].first)].push_back(t);
  parallel_for(int(all_items.size()), workers, [&](int t) {
    auto [c, i] = all_items[size_t(t)];
    Image2D img = load_image(manifest.classes[size_t(c)].paths[size_t(i)], load_opts);
    ImageFeatures f;
    f.train_set = scale_feature_set(img, scfg, tcfg);
    f.test_avg.assign(f.train_set[0].size(), 0.0);
    for (const auto& v : f.train_set)
      for (size_t k = 0; k < v.size(); ++k) f.test_avg[k] += v[k];
    for (auto& a : f.test_avg) a /= double(f.train_set.size());
    feats[size_t(t)] = std::move(f);
  });
  auto feat_of = [&](int c, int i) -> const ImageFeatures& { return feats[size_t(slot[size_t(c)][size_t(i)])]; };

  AccuracyReport rep;
  for (const auto& sp : splits) {
    std::vector<std::vector<std::vector<double>>> per_class(manifest.classes.size());
    for (auto& [c, i] : sp.train)
      for (const auto& v : feat_of(c, i).train_set) per_class[size_t(c)].push_back(v);
    std::vector<ClassModel> models;
    for (int c = 0; c < int(per_class.size()); ++c)
      models.push_back(fit_class_model(per_class[size_t(c)], tcfg, c));
    int correct = 0;
    for (auto& [c, i] : sp.test)
      if (classify(models, feat_of(c, i).test_avg) == c) ++correct;
    rep.per_split.push_back(sp.test.empty() ? 1.0 : double(correct) / double(sp.test.size()));
  }
  for (double a : rep.per_split) rep.mean_accuracy += a;
  rep.mean_accuracy /= double(rep.per_split.size());
  double var = 0;
  for (double a : rep.per_split) var += (a - rep.mean_accuracy) * (a - rep.mean_accuracy);
  rep.std_accuracy = std::sqrt(var / double(rep.per_split.size()));
  return rep;
}

}  // namespace rmscat
