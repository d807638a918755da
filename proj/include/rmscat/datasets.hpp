#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "errors.hpp"
#include "grid.hpp"
#include "rng.hpp"
#include "signals.hpp"

namespace rmscat {

struct DatasetManifest {
  struct ClassEntry {
    std::string name;
    std::vector<std::string> paths;  // absolute or root-relative, sorted
  };
  std::vector<ClassEntry> classes;  // sorted by name
  std::uint64_t fingerprint = 0;
};

struct SplitSpec {
  int train_per_class = 0;
  int n_splits = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (train_per_class < 1) throw std::invalid_argument("SplitSpec: train_per_class must be >= 1");
    if (n_splits < 1) throw std::invalid_argument("SplitSpec: n_splits must be >= 1");
  }
};

// One item is (class index, image index within the class).
struct Split {
  std::vector<std::pair<int, int>> train, test;
};

inline std::uint64_t manifest_fingerprint(const DatasetManifest& m) {
  std::string listing;
  for (const auto& c : m.classes) {
    listing += c.name;
    listing += '\n';
    for (const auto& p : c.paths) {
      listing += std::filesystem::path(p).filename().string();
      listing += '\n';
    }
  }
  return fnv1a64(listing);
}

// Deterministic listing of root/<class>/<images>: classes and files in
// lexicographic order, so the fingerprint is platform-independent.
inline DatasetManifest scan_dataset(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("scan_dataset: not a directory: " + root);
  DatasetManifest m;
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  for (const auto& dir : class_dirs) {
    DatasetManifest::ClassEntry ce;
    ce.name = dir.filename().string();
    for (const auto& f : fs::directory_iterator(dir))
      if (f.is_regular_file()) ce.paths.push_back(f.path().string());
    std::sort(ce.paths.begin(), ce.paths.end());
    if (ce.paths.empty()) throw std::runtime_error("scan_dataset: empty class directory: " + dir.string());
    m.classes.push_back(std::move(ce));
  }
  if (m.classes.empty()) throw std::runtime_error("scan_dataset: no class directories under " + root);
  m.fingerprint = manifest_fingerprint(m);
  return m;
}

// Seeded per-(split, class) Fisher-Yates selection; fully determined by
// (fingerprint, seed, split index) and independent of platform.
inline std::vector<Split> make_splits(const DatasetManifest& m, const SplitSpec& spec) {
  spec.validate();
  for (const auto& c : m.classes)
    if (spec.train_per_class >= int(c.paths.size()))
      throw std::invalid_argument("make_splits: train_per_class >= size of class " + c.name);
  std::vector<Split> splits(static_cast<size_t>(spec.n_splits));
  for (int s = 0; s < spec.n_splits; ++s) {
    Split& sp = splits[size_t(s)];
    for (int c = 0; c < int(m.classes.size()); ++c) {
      // endian-independent key: decimal text of (fingerprint, seed, split, class)
      std::string key = std::to_string(m.fingerprint) + "/" + std::to_string(spec.seed) + "/" +
                        std::to_string(s) + "/" + std::to_string(c);
      SplitMix64 rng(fnv1a64(key));
      int n = int(m.classes[size_t(c)].paths.size());
      std::vector<int> perm(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) perm[size_t(i)] = i;
      for (int i = n - 1; i > 0; --i)
        std::swap(perm[size_t(i)], perm[size_t(rng.below(std::uint64_t(i) + 1))]);
      for (int i = 0; i < n; ++i)
        (i < spec.train_per_class ? sp.train : sp.test).emplace_back(c, perm[size_t(i)]);
    }
  }
  return splits;
}

// Text form of the splits for exact experiment replay.
inline std::string export_splits(const DatasetManifest& m, const std::vector<Split>& splits) {
  std::ostringstream os;
  os << "splits_version 1\nfingerprint " << m.fingerprint << "\nn_splits " << splits.size() << "\n";
  for (size_t s = 0; s < splits.size(); ++s) {
    auto emit = [&](const char* tag, const std::vector<std::pair<int, int>>& items) {
      os << "split " << s << " " << tag;
      for (auto& [c, i] : items) os << " " << c << ":" << i;
      os << "\n";
    };
    emit("train", splits[s].train);
    emit("test", splits[s].test);
  }
  return os.str();
}

inline std::vector<Split> import_splits(const std::string& text, const DatasetManifest& m) {
  std::istringstream is(text);
  std::string key;
  std::uint64_t fp = 0;
  size_t n = 0;
  int version = 0;
  is >> key >> version >> key >> fp >> key >> n;
  if (version != 1) throw std::runtime_error("import_splits: unsupported splits_version");
  if (fp != m.fingerprint) throw std::runtime_error("import_splits: fingerprint does not match the dataset");
  std::vector<Split> splits(n);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, role, item;
    size_t idx = 0;
    ls >> tag >> idx >> role;
    if (tag != "split" || idx >= n) throw std::runtime_error("import_splits: malformed line: " + line);
    auto& dst = role == "train" ? splits[idx].train : splits[idx].test;
    while (ls >> item) {
      auto colon = item.find(':');
      if (colon == std::string::npos) throw std::runtime_error("import_splits: malformed item: " + item);
      dst.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
    }
  }
  return splits;
}

struct LoadOptions {
  bool to_grayscale = true;
  int crop_or_pad_h = 0, crop_or_pad_w = 0;  // 0: keep native dims
  int max_short_side = 480;                  // 0: no limit
};

// Bicubic resample to new dims, center-aligned (identity when dims match).
inline Image2D resample_image(const Image2D& x, int nh, int nw) {
  if (nh == x.height && nw == x.width) return x;
  Image2D out(nh, nw);
  double sr = double(x.height) / nh, sc = double(x.width) / nw;
  for (int r = 0; r < nh; ++r)
    for (int c = 0; c < nw; ++c)
      out.at(r, c) = detail::sample_bicubic(x, (r - (nh - 1) / 2.0) * sr + (x.height - 1) / 2.0,
                                            (c - (nw - 1) / 2.0) * sc + (x.width - 1) / 2.0);
  return out;
}

// Load an 8/16-bit grayscale or color image into [0,1]; color collapses via
// Rec. 601 luminance weights.
inline Image2D load_image(const std::string& path, const LoadOptions& opts = {}) {
  cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (img.empty()) throw IoError("load_image: cannot read " + path);
  int depth = img.depth();
  if (depth != CV_8U && depth != CV_16U)
    throw std::runtime_error("load_image: unsupported bit depth in " + path);
  const double maxval = depth == CV_8U ? 255.0 : 65535.0;
  const int ch = img.channels();
  if (ch != 1 && ch != 3 && ch != 4)
    throw std::runtime_error("load_image: unsupported channel count in " + path);
  Image2D out(img.rows, img.cols);
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      double v;
      auto px = [&](int k) {
        return depth == CV_8U ? double(img.ptr<std::uint8_t>(r)[c * ch + k])
                              : double(img.ptr<std::uint16_t>(r)[c * ch + k]);
      };
      if (ch == 1 || !opts.to_grayscale) {
        v = px(0);
      } else {
        v = 0.114 * px(0) + 0.587 * px(1) + 0.299 * px(2);  // BGR order
      }
      out.at(r, c) = v / maxval;
    }
  }
  if (opts.max_short_side > 0) {
    int short_side = std::min(out.height, out.width);
    if (short_side > opts.max_short_side) {
      double s = double(opts.max_short_side) / short_side;
      out = resample_image(out, int(std::lround(out.height * s)), int(std::lround(out.width * s)));
    }
  }
  if (opts.crop_or_pad_h > 0 && opts.crop_or_pad_w > 0) {
    Image2D t(std::min(opts.crop_or_pad_h, out.height), std::min(opts.crop_or_pad_w, out.width));
    t = center_crop(out, t.height, t.width);
    out = mirror_pad(t, opts.crop_or_pad_h, opts.crop_or_pad_w);
  }
  return out;
}

// Minimal PGM/PPM writers for tests and tooling (binary, 8-bit).
inline void write_pgm(const std::string& path, const Image2D& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_pgm: cannot open " + path);
  os << "P5\n" << x.width << " " << x.height << "\n255\n";
  for (double v : x.samples) {
    double c = std::clamp(v, 0.0, 1.0);
    os.put(char(std::lround(c * 255.0)));
  }
}

inline void write_ppm_rgb(const std::string& path, const Image2D& r, const Image2D& g, const Image2D& b) {
  if (!r.same_dims(g) || !r.same_dims(b)) throw std::invalid_argument("write_ppm_rgb: channel dims differ");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_ppm_rgb: cannot open " + path);
  os << "P6\n" << r.width << " " << r.height << "\n255\n";
  for (size_t i = 0; i < r.size(); ++i) {
    for (const Image2D* ch : {&r, &g, &b})
      os.put(char(std::lround(std::clamp(ch->samples[i], 0.0, 1.0) * 255.0)));
  }
}

}  // namespace rmscat
