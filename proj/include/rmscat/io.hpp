#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "datasets.hpp"
#include "errors.hpp"
#include "scattering.hpp"

namespace rmscat {

// Flat key-value run configuration; the single source for CLI defaults and the
// snapshot embedded in every artifact.
struct RunConfig {
  int schema_version = 1;
  // scattering
  int scales = 0;          // J; 0 derives from image dims
  int orientations = 8;    // C
  int angular_scales = -1; // K; -1 derives from orientations
  int order = 2;           // M
  int oversampling = 1;
  std::string backend = "direct";
  std::string pooling = "global-average";
  double morlet_sigma = 0.5, morlet_xi = 3.141592653589793, morlet_slant = 1.2;
  double morlet_sigma_phi = 0.215, morlet_phi_gain = 3.407;
  double angular_sigma = 0.78, angular_xi = 1.71, angular_sigma_phi = 0.39, angular_phi_gain = 1.1;
  // training
  std::vector<double> dilation_factors = {1.0, 1.4142135623730951, 2.0, 2.8284271247461903};
  double log_delta = 1e-6;
  int basis_dim = -1;
  // splits
  int train_per_class = 1;
  int n_splits = 1;
  std::uint64_t seed = 0;
  // io / runtime
  int workers = 0;  // 0: available parallelism
  int max_short_side = 480;
  std::string dataset_root, input, output;

  ScatteringConfig to_scattering_config() const {
    ScatteringConfig c;
    c.J = scales;
    c.C = orientations;
    c.K = angular_scales;
    c.M = order;
    c.oversampling = oversampling;
    if (backend == "direct") {
      c.backend = RMBackend::direct;
    } else if (backend == "cascade") {
      c.backend = RMBackend::cascade;
    } else {
      throw std::invalid_argument("RunConfig: backend must be direct or cascade");
    }
    c.morlet.sigma = morlet_sigma;
    c.morlet.xi = morlet_xi;
    c.morlet.slant = morlet_slant;
    c.morlet.sigma_phi = morlet_sigma_phi;
    c.morlet.phi_gain = morlet_phi_gain;
    c.morlet.finalize();
    c.angular.sigma = angular_sigma;
    c.angular.xi = angular_xi;
    c.angular.sigma_phi = angular_sigma_phi;
    c.angular.phi_gain = angular_phi_gain;
    c.angular.finalize();
    c.validate();
    return c;
  }

  Pooling to_pooling() const {
    if (pooling == "global-average") return Pooling::global_average;
    if (pooling == "keep-grid") return Pooling::keep_grid;
    throw std::invalid_argument("RunConfig: pooling must be global-average or keep-grid");
  }

  TrainConfig to_train_config() const {
    TrainConfig t;
    t.dilation_factors = dilation_factors;
    t.log_delta = log_delta;
    t.basis_dim = basis_dim;
    t.validate();
    return t;
  }

  SplitSpec to_split_spec() const {
    SplitSpec s;
    s.train_per_class = train_per_class;
    s.n_splits = n_splits;
    s.seed = seed;
    return s;
  }

  LoadOptions to_load_options() const {
    LoadOptions o;
    o.max_short_side = max_short_side;
    return o;
  }
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

inline std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace detail

inline std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "schema_version " << c.schema_version << "\n"
     << "scales " << c.scales << "\n"
     << "orientations " << c.orientations << "\n"
     << "angular_scales " << c.angular_scales << "\n"
     << "order " << c.order << "\n"
     << "oversampling " << c.oversampling << "\n"
     << "backend " << c.backend << "\n"
     << "pooling " << c.pooling << "\n"
     << "morlet_sigma " << c.morlet_sigma << "\n"
     << "morlet_xi " << c.morlet_xi << "\n"
     << "morlet_slant " << c.morlet_slant << "\n"
     << "morlet_sigma_phi " << c.morlet_sigma_phi << "\n"
     << "morlet_phi_gain " << c.morlet_phi_gain << "\n"
     << "angular_sigma " << c.angular_sigma << "\n"
     << "angular_xi " << c.angular_xi << "\n"
     << "angular_sigma_phi " << c.angular_sigma_phi << "\n"
     << "angular_phi_gain " << c.angular_phi_gain << "\n"
     << "dilation_factors " << detail::join_doubles(c.dilation_factors) << "\n"
     << "log_delta " << c.log_delta << "\n"
     << "basis_dim " << c.basis_dim << "\n"
     << "train_per_class " << c.train_per_class << "\n"
     << "n_splits " << c.n_splits << "\n"
     << "seed " << c.seed << "\n"
     << "workers " << c.workers << "\n"
     << "max_short_side " << c.max_short_side << "\n";
  if (!c.dataset_root.empty()) os << "dataset_root " << c.dataset_root << "\n";
  if (!c.input.empty()) os << "input " << c.input << "\n";
  if (!c.output.empty()) os << "output " << c.output << "\n";
  return os.str();
}

// Parse "key value" lines; '#' starts a comment; unknown keys are rejected;
// schema_version must be present and equal 1.
inline RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  bool saw_version = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value;
    std::getline(ls, value);
    auto pos = value.find_first_not_of(" \t");
    value = pos == std::string::npos ? "" : value.substr(pos);
    auto last = value.find_last_not_of(" \t\r");
    if (last != std::string::npos) value = value.substr(0, last + 1);
    try {
      if (key == "schema_version") {
        c.schema_version = std::stoi(value);
        saw_version = true;
        if (c.schema_version != 1) throw std::invalid_argument("config: unsupported schema_version " + value);
      } else if (key == "scales") {
        c.scales = std::stoi(value);
      } else if (key == "orientations") {
        c.orientations = std::stoi(value);
      } else if (key == "angular_scales") {
        c.angular_scales = std::stoi(value);
      } else if (key == "order") {
        c.order = std::stoi(value);
      } else if (key == "oversampling") {
        c.oversampling = std::stoi(value);
      } else if (key == "backend") {
        c.backend = value;
      } else if (key == "pooling") {
        c.pooling = value;
      } else if (key == "morlet_sigma") {
        c.morlet_sigma = std::stod(value);
      } else if (key == "morlet_xi") {
        c.morlet_xi = std::stod(value);
      } else if (key == "morlet_slant") {
        c.morlet_slant = std::stod(value);
      } else if (key == "morlet_sigma_phi") {
        c.morlet_sigma_phi = std::stod(value);
      } else if (key == "morlet_phi_gain") {
        c.morlet_phi_gain = std::stod(value);
      } else if (key == "angular_sigma") {
        c.angular_sigma = std::stod(value);
      } else if (key == "angular_xi") {
        c.angular_xi = std::stod(value);
      } else if (key == "angular_sigma_phi") {
        c.angular_sigma_phi = std::stod(value);
      } else if (key == "angular_phi_gain") {
        c.angular_phi_gain = std::stod(value);
      } else if (key == "dilation_factors") {
        c.dilation_factors = detail::split_doubles(value);
      } else if (key == "log_delta") {
        c.log_delta = std::stod(value);
      } else if (key == "basis_dim") {
        c.basis_dim = std::stoi(value);
      } else if (key == "train_per_class") {
        c.train_per_class = std::stoi(value);
      } else if (key == "n_splits") {
        c.n_splits = std::stoi(value);
      } else if (key == "seed") {
        c.seed = std::stoull(value);
      } else if (key == "workers") {
        c.workers = std::stoi(value);
      } else if (key == "max_short_side") {
        c.max_short_side = std::stoi(value);
      } else if (key == "dataset_root") {
        c.dataset_root = value;
      } else if (key == "input") {
        c.input = value;
      } else if (key == "output") {
        c.output = value;
      } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad value for key '" + key + "': " + value);
    }
  }
  if (!saw_version) throw std::invalid_argument("config: missing schema_version");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_run_config: cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

namespace detail {

inline void put_f32(std::ostream& os, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  char b[4] = {char(u & 0xff), char((u >> 8) & 0xff), char((u >> 16) & 0xff), char((u >> 24) & 0xff)};
  os.write(b, 4);
}

inline float get_f32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("feature/model file: truncated payload");
  std::uint32_t u = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                    (std::uint32_t(b[3]) << 24);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace detail

// RMSCAT1 feature file: structured-text header (config snapshot plus the
// canonical path list with per-path sample counts), then the pooled
// coefficients as little-endian float32 in path order.
struct FeatureFile {
  RunConfig config;
  std::string pooling;
  struct PathMeta {
    int m = 0, j1 = -1, t1 = -1, l2 = -2, j2 = -1, k2 = -2;
    int n_theta = 1, height = 1, width = 1;  // payload samples for this path
  };
  std::vector<PathMeta> paths;
  std::vector<float> payload;
};

inline void write_feature_file(const std::string& path, const ScatteringOutput& out,
                               Pooling pooling, const RunConfig& config) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_feature_file: cannot open " + path);
  os << "RMSCAT1\n";
  os << serialize_run_config(config);
  os << "paths " << out.entries.size() << "\n";
  bool grid = pooling == Pooling::keep_grid;
  for (const auto& e : out.entries) {
    os << "path " << e.m << " " << e.j1 << " " << e.t1 << " " << e.l2 << " " << e.j2 << " " << e.k2
       << " " << (grid ? e.data.n_theta : 1) << " " << (grid ? e.data.height : 1) << " "
       << (grid ? e.data.width : 1) << "\n";
  }
  os << "end_header\n";
  for (const auto& e : out.entries) {
    if (grid) {
      for (const auto& sl : e.data.slices)
        for (const auto& z : sl.samples) detail::put_f32(os, float(z.real()));
    } else {
      detail::put_f32(os, float(e.mean()));
    }
  }
  if (!os) throw IoError("write_feature_file: write failed for " + path);
}

inline FeatureFile read_feature_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_feature_file: cannot read " + path);
  std::string line;
  if (!std::getline(is, line) || line != "RMSCAT1")
    throw IoError("read_feature_file: bad magic in " + path);
  FeatureFile f;
  std::string config_text;
  size_t n_paths = 0;
  while (std::getline(is, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "paths") {
      ls >> n_paths;
    } else if (key == "path") {
      FeatureFile::PathMeta p;
      ls >> p.m >> p.j1 >> p.t1 >> p.l2 >> p.j2 >> p.k2 >> p.n_theta >> p.height >> p.width;
      if (!ls) throw IoError("read_feature_file: malformed path line in " + path);
      f.paths.push_back(p);
    } else {
      config_text += line;
      config_text += '\n';
    }
  }
  if (f.paths.size() != n_paths) throw IoError("read_feature_file: path count mismatch in " + path);
  f.config = parse_run_config(config_text);
  f.pooling = f.config.pooling;
  size_t total = 0;
  for (const auto& p : f.paths) total += size_t(p.n_theta) * size_t(p.height) * size_t(p.width);
  f.payload.resize(total);
  for (auto& v : f.payload) v = detail::get_f32(is);
  return f;
}

// Model file: text header (class ids and dims plus the config snapshot), then
// for each class mu followed by the basis in column-major order, all
// little-endian float32.
inline void write_model_file(const std::string& path, const std::vector<ClassModel>& models,
                             const RunConfig& config) {
  if (models.empty()) throw std::invalid_argument("write_model_file: no models");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_model_file: cannot open " + path);
  os << "RMSMODEL1\n";
  os << serialize_run_config(config);
  os << "classes " << models.size() << "\n";
  os << "dim " << models[0].mu.size() << "\n";
  for (const auto& m : models) os << "class " << m.class_id << " " << m.basis.cols() << "\n";
  os << "end_header\n";
  for (const auto& m : models) {
    for (long i = 0; i < m.mu.size(); ++i) detail::put_f32(os, float(m.mu(i)));
    for (long c = 0; c < m.basis.cols(); ++c)
      for (long r = 0; r < m.basis.rows(); ++r) detail::put_f32(os, float(m.basis(r, c)));
  }
  if (!os) throw IoError("write_model_file: write failed for " + path);
}

inline std::pair<std::vector<ClassModel>, RunConfig> read_model_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_model_file: cannot read " + path);
  std::string line;
  if (!std::getline(is, line) || line != "RMSMODEL1")
    throw IoError("read_model_file: bad magic in " + path);
  std::string config_text;
  long dim = 0;
  size_t n_classes = 0;
  std::vector<std::pair<int, long>> class_meta;  // (id, basis cols)
  while (std::getline(is, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "classes") {
      ls >> n_classes;
    } else if (key == "dim") {
      ls >> dim;
    } else if (key == "class") {
      int id = 0;
      long cols = 0;
      ls >> id >> cols;
      class_meta.emplace_back(id, cols);
    } else {
      config_text += line;
      config_text += '\n';
    }
  }
  if (class_meta.size() != n_classes || dim <= 0)
    throw IoError("read_model_file: malformed header in " + path);
  RunConfig config = parse_run_config(config_text);
  std::vector<ClassModel> models;
  for (auto& [id, cols] : class_meta) {
    ClassModel m;
    m.class_id = id;
    m.mu.resize(dim);
    for (long i = 0; i < dim; ++i) m.mu(i) = detail::get_f32(is);
    m.basis.resize(dim, cols);
    for (long c = 0; c < cols; ++c)
      for (long r = 0; r < dim; ++r) m.basis(r, c) = detail::get_f32(is);
    models.push_back(std::move(m));
  }
  return {std::move(models), std::move(config)};
}

inline std::string serialize_accuracy_report(const AccuracyReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "mean_accuracy " << rep.mean_accuracy << "\n";
  os << "std_accuracy " << rep.std_accuracy << "\n";
  os << "per_split";
  for (double a : rep.per_split) os << " " << a;
  os << "\n";
  return os.str();
}

}  // namespace rmscat
