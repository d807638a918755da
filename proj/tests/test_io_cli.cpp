#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "rmscat/io.hpp"
#include "rmscat/rng.hpp"

using namespace rmscat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rmscat_io_" + std::to_string(SplitMix64(std::random_device{}()).next()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args) {
  std::string cmd = std::string(RMSCAT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(bool(is));
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Two-class dataset of oriented stripes plus noise, written as 32x32 PGMs.
void make_tiny_dataset(const fs::path& root, int per_class) {
  SplitMix64 rng(97);
  for (int c = 0; c < 2; ++c) {
    fs::create_directories(root / ("class" + std::to_string(c)));
    for (int i = 0; i < per_class; ++i) {
      Image2D x(32, 32);
      for (int r = 0; r < 32; ++r)
        for (int col = 0; col < 32; ++col) {
          double phase = c == 0 ? col : r;
          x.at(r, col) = 0.5 + 0.4 * std::sin(2 * kPi * phase / 8.0) + 0.05 * rng.normal();
        }
      write_pgm((root / ("class" + std::to_string(c)) /
                 ("img" + std::to_string(i) + ".pgm")).string(),
                x);
    }
  }
}

}  // namespace

TEST_CASE("run config serialization round-trips and rejects bad input") {
  RunConfig c;
  c.scales = 4;
  c.orientations = 6;
  c.seed = 123456789012345ull;
  c.backend = "cascade";
  c.dilation_factors = {1.0, 1.5};
  c.dataset_root = "/data/tex";
  RunConfig back = parse_run_config(serialize_run_config(c));
  REQUIRE(back.scales == 4);
  REQUIRE(back.orientations == 6);
  REQUIRE(back.seed == 123456789012345ull);
  REQUIRE(back.backend == "cascade");
  REQUIRE(back.dilation_factors == c.dilation_factors);
  REQUIRE(back.dataset_root == "/data/tex");
  REQUIRE(serialize_run_config(back) == serialize_run_config(c));

  REQUIRE_THROWS_AS(parse_run_config("schema_version 1\nbogus_key 3\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_run_config("scales 3\n"), std::invalid_argument);       // missing version
  REQUIRE_THROWS_AS(parse_run_config("schema_version 2\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_run_config("schema_version 1\nscales abc\n"), std::invalid_argument);
  // comments and blank lines are fine
  RunConfig ok = parse_run_config("# header\nschema_version 1\n\nscales 5 # inline\n");
  REQUIRE(ok.scales == 5);
}

TEST_CASE("feature files round-trip through disk at float32 precision") {
  TempDir td;
  SplitMix64 rng(91);
  Image2D x(32, 32);
  for (auto& v : x.samples) v = rng.uniform();
  RunConfig rc;
  rc.scales = 2;
  rc.orientations = 4;
  rc.angular_scales = 1;
  ScatteringOutput out = rigid_motion_scattering(x, rc.to_scattering_config());

  for (auto pooling : {Pooling::global_average, Pooling::keep_grid}) {
    rc.pooling = pooling == Pooling::keep_grid ? "keep-grid" : "global-average";
    std::string file = (td.path / "f.rmscat").string();
    write_feature_file(file, out, pooling, rc);
    FeatureFile f = read_feature_file(file);
    REQUIRE(f.paths.size() == out.entries.size());
    size_t k = 0;
    for (size_t e = 0; e < out.entries.size(); ++e) {
      const auto& ent = out.entries[e];
      REQUIRE(f.paths[e].m == ent.m);
      REQUIRE(f.paths[e].j1 == ent.j1);
      if (pooling == Pooling::global_average) {
        REQUIRE(f.paths[e].n_theta * f.paths[e].height * f.paths[e].width == 1);
        REQUIRE(std::abs(f.payload[k++] - float(ent.mean())) <= 1e-7f * (1 + std::abs(ent.mean())));
      } else {
        REQUIRE(f.paths[e].n_theta == ent.data.n_theta);
        REQUIRE(f.paths[e].height == ent.data.height);
        REQUIRE(f.paths[e].width == ent.data.width);
        for (const auto& sl : ent.data.slices)
          for (const auto& z : sl.samples)
            REQUIRE(f.payload[k++] == float(z.real()));
      }
    }
    REQUIRE(k == f.payload.size());
  }
  REQUIRE_THROWS_AS(read_feature_file((td.path / "absent.rmscat").string()), IoError);
}

TEST_CASE("model files round-trip through disk") {
  TempDir td;
  SplitMix64 rng(92);
  std::vector<ClassModel> models;
  for (int c = 0; c < 3; ++c) {
    std::vector<std::vector<double>> tv;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> v(12);
      for (auto& x : v) x = rng.normal();
      tv.push_back(v);
    }
    models.push_back(fit_class_model(tv, TrainConfig{}, c));
  }
  RunConfig rc;
  std::string file = (td.path / "m.rmsmodel").string();
  write_model_file(file, models, rc);
  auto [back, cfg] = read_model_file(file);
  REQUIRE(back.size() == models.size());
  REQUIRE(cfg.schema_version == 1);
  for (size_t c = 0; c < models.size(); ++c) {
    REQUIRE(back[c].class_id == models[c].class_id);
    REQUIRE(back[c].mu.size() == models[c].mu.size());
    REQUIRE(back[c].basis.cols() == models[c].basis.cols());
    for (long i = 0; i < models[c].mu.size(); ++i)
      REQUIRE(float(models[c].mu(i)) == float(back[c].mu(i)));
    for (long j = 0; j < models[c].basis.cols(); ++j)
      for (long i = 0; i < models[c].basis.rows(); ++i)
        REQUIRE(float(models[c].basis(i, j)) == float(back[c].basis(i, j)));
  }
  REQUIRE_THROWS_AS(read_model_file((td.path / "absent").string()), IoError);
}

TEST_CASE("cli selftest and filters-audit succeed") {
  REQUIRE(run_cli("selftest") == 0);
  REQUIRE(run_cli("filters-audit --size 64") == 0);
}

TEST_CASE("cli validation and io failures map to distinct exit codes") {
  TempDir td;
  REQUIRE(run_cli("scatter --input " + (td.path / "absent.pgm").string() + " --out " +
                  (td.path / "o").string()) == 2);
  // bad flag value -> validation error
  REQUIRE(run_cli("scatter --input x --backend sideways --out y") == 1);
  // config with an unknown key -> validation error
  std::ofstream((td.path / "bad.cfg")) << "schema_version 1\nwhat 1\n";
  REQUIRE(run_cli("selftest --config " + (td.path / "bad.cfg").string()) == 1);
  // missing config file -> io error
  REQUIRE(run_cli("selftest --config " + (td.path / "absent.cfg").string()) == 2);
}

TEST_CASE("cli scatter produces a readable feature file") {
  TempDir td;
  SplitMix64 rng(93);
  Image2D x(32, 32);
  for (auto& v : x.samples) v = rng.uniform();
  write_pgm((td.path / "in.pgm").string(), x);
  std::string out = (td.path / "out.rmscat").string();
  REQUIRE(run_cli("scatter --input " + (td.path / "in.pgm").string() + " --out " + out) == 0);
  FeatureFile f = read_feature_file(out);
  REQUIRE(!f.paths.empty());
  REQUIRE(f.payload.size() == f.paths.size());  // global average: one value per path
}

TEST_CASE("cli eval is deterministic across runs and worker counts") {
  TempDir td;
  make_tiny_dataset(td.path / "data", 5);
  std::ofstream((td.path / "run.cfg")) << "schema_version 1\nscales 2\norientations 4\n"
                                       << "angular_scales 1\ndilation_factors 1\n"
                                       << "train_per_class 2\nn_splits 2\nseed 7\n";
  auto eval_cmd = [&](const std::string& out, const std::string& extra) {
    return "eval --dataset " + (td.path / "data").string() + " --config " +
           (td.path / "run.cfg").string() + " --out " + out + " " + extra;
  };
  REQUIRE(run_cli(eval_cmd((td.path / "r1.txt").string(), "--workers 1")) == 0);
  std::string r1 = slurp(td.path / "r1.txt");
  REQUIRE(run_cli(eval_cmd((td.path / "r1.txt").string(), "--workers 1")) == 0);
  std::string r3 = slurp(td.path / "r1.txt");
  REQUIRE(run_cli(eval_cmd((td.path / "r2.txt").string(), "--workers 4")) == 0);
  std::string r2 = slurp(td.path / "r2.txt");
  REQUIRE(r1 == r3);  // identical invocation: byte-identical output
  // different worker counts: the embedded config snapshot differs only in the
  // workers key; the accuracy report must be identical
  auto report_part = [](const std::string& s) { return s.substr(s.find("mean_accuracy")); };
  REQUIRE(r1.find("mean_accuracy") != std::string::npos);
  REQUIRE(r2.find("mean_accuracy") != std::string::npos);
  REQUIRE(report_part(r1) == report_part(r2));

  // train writes a model that reads back
  std::string model = (td.path / "m.rmsmodel").string();
  REQUIRE(run_cli("train --dataset " + (td.path / "data").string() + " --config " +
                  (td.path / "run.cfg").string() + " --out " + model) == 0);
  auto [models, cfg] = read_model_file(model);
  REQUIRE(models.size() == 2);
  REQUIRE(cfg.scales == 2);
}
