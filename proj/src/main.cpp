// rmscat command-line tool: filter audits, feature extraction, training,
// evaluation, self-test and benchmarking for the rigid-motion scattering
// library.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmscat/bench.hpp"
#include "rmscat/classifier.hpp"
#include "rmscat/datasets.hpp"
#include "rmscat/io.hpp"
#include "rmscat/parallel.hpp"
#include "rmscat/rm_wavelets.hpp"
#include "rmscat/scattering.hpp"
#include "rmscat/se2.hpp"
#include "rmscat/wavelets2d.hpp"

namespace {

using namespace rmscat;

struct CommonFlags {
  std::string config_path, out_path, backend;
  int workers = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--config", fl.config_path, "structured key-value config file");
  cmd->add_option("--workers", fl.workers, "worker threads (0 = available parallelism)");
  cmd->add_option("--seed", fl.seed, "64-bit split/permutation seed")->each([&](const std::string&) {
    fl.seed_set = true;
  });
  cmd->add_option("--backend", fl.backend, "direct|cascade")
      ->check(CLI::IsMember({"direct", "cascade"}));
  cmd->add_option("--out", fl.out_path, "output path");
}

// Config file first, then flags on top (flags win).
RunConfig resolve_config(const CommonFlags& fl) {
  RunConfig cfg = fl.config_path.empty() ? RunConfig{} : load_run_config(fl.config_path);
  if (!fl.backend.empty()) cfg.backend = fl.backend;
  if (fl.workers >= 0) cfg.workers = fl.workers;
  if (fl.seed_set) cfg.seed = fl.seed;
  if (!fl.out_path.empty()) cfg.output = fl.out_path;
  return cfg;
}

int effective_workers(const RunConfig& cfg) {
  return cfg.workers > 0 ? cfg.workers : default_workers();
}

int cmd_filters_audit(const RunConfig& cfg, int size) {
  ScatteringConfig sc = cfg.to_scattering_config();
  int J = sc.J > 0 ? sc.J : default_scale_count(size);
  int K = sc.angular_scales();
  FilterBank2D fb = build_filter_bank(sc.morlet, J, sc.C, size, size);
  LPReport rep = littlewood_paley_audit(fb);
  std::printf("spatial_bank size=%d J=%d C=%d min_sum=%.6f max_sum=%.6f epsilon=%.6f\n", size, J,
              sc.C, rep.min_sum, rep.max_sum, fb.lp_epsilon);
  AngularFilterBank ab = build_angular_bank(sc.angular, sc.C, K);
  std::printf("angular_bank n_theta=%d K=%d epsilon=%.6f\n", sc.C, K, ab.lp_epsilon);
  if (fb.lp_epsilon >= 0.5 || ab.lp_epsilon >= 0.5) {
    std::fprintf(stderr, "filters-audit: Littlewood-Paley epsilon >= 0.5\n");
    return 1;
  }
  return 0;
}

int cmd_scatter(const RunConfig& cfg) {
  if (cfg.input.empty()) throw std::invalid_argument("scatter: --config input or --input required");
  if (cfg.output.empty()) throw std::invalid_argument("scatter: --out required");
  Image2D x = load_image(cfg.input, cfg.to_load_options());
  int ph = next_pow2(x.height), pw = next_pow2(x.width);
  if (ph != x.height || pw != x.width) x = mirror_pad(x, ph, pw);
  ScatteringOutput out = rigid_motion_scattering(x, cfg.to_scattering_config());
  write_feature_file(cfg.output, out, cfg.to_pooling(), cfg);
  std::printf("wrote %s (%zu paths)\n", cfg.output.c_str(), out.entries.size());
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  if (cfg.dataset_root.empty()) throw std::invalid_argument("train: dataset_root required");
  if (cfg.output.empty()) throw std::invalid_argument("train: --out required");
  DatasetManifest m = scan_dataset(cfg.dataset_root);
  ScatteringConfig sc = cfg.to_scattering_config();
  TrainConfig tc = cfg.to_train_config();
  LoadOptions lo = cfg.to_load_options();
  std::vector<std::pair<int, int>> items;
  for (int c = 0; c < int(m.classes.size()); ++c)
    for (int i = 0; i < int(m.classes[size_t(c)].paths.size()); ++i) items.emplace_back(c, i);
  std::vector<std::vector<std::vector<double>>> sets(items.size());
  parallel_for(int(items.size()), effective_workers(cfg), [&](int t) {
    auto [c, i] = items[size_t(t)];
    sets[size_t(t)] = scale_feature_set(load_image(m.classes[size_t(c)].paths[size_t(i)], lo), sc, tc);
  });
  std::vector<std::vector<std::vector<double>>> per_class(m.classes.size());
  for (size_t t = 0; t < items.size(); ++t)
    for (auto& v : sets[t]) per_class[size_t(items[t].first)].push_back(std::move(v));
  std::vector<ClassModel> models;
  for (int c = 0; c < int(per_class.size()); ++c)
    models.push_back(fit_class_model(per_class[size_t(c)], tc, c));
  write_model_file(cfg.output, models, cfg);
  std::printf("wrote %s (%zu classes, dim %ld)\n", cfg.output.c_str(), models.size(),
              long(models[0].mu.size()));
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.dataset_root.empty()) throw std::invalid_argument("eval: dataset_root required");
  DatasetManifest m = scan_dataset(cfg.dataset_root);
  AccuracyReport rep = evaluate(m, cfg.to_split_spec(), cfg.to_train_config(),
                                cfg.to_scattering_config(), cfg.to_load_options(),
                                effective_workers(cfg));
  std::string text = serialize_run_config(cfg) + serialize_accuracy_report(rep);
  if (!cfg.output.empty()) {
    std::ofstream os(cfg.output);
    if (!os) throw IoError("eval: cannot open " + cfg.output);
    os << text;
  }
  std::fputs(text.c_str(), stdout);
  return 0;
}

#define SELFCHECK(name, cond)                              \
  do {                                                     \
    bool ok_ = (cond);                                     \
    std::printf("%-34s %s\n", name, ok_ ? "ok" : "FAIL");  \
    if (!ok_) failures++;                                  \
  } while (0)

int cmd_selftest() {
  int failures = 0;
  SplitMix64 rng(99);
  {  // group axioms on random elements
    bool ok = true;
    for (int t = 0; t < 200; ++t) {
      RigidMotion g(rng.normal(), rng.normal(), rng.uniform() * 6.28);
      RigidMotion gi = g_inverse(g);
      RigidMotion e = g_product(g, gi);
      ok &= std::abs(e.v1) < 1e-10 && std::abs(e.v2) < 1e-10 &&
            (std::abs(e.theta) < 1e-10 || std::abs(e.theta - 2 * kPi) < 1e-10);
    }
    SELFCHECK("se2 group inverse", ok);
  }
  {  // Littlewood-Paley audit of the default banks
    FilterBank2D fb = build_filter_bank(default_morlet_params(), 3, 8, 64, 64);
    SELFCHECK("spatial LP epsilon < 0.5", fb.lp_epsilon < 0.5);
    AngularFilterBank ab = build_angular_bank(default_angular_params(), 8, 2);
    SELFCHECK("angular LP epsilon < 0.5", ab.lp_epsilon < 0.5);
  }
  {  // energy bound on a random volume
    SE2FilterBank bank = build_se2_bank(default_morlet_params(), default_angular_params(), 3, 2, 8,
                                        2 * kPi, 32, 32);
    SE2Volume x(32, 32, 8, 2 * kPi);
    for (auto& sl : x.slices)
      for (auto& z : sl.samples) z = rng.normal();
    RMWaveletCoeffs wc = rm_wavelet_transform(x, bank, 8, 0);
    double e = rm_transform_energy(wc), n = x.sq_norm();
    double lo = (1.0 - bank.angular.lp_epsilon) * (1.0 - bank.spatial.lp_epsilon) * n;
    SELFCHECK("energy bound", e >= lo && e <= n * (1 + 1e-6));
  }
  {  // cascade agrees with the direct backend
    Image2D x(32, 32);
    for (auto& v : x.samples) v = rng.uniform();
    ScatteringConfig cfg;
    cfg.J = 3;
    cfg.C = 4;
    cfg.K = 1;
    cfg.oversampling = 1;
    auto a = translation_scattering(x, cfg);
    cfg.backend = RMBackend::cascade;
    auto b = translation_scattering(x, cfg);
    SELFCHECK("cascade vs direct", scattering_distance(a, b) < 1e-10 * std::sqrt(scattering_sq_norm(a)) + 1e-12);
  }
  {  // path count
    Image2D x(32, 32);
    for (auto& v : x.samples) v = rng.uniform();
    ScatteringConfig cfg;
    cfg.J = 3;
    cfg.C = 8;
    cfg.oversampling = 0;
    auto out = translation_scattering(x, cfg);
    int s1 = 0, s2 = 0;
    for (auto& e : out.entries) {
      s1 += e.m == 1;
      s2 += e.m == 2;
    }
    SELFCHECK("path counts (24, 192)", s1 == 24 && s2 == 192);
  }
  {  // config round trip
    RunConfig c;
    c.seed = 777;
    RunConfig d = parse_run_config(serialize_run_config(c));
    SELFCHECK("config round trip", d.seed == 777 && d.orientations == c.orientations);
  }
  return failures ? 1 : 0;
}

int cmd_bench(const RunConfig& cfg) {
  std::vector<int> sizes = {128, 256, 512};
  for (auto backend : {RMBackend::cascade, RMBackend::direct}) {
    ScalingBench b = run_scaling_bench(sizes, backend);
    std::printf("backend=%s", backend == RMBackend::cascade ? "cascade" : "direct");
    for (size_t i = 0; i < b.sizes.size(); ++i)
      std::printf(" %dx%d=%.3fs", b.sizes[i], b.sizes[i], b.seconds[i]);
    std::printf(" exponent=%.3f\n", b.exponent);
  }
  (void)cfg;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigid-motion scattering toolkit"};
  app.require_subcommand(1);
  CommonFlags fl;
  int audit_size = 256;

  CLI::App* audit = app.add_subcommand("filters-audit", "print Littlewood-Paley reports");
  audit->add_option("--size", audit_size, "frequency grid side");
  add_common(audit, fl);
  CLI::App* scatter = app.add_subcommand("scatter", "write a feature file for one image");
  std::string input;
  scatter->add_option("--input", input, "input image");
  add_common(scatter, fl);
  CLI::App* train = app.add_subcommand("train", "fit class models on a dataset");
  std::string dataset;
  train->add_option("--dataset", dataset, "dataset root (one directory per class)");
  add_common(train, fl);
  CLI::App* eval_cmd = app.add_subcommand("eval", "split evaluation on a dataset");
  eval_cmd->add_option("--dataset", dataset, "dataset root (one directory per class)");
  add_common(eval_cmd, fl);
  CLI::App* selftest = app.add_subcommand("selftest", "run built-in property checks");
  add_common(selftest, fl);
  CLI::App* bench = app.add_subcommand("bench", "backend timings and scaling exponent");
  add_common(bench, fl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    RunConfig cfg = resolve_config(fl);
    if (!input.empty()) cfg.input = input;
    if (!dataset.empty()) cfg.dataset_root = dataset;
    if (audit->parsed()) return cmd_filters_audit(cfg, audit_size);
    if (scatter->parsed()) return cmd_scatter(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (eval_cmd->parsed()) return cmd_eval(cfg);
    if (selftest->parsed()) return cmd_selftest();
    if (bench->parsed()) return cmd_bench(cfg);
  } catch (const rmscat::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
