// Command-line front end: synth, preprocess, split, train, evaluate, mccv.
// Configuration precedence: built-in defaults < --config file < flags.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "genesis/config.hpp"
#include "genesis/dataset.hpp"
#include "genesis/evaluation.hpp"
#include "genesis/parallel.hpp"
#include "genesis/report_json.hpp"
#include "genesis/training.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace genesis;
using genesis::cli::RunManifest;

#ifndef GENESIS_VERSION
#define GENESIS_VERSION "0.0.0"
#endif

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "bin_left,bin_right,count\n";
  char buf[96];
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%zu\n", h.edges[b],
                  h.edges[b + 1], h.counts[b]);
    out << buf;
  }
}

// Fill an option from the config file when the flag was not given.
template <typename T>
void config_fill(const CLI::App& app, const KeyValueConfig& cfg,
                 const std::string& flag, const std::string& key, T& value) {
  if (app.count(flag) > 0 || !cfg.has(key)) return;
  if constexpr (std::is_same_v<T, bool>) {
    value = cfg.get_bool(key, value);
  } else if constexpr (std::is_floating_point_v<T>) {
    value = static_cast<T>(cfg.get_double(key, value));
  } else if constexpr (std::is_integral_v<T>) {
    value = static_cast<T>(cfg.get_int(key, value));
  } else {
    value = cfg.get_string(key, value);
  }
}

struct CommonFlags {
  std::string config_path;
  int jobs = 0;  // 0 = hardware concurrency
};

void add_common(CLI::App* cmd, CommonFlags& common) {
  cmd->add_option("--config", common.config_path,
                  "key = value configuration file");
  cmd->add_option("--jobs", common.jobs,
                  "worker cap (0 = hardware concurrency)");
}

KeyValueConfig resolve_common(const CLI::App& cmd, CommonFlags& common) {
  KeyValueConfig cfg;
  if (!common.config_path.empty())
    cfg = KeyValueConfig::load(common.config_path);
  config_fill(cmd, cfg, "--jobs", "jobs", common.jobs);
  set_max_jobs(common.jobs);
  return cfg;
}

struct TrainFlags {
  int instances = 10;
  int epochs = 125;
  int patience = 50;
  double min_delta = 0.001;
  double learning_rate = 1e-3;
  int batch_size = 64;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  bool augment = true;
  bool zero_mean_noise = false;
  int gaussian_copies = 4;
};

void add_train_flags(CLI::App* cmd, TrainFlags& tf) {
  cmd->add_option("--instances", tf.instances, "models per ensemble")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", tf.epochs, "max training epochs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--patience", tf.patience, "early-stopping patience")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-delta", tf.min_delta,
                  "early-stopping accuracy improvement");
  cmd->add_option("--lr", tf.learning_rate, "learning rate");
  cmd->add_option("--batch", tf.batch_size, "minibatch size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", tf.seed, "base seed");
  cmd->add_option("--optimizer", tf.optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}));
  cmd->add_flag("--augment,!--no-augment", tf.augment,
                "augment the training part (reflection + noisy copies)");
  cmd->add_flag("--zero-mean-noise", tf.zero_mean_noise,
                "force augmentation noise to mean 0");
  cmd->add_option("--gaussian-copies", tf.gaussian_copies,
                  "noisy copies per training view")
      ->check(CLI::PositiveNumber);
}

void config_fill_train(const CLI::App& cmd, const KeyValueConfig& cfg,
                       TrainFlags& tf) {
  config_fill(cmd, cfg, "--instances", "instances", tf.instances);
  config_fill(cmd, cfg, "--epochs", "epochs", tf.epochs);
  config_fill(cmd, cfg, "--patience", "patience", tf.patience);
  config_fill(cmd, cfg, "--min-delta", "min_delta", tf.min_delta);
  config_fill(cmd, cfg, "--lr", "learning_rate", tf.learning_rate);
  config_fill(cmd, cfg, "--batch", "batch_size", tf.batch_size);
  config_fill(cmd, cfg, "--seed", "seed", tf.seed);
  config_fill(cmd, cfg, "--optimizer", "optimizer", tf.optimizer);
  config_fill(cmd, cfg, "--augment", "augment", tf.augment);
  config_fill(cmd, cfg, "--zero-mean-noise", "zero_mean_noise",
              tf.zero_mean_noise);
  config_fill(cmd, cfg, "--gaussian-copies", "gaussian_copies",
              tf.gaussian_copies);
}

TrainConfig to_train_config(const TrainFlags& tf) {
  TrainConfig cfg;
  cfg.max_epochs = tf.epochs;
  cfg.patience = tf.patience;
  cfg.min_delta = tf.min_delta;
  cfg.learning_rate = tf.learning_rate;
  cfg.batch_size = tf.batch_size;
  cfg.seed = tf.seed;
  cfg.optimizer =
      tf.optimizer == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
  return cfg;
}

nlohmann::json train_flags_json(const TrainFlags& tf) {
  return {{"instances", tf.instances},
          {"epochs", tf.epochs},
          {"patience", tf.patience},
          {"min_delta", tf.min_delta},
          {"learning_rate", tf.learning_rate},
          {"batch_size", tf.batch_size},
          {"seed", tf.seed},
          {"optimizer", tf.optimizer},
          {"augment", tf.augment},
          {"zero_mean_noise", tf.zero_mean_noise},
          {"gaussian_copies", tf.gaussian_copies}};
}

std::vector<GenesisModel> load_model_dir(const std::string& dir,
                                         std::vector<std::string>* paths) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir))
    throw std::runtime_error("model directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".genm")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no .genm model files in " + dir);
  std::vector<GenesisModel> models;
  models.reserve(files.size());
  for (const std::string& f : files) models.push_back(load_model(f));
  if (paths) *paths = files;
  return models;
}

std::string instance_name(int i, const char* suffix) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "instance_%02d%s", i, suffix);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_synth(const CLI::App& cmd, CommonFlags& common, int n_per_class,
              int bins, double noise_std, std::uint64_t seed, int samples,
              const std::string& out_dir, bool raw) {
  const KeyValueConfig cfg = resolve_common(cmd, common);
  SynthOptions opts;
  opts.n_per_class = n_per_class;
  opts.bin_count = bins;
  opts.noise_std = noise_std;
  opts.seed = seed;
  opts.samples_per_curve = samples;
  opts.keep_raw = raw;
  config_fill(cmd, cfg, "--n-per-class", "n_per_class", opts.n_per_class);
  config_fill(cmd, cfg, "--bins", "bins", opts.bin_count);
  config_fill(cmd, cfg, "--noise-std", "noise_std", opts.noise_std);
  config_fill(cmd, cfg, "--seed", "seed", opts.seed);
  config_fill(cmd, cfg, "--samples", "samples", opts.samples_per_curve);

  Timer timer;
  const SynthCorpus corpus = synth_generate(opts);

  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = "synth";
  manifest.tool_version = GENESIS_VERSION;
  manifest.jobs = max_jobs();
  manifest.flags = {{"n_per_class", opts.n_per_class},
                    {"bins", opts.bin_count},
                    {"noise_std", opts.noise_std},
                    {"seed", opts.seed},
                    {"samples", opts.samples_per_curve},
                    {"raw", opts.keep_raw}};

  const std::string views_path = (fs::path(out_dir) / "views.genv").string();
  write_views(views_path, corpus.views);
  manifest.outputs.push_back(views_path);

  const std::string catalog_path =
      (fs::path(out_dir) / "catalog.csv").string();
  save_catalog(catalog_path, corpus.catalog);
  manifest.outputs.push_back(catalog_path);

  if (opts.keep_raw) {
    const fs::path lc_dir = fs::path(out_dir) / "lightcurves";
    fs::create_directories(lc_dir);
    for (std::size_t i = 0; i < corpus.lightcurves.size(); ++i) {
      const std::string lc_path =
          (lc_dir / (corpus.catalog[i].target_id + ".csv")).string();
      write_lightcurve_csv(lc_path, corpus.lightcurves[i]);
    }
    manifest.outputs.push_back(lc_dir.string());
  }

  manifest.timings_seconds["total"] = timer.seconds();
  manifest.write((fs::path(out_dir) / "manifest.json").string());
  std::printf("synth: %zu views (%d per class), bin_count %d -> %s\n",
              corpus.views.size(), opts.n_per_class, opts.bin_count,
              out_dir.c_str());
  return 0;
}

int cmd_preprocess(const CLI::App& cmd, CommonFlags& common,
                   const std::string& catalog_path,
                   const std::string& lightcurve_dir, int bins,
                   PrepConfig prep, const std::string& out_path) {
  const KeyValueConfig cfg = resolve_common(cmd, common);
  prep.bin_count = bins;
  config_fill(cmd, cfg, "--bins", "bin_count", prep.bin_count);
  config_fill(cmd, cfg, "--sg-window", "sg_window", prep.sg_window);
  config_fill(cmd, cfg, "--sg-polyorder", "sg_polyorder", prep.sg_polyorder);
  config_fill(cmd, cfg, "--sigma-upper", "sigma_upper", prep.sigma_upper);
  config_fill(cmd, cfg, "--sigma-lower", "sigma_lower", prep.sigma_lower);

  Timer timer;
  const std::vector<TceRecord> catalog = load_catalog(catalog_path);

  RunManifest manifest;
  manifest.command = "preprocess";
  manifest.tool_version = GENESIS_VERSION;
  manifest.jobs = max_jobs();
  manifest.flags = {{"catalog", catalog_path},
                    {"lightcurves", lightcurve_dir},
                    {"bins", prep.bin_count},
                    {"sg_window", prep.sg_window},
                    {"sg_polyorder", prep.sg_polyorder},
                    {"sigma_upper", prep.sigma_upper},
                    {"sigma_lower", prep.sigma_lower}};
  manifest.add_input(catalog_path);

  ViewCollection views;
  views.bin_count = prep.bin_count;
  views.views.resize(catalog.size());
  std::vector<char> ok(catalog.size(), 0);
  std::vector<std::string> skip_reason(catalog.size());
  parallel_for(catalog.size(), [&](std::size_t i) {
    const std::string lc_path =
        (fs::path(lightcurve_dir) / (catalog[i].target_id + ".csv")).string();
    try {
      const RawLightCurve lc = read_lightcurve_csv(lc_path);
      View v = preprocess(lc, catalog[i].ephemeris, prep);
      v.label = catalog[i].label;
      views.views[i] = std::move(v);
      ok[i] = 1;
    } catch (const std::exception& e) {
      skip_reason[i] = e.what();
    }
  });

  ViewCollection kept;
  kept.bin_count = prep.bin_count;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (ok[i]) {
      kept.views.push_back(std::move(views.views[i]));
    } else {
      ++skipped;
      std::fprintf(stderr, "skip %s: %s\n", catalog[i].target_id.c_str(),
                   skip_reason[i].c_str());
    }
  }
  if (kept.views.empty()) {
    std::fprintf(stderr, "preprocess: no views produced from %s\n",
                 catalog_path.c_str());
    return 1;
  }
  write_views(out_path, kept);
  manifest.outputs.push_back(out_path);
  manifest.flags["skipped_records"] = skipped;
  manifest.timings_seconds["total"] = timer.seconds();
  manifest.write(out_path + ".manifest.json");
  std::printf("preprocess: %zu views written, %zu skipped -> %s\n",
              kept.views.size(), skipped, out_path.c_str());
  return 0;
}

int cmd_split(const CLI::App& cmd, CommonFlags& common,
              const std::string& views_path, std::uint64_t seed,
              const std::string& fractions_text, const std::string& out_path) {
  const KeyValueConfig cfg = resolve_common(cmd, common);
  std::uint64_t use_seed = seed;
  config_fill(cmd, cfg, "--seed", "seed", use_seed);

  SplitFractions fractions;
  if (!fractions_text.empty()) {
    double a = 0, b = 0, c = 0;
    if (std::sscanf(fractions_text.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
      throw std::runtime_error("bad --fractions, expected a,b,c");
    fractions = {a, b, c};
  }

  const ViewCollection views = read_views(views_path);
  const DatasetSplit split = mc_split(views.size(), fractions, use_seed);

  write_json_file(out_path, to_json(split));
  RunManifest manifest;
  manifest.command = "split";
  manifest.tool_version = GENESIS_VERSION;
  manifest.jobs = max_jobs();
  manifest.flags = {{"views", views_path},
                    {"seed", use_seed},
                    {"fractions", fractions_text.empty() ? "0.8,0.1,0.1"
                                                         : fractions_text}};
  manifest.add_input(views_path);
  manifest.outputs.push_back(out_path);
  manifest.write(out_path + ".manifest.json");
  std::printf("split: %zu/%zu/%zu -> %s\n", split.train.size(),
              split.validation.size(), split.test.size(), out_path.c_str());
  return 0;
}

int cmd_train(const CLI::App& cmd, CommonFlags& common,
              const std::string& views_path, std::uint64_t split_seed,
              const std::string& split_path, TrainFlags tf,
              const std::string& out_dir) {
  const KeyValueConfig cfg = resolve_common(cmd, common);
  config_fill_train(cmd, cfg, tf);

  Timer timer;
  const ViewCollection views = read_views(views_path);

  DatasetSplit split;
  if (!split_path.empty()) {
    split = split_from_json(read_json_file(split_path));
  } else {
    split = mc_split(views.size(), split_seed);
  }

  ViewCollection train_part = views.subset(split.train);
  const ViewCollection val_part = views.subset(split.validation);

  const TrainConfig train_cfg = to_train_config(tf);
  if (tf.augment) {
    AugmentOptions aug;
    aug.gaussian_copies = tf.gaussian_copies;
    aug.zero_mean_noise = tf.zero_mean_noise;
    Rng aug_rng = Rng(train_cfg.seed).substream(0x617567);  // "aug"
    train_part = augment_training_set(train_part, aug_rng, aug);
  }

  ModelSpec spec;
  spec.bin_count = views.bin_count;
  const auto trained =
      train_ensemble(train_part, val_part, spec, train_cfg, tf.instances);

  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = "train";
  manifest.tool_version = GENESIS_VERSION;
  manifest.jobs = max_jobs();
  manifest.flags = train_flags_json(tf);
  manifest.flags["views"] = views_path;
  manifest.flags["split_seed"] = split.seed;
  manifest.add_input(views_path);
  if (!split_path.empty()) manifest.add_input(split_path);

  write_json_file((fs::path(out_dir) / "split.json").string(),
                  to_json(split));
  manifest.outputs.push_back((fs::path(out_dir) / "split.json").string());

  for (std::size_t i = 0; i < trained.size(); ++i) {
    const std::string model_path =
        (fs::path(out_dir) / instance_name(static_cast<int>(i), ".genm"))
            .string();
    save_model(model_path, trained[i].first);
    manifest.outputs.push_back(model_path);
    const std::string report_path =
        (fs::path(out_dir) /
         instance_name(static_cast<int>(i), ".report.json"))
            .string();
    write_json_file(report_path, to_json(trained[i].second));
    manifest.outputs.push_back(report_path);
    manifest.timings_seconds[instance_name(static_cast<int>(i), "")] =
        trained[i].second.wall_time_seconds;
  }
  manifest.timings_seconds["total"] = timer.seconds();
  manifest.write((fs::path(out_dir) / "manifest.json").string());
  std::printf("train: %zu instances -> %s\n", trained.size(),
              out_dir.c_str());
  return 0;
}

int cmd_evaluate(const CLI::App& cmd, CommonFlags& common,
                 const std::string& models_dir, const std::string& views_path,
                 const std::string& split_path, const std::string& subset,
                 const std::string& out_path) {
  resolve_common(cmd, common);
  Timer timer;

  std::vector<std::string> model_paths;
  const std::vector<GenesisModel> models =
      load_model_dir(models_dir, &model_paths);
  ViewCollection views = read_views(views_path);

  if (!split_path.empty()) {
    const DatasetSplit split = split_from_json(read_json_file(split_path));
    const std::vector<std::size_t>* indices = &split.test;
    if (subset == "train") indices = &split.train;
    else if (subset == "validation") indices = &split.validation;
    else if (subset != "test")
      throw std::runtime_error("bad --subset: " + subset);
    views = views.subset(*indices);
  }

  const EnsembleReport report = evaluate_ensemble(models, views);
  write_json_file(out_path, to_json(report));

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.tool_version = GENESIS_VERSION;
  manifest.jobs = max_jobs();
  manifest.flags = {{"models", models_dir},
                    {"views", views_path},
                    {"split", split_path},
                    {"subset", subset}};
  manifest.add_input(views_path);
  for (const std::string& p : model_paths) manifest.add_input(p);
  manifest.outputs.push_back(out_path);
  manifest.timings_seconds["total"] = timer.seconds();
  manifest.write(out_path + ".manifest.json");
  std::printf(
      "evaluate: accuracy %.4f auc %.4f over %zu views (%zu models)\n",
      report.ensembled_accuracy, report.ensembled_auc, report.n_views,
      report.n_models);
  return 0;
}

int cmd_mccv(const CLI::App& cmd, CommonFlags& common,
             const std::string& views_path, const std::string& catalog_path,
             const std::string& lightcurve_dir, std::size_t partitions,
             int histogram_bins, TrainFlags tf, int bins, int bins_alt,
             const std::string& out_dir) {
  const KeyValueConfig cfg = resolve_common(cmd, common);
  config_fill_train(cmd, cfg, tf);
  config_fill(cmd, cfg, "--partitions", "partitions", partitions);
  config_fill(cmd, cfg, "--histogram-bins", "histogram_bins", histogram_bins);

  Timer timer;
  MccvOptions opts;
  opts.n_partitions = partitions;
  opts.n_instances = tf.instances;
  opts.augment.gaussian_copies = tf.gaussian_copies;
  opts.augment.zero_mean_noise = tf.zero_mean_noise;
  opts.histogram_bins = histogram_bins;
  const TrainConfig train_cfg = to_train_config(tf);

  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = "mccv";
  manifest.tool_version = GENESIS_VERSION;
  manifest.jobs = max_jobs();
  manifest.flags = train_flags_json(tf);
  manifest.flags["partitions"] = partitions;
  manifest.flags["histogram_bins"] = histogram_bins;

  if (!views_path.empty()) {
    const ViewCollection views = read_views(views_path);
    ModelSpec spec;
    spec.bin_count = views.bin_count;
    const CvReport report = run_mccv(views, spec, train_cfg, opts);

    manifest.flags["views"] = views_path;
    manifest.add_input(views_path);
    const std::string report_path =
        (fs::path(out_dir) / "cv_report.json").string();
    write_json_file(report_path, to_json(report));
    const std::string hist_path =
        (fs::path(out_dir) / "histogram.csv").string();
    write_histogram_csv(hist_path, report.histogram);
    manifest.outputs.push_back(report_path);
    manifest.outputs.push_back(hist_path);
    std::printf("mccv: %zu partitions, accuracy %.4f +- %.4f -> %s\n",
                partitions, report.accuracy_mean, report.accuracy_std,
                out_dir.c_str());
  } else {
    // paired resolution comparison from a raw corpus
    if (catalog_path.empty() || lightcurve_dir.empty())
      throw std::runtime_error(
          "mccv needs --views, or --catalog with --lightcurves for the "
          "paired-resolution mode");
    RawCorpus corpus;
    corpus.catalog = load_catalog(catalog_path);
    corpus.lightcurves.reserve(corpus.catalog.size());
    for (const TceRecord& rec : corpus.catalog)
      corpus.lightcurves.push_back(read_lightcurve_csv(
          (fs::path(lightcurve_dir) / (rec.target_id + ".csv")).string()));

    PrepConfig prep;
    config_fill(cmd, cfg, "--sg-window", "sg_window", prep.sg_window);
    config_fill(cmd, cfg, "--sg-polyorder", "sg_polyorder", prep.sg_polyorder);
    config_fill(cmd, cfg, "--sigma-upper", "sigma_upper", prep.sigma_upper);
    config_fill(cmd, cfg, "--sigma-lower", "sigma_lower", prep.sigma_lower);

    ModelSpec spec;
    const BinsizeComparison comparison = compare_binsizes(
        corpus, {bins, bins_alt}, prep, spec, train_cfg, opts);

    manifest.flags["catalog"] = catalog_path;
    manifest.flags["lightcurves"] = lightcurve_dir;
    manifest.flags["bins"] = bins;
    manifest.flags["bins_alt"] = bins_alt;
    manifest.add_input(catalog_path);

    const std::string report_path =
        (fs::path(out_dir) / "compare_report.json").string();
    write_json_file(report_path, to_json(comparison));
    manifest.outputs.push_back(report_path);
    for (int side = 0; side < 2; ++side) {
      const std::string hist_path =
          (fs::path(out_dir) /
           ("histogram_" + std::to_string(comparison.bin_counts[side]) +
            ".csv"))
              .string();
      write_histogram_csv(hist_path, comparison.reports[side].histogram);
      manifest.outputs.push_back(hist_path);
    }
    std::printf("mccv compare: %d bins %.4f vs %d bins %.4f -> %s\n", bins,
                comparison.reports[0].accuracy_mean, bins_alt,
                comparison.reports[1].accuracy_mean, out_dir.c_str());
  }
  manifest.timings_seconds["total"] = timer.seconds();
  manifest.write((fs::path(out_dir) / "manifest.json").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transit-classification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GENESIS_VERSION);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  CommonFlags synth_common;
  add_common(synth, synth_common);
  int synth_n = 500, synth_bins = 2001, synth_samples = 8000;
  double synth_noise = 0.5;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "synth_out";
  bool synth_raw = true;
  synth->add_option("--n-per-class", synth_n)->check(CLI::PositiveNumber);
  synth->add_option("--bins", synth_bins)->check(CLI::Range(2, 1 << 20));
  synth->add_option("--noise-std", synth_noise,
                    "noise level in units of the signal depth");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--samples", synth_samples, "samples per lightcurve")
      ->check(CLI::Range(64, 1 << 24));
  synth->add_option("--out", synth_out, "output directory");
  synth->add_flag("--raw,!--no-raw", synth_raw,
                  "write the raw lightcurves and catalog");

  // preprocess
  auto* prep_cmd =
      app.add_subcommand("preprocess", "lightcurves + catalog -> view file");
  CommonFlags prep_common;
  add_common(prep_cmd, prep_common);
  std::string prep_catalog, prep_dir, prep_out = "views.genv";
  int prep_bins = 2001;
  PrepConfig prep_defaults;
  prep_cmd->add_option("--catalog", prep_catalog)->required();
  prep_cmd->add_option("--lightcurves", prep_dir)->required();
  prep_cmd->add_option("--bins", prep_bins)->check(CLI::Range(2, 1 << 20));
  prep_cmd->add_option("--sg-window", prep_defaults.sg_window);
  prep_cmd->add_option("--sg-polyorder", prep_defaults.sg_polyorder);
  prep_cmd->add_option("--sigma-upper", prep_defaults.sigma_upper);
  prep_cmd->add_option("--sigma-lower", prep_defaults.sigma_lower);
  prep_cmd->add_option("--out", prep_out);

  // split
  auto* split_cmd = app.add_subcommand("split", "write a dataset split");
  CommonFlags split_common;
  add_common(split_cmd, split_common);
  std::string split_views, split_out = "split.json", split_fractions;
  std::uint64_t split_seed = 0;
  split_cmd->add_option("--views", split_views)->required();
  split_cmd->add_option("--seed", split_seed);
  split_cmd->add_option("--fractions", split_fractions,
                        "train,validation,test (default 0.8,0.1,0.1)");
  split_cmd->add_option("--out", split_out);

  // train
  auto* train_cmd = app.add_subcommand("train", "train an ensemble");
  CommonFlags train_common;
  add_common(train_cmd, train_common);
  std::string train_views, train_split_path, train_out = "ensemble_out";
  std::uint64_t train_split_seed = 0;
  TrainFlags train_flags;
  train_cmd->add_option("--views", train_views)->required();
  train_cmd->add_option("--split-seed", train_split_seed);
  train_cmd->add_option("--split", train_split_path,
                        "reuse a split.json instead of --split-seed");
  train_cmd->add_option("--out", train_out);
  add_train_flags(train_cmd, train_flags);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "ensemble metrics");
  CommonFlags eval_common;
  add_common(eval_cmd, eval_common);
  std::string eval_models, eval_views, eval_split, eval_subset = "test";
  std::string eval_out = "ensemble_report.json";
  eval_cmd->add_option("--models", eval_models, "directory of .genm files")
      ->required();
  eval_cmd->add_option("--views", eval_views)->required();
  eval_cmd->add_option("--split", eval_split,
                       "evaluate one part of this split.json");
  eval_cmd->add_option("--subset", eval_subset, "train|validation|test");
  eval_cmd->add_option("--out", eval_out);

  // mccv
  auto* mccv_cmd =
      app.add_subcommand("mccv", "Monte Carlo cross-validation experiment");
  CommonFlags mccv_common;
  add_common(mccv_cmd, mccv_common);
  std::string mccv_views, mccv_catalog, mccv_dir, mccv_out = "mccv_out";
  std::size_t mccv_partitions = 20;
  int mccv_hist_bins = 20, mccv_bins = 2001, mccv_bins_alt = 4002;
  TrainFlags mccv_flags;
  mccv_cmd->add_option("--views", mccv_views);
  mccv_cmd->add_option("--catalog", mccv_catalog,
                       "raw-corpus catalog (paired-resolution mode)");
  mccv_cmd->add_option("--lightcurves", mccv_dir);
  mccv_cmd->add_option("--partitions", mccv_partitions)
      ->check(CLI::PositiveNumber);
  mccv_cmd->add_option("--histogram-bins", mccv_hist_bins)
      ->check(CLI::PositiveNumber);
  mccv_cmd->add_option("--bins", mccv_bins);
  mccv_cmd->add_option("--bins-alt", mccv_bins_alt);
  mccv_cmd->add_option("--sg-window", prep_defaults.sg_window);
  mccv_cmd->add_option("--sg-polyorder", prep_defaults.sg_polyorder);
  mccv_cmd->add_option("--sigma-upper", prep_defaults.sigma_upper);
  mccv_cmd->add_option("--sigma-lower", prep_defaults.sigma_lower);
  mccv_cmd->add_option("--out", mccv_out);
  add_train_flags(mccv_cmd, mccv_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth(*synth, synth_common, synth_n, synth_bins, synth_noise,
                       synth_seed, synth_samples, synth_out, synth_raw);
    if (prep_cmd->parsed())
      return cmd_preprocess(*prep_cmd, prep_common, prep_catalog, prep_dir,
                            prep_bins, prep_defaults, prep_out);
    if (split_cmd->parsed())
      return cmd_split(*split_cmd, split_common, split_views, split_seed,
                       split_fractions, split_out);
    if (train_cmd->parsed())
      return cmd_train(*train_cmd, train_common, train_views, train_split_seed,
                       train_split_path, train_flags, train_out);
    if (eval_cmd->parsed())
      return cmd_evaluate(*eval_cmd, eval_common, eval_models, eval_views,
                          eval_split, eval_subset, eval_out);
    if (mccv_cmd->parsed())
      return cmd_mccv(*mccv_cmd, mccv_common, mccv_views, mccv_catalog,
                      mccv_dir, mccv_partitions, mccv_hist_bins, mccv_flags,
                      mccv_bins, mccv_bins_alt, mccv_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
