#include "genesis/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "genesis/parallel.hpp"

namespace genesis {

namespace {
// substream tags for the per-partition augmentation and ensemble seeds
constexpr std::uint64_t kAugmentStream = 0x6175676d656e74ULL;   // "augment"
constexpr std::uint64_t kEnsembleStream = 0x656e73656d626cULL;  // "ensembl"
}  // namespace

PredictionSet ensemble_predict(const std::vector<GenesisModel>& models,
                               const ViewCollection& views, double threshold) {
  if (models.empty()) throw std::invalid_argument("need at least one model");
  views.validate();
  for (const GenesisModel& m : models)
    if (m.spec.bin_count != views.bin_count)
      throw std::invalid_argument("bin count mismatch between model and views");

  PredictionSet out;
  out.threshold = threshold;
  out.scores.assign(views.size(), 0.0);
  out.labels.resize(views.size());
  for (std::size_t i = 0; i < views.size(); ++i)
    out.labels[i] = views.views[i].label;

  // One frozen-weight workspace per model, scores accumulated model-major.
  for (const GenesisModel& m : models) {
    FftConvWorkspace ws;
    ForwardCache cache;
    for (std::size_t i = 0; i < views.size(); ++i) {
      const std::vector<double> probs =
          forward_view(m, views.views[i], false, nullptr, cache, &ws);
      out.scores[i] += probs[kLabelPlanet];
    }
  }
  const double inv = 1.0 / static_cast<double>(models.size());
  for (double& s : out.scores) s *= inv;
  return out;
}

double accuracy(const PredictionSet& p) {
  if (p.scores.empty()) throw std::invalid_argument("empty prediction set");
  if (p.scores.size() != p.labels.size())
    throw std::invalid_argument("prediction set size mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < p.scores.size(); ++i) {
    const int predicted =
        p.scores[i] >= p.threshold ? kLabelPlanet : kLabelNonPlanet;
    if (predicted == p.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(p.scores.size());
}

double auc(const PredictionSet& p) {
  if (p.scores.size() != p.labels.size())
    throw std::invalid_argument("prediction set size mismatch");
  const std::size_t n = p.scores.size();
  std::size_t n_pos = 0;
  for (int l : p.labels) n_pos += l == kLabelPlanet ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("AUC undefined: needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p.scores[a] < p.scores[b];
  });

  // average ranks over tied scores
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && p.scores[order[j + 1]] == p.scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (p.labels[order[k]] == kLabelPlanet) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

ConfusionCounts confusion_counts(const PredictionSet& p) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < p.scores.size(); ++i) {
    const bool predicted_planet = p.scores[i] >= p.threshold;
    const bool is_planet = p.labels[i] == kLabelPlanet;
    if (predicted_planet && is_planet)
      ++c.tp;
    else if (predicted_planet && !is_planet)
      ++c.fp;
    else if (!predicted_planet && !is_planet)
      ++c.tn;
    else
      ++c.fn;
  }
  return c;
}

EnsembleReport evaluate_ensemble(const std::vector<GenesisModel>& models,
                                 const ViewCollection& test) {
  if (test.views.empty()) throw std::invalid_argument("empty test set");
  const PredictionSet p = ensemble_predict(models, test);
  EnsembleReport r;
  r.ensembled_accuracy = accuracy(p);
  r.ensembled_auc = auc(p);
  r.confusion = confusion_counts(p);
  r.n_models = models.size();
  r.n_views = test.size();
  return r;
}

Histogram build_histogram(const std::vector<double>& values, int n_bins) {
  if (values.empty()) throw std::invalid_argument("empty histogram input");
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) {  // degenerate observed range
    lo -= 5e-4;
    hi += 5e-4;
  }
  Histogram h;
  h.edges.resize(n_bins + 1);
  h.counts.assign(n_bins, 0);
  const double width = (hi - lo) / n_bins;
  for (int b = 0; b <= n_bins; ++b) h.edges[b] = lo + width * b;
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    if (b < 0) b = 0;
    if (b >= n_bins) b = n_bins - 1;
    ++h.counts[b];
  }
  return h;
}

CvReport run_mccv(const ViewCollection& views, const ModelSpec& spec,
                  const TrainConfig& cfg, const MccvOptions& opts) {
  if (opts.n_partitions < 1)
    throw std::invalid_argument("need at least one partition");
  views.validate();
  if (views.bin_count != spec.bin_count)
    throw std::invalid_argument("bin count mismatch between views and model");

  const Rng root(cfg.seed);
  CvReport report;
  report.partitions.resize(opts.n_partitions);
  std::vector<std::string> errors(opts.n_partitions);

  parallel_for(opts.n_partitions, [&](std::size_t p) {
    try {
      PartitionResult& res = report.partitions[p];
      res.partition_index = p;
      res.split = mc_split(views.size(), cfg.seed + p);

      const ViewCollection train_part = views.subset(res.split.train);
      const ViewCollection val_part = views.subset(res.split.validation);
      const ViewCollection test_part = views.subset(res.split.test);

      Rng aug_rng = root.substream(kAugmentStream + p);
      const ViewCollection augmented =
          augment_training_set(train_part, aug_rng, opts.augment);

      TrainConfig part_cfg = cfg;
      part_cfg.seed = root.substream(kEnsembleStream + p).seed();
      res.ensemble_seed = part_cfg.seed;

      const auto trained =
          train_ensemble(augmented, val_part, spec, part_cfg, opts.n_instances);
      std::vector<GenesisModel> models;
      models.reserve(trained.size());
      for (const auto& [model, rep] : trained) models.push_back(model);
      res.report = evaluate_ensemble(models, test_part);
    } catch (const std::exception& e) {
      errors[p] = e.what();
    }
  });
  for (std::size_t p = 0; p < opts.n_partitions; ++p)
    if (!errors[p].empty())
      throw std::runtime_error("partition " + std::to_string(p) + ": " +
                               errors[p]);

  std::vector<double> accuracies;
  accuracies.reserve(opts.n_partitions);
  for (const PartitionResult& r : report.partitions)
    accuracies.push_back(r.report.ensembled_accuracy);

  const double n = static_cast<double>(accuracies.size());
  report.accuracy_mean =
      std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : accuracies)
    ss += (a - report.accuracy_mean) * (a - report.accuracy_mean);
  report.accuracy_std = std::sqrt(ss / n);
  report.accuracy_min = *std::min_element(accuracies.begin(), accuracies.end());
  report.accuracy_max = *std::max_element(accuracies.begin(), accuracies.end());
  report.histogram = build_histogram(accuracies, opts.histogram_bins);
  return report;
}

BinsizeComparison compare_binsizes(const RawCorpus& corpus,
                                   std::array<int, 2> bin_counts,
                                   const PrepConfig& prep,
                                   const ModelSpec& spec_template,
                                   const TrainConfig& cfg,
                                   const MccvOptions& opts) {
  if (corpus.lightcurves.size() != corpus.catalog.size())
    throw std::invalid_argument("corpus catalog/lightcurve count mismatch");
  if (corpus.catalog.empty()) throw std::invalid_argument("empty corpus");

  BinsizeComparison out;
  out.bin_counts = bin_counts;

  // Preprocess every record at both resolutions; drop records that fail at
  // either one so both collections stay index-aligned.
  std::array<ViewCollection, 2> collections;
  for (int side = 0; side < 2; ++side)
    collections[side].bin_count = bin_counts[side];
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < corpus.catalog.size(); ++i) {
    std::array<View, 2> views;
    bool ok = true;
    for (int side = 0; side < 2 && ok; ++side) {
      PrepConfig p = prep;
      p.bin_count = bin_counts[side];
      try {
        views[side] = preprocess(corpus.lightcurves[i],
                                 corpus.catalog[i].ephemeris, p);
        views[side].label = corpus.catalog[i].label;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    for (int side = 0; side < 2; ++side)
      collections[side].views.push_back(std::move(views[side]));
  }
  out.skipped_records = {skipped, skipped};

  for (int side = 0; side < 2; ++side) {
    ModelSpec spec = spec_template;
    spec.bin_count = bin_counts[side];
    out.reports[side] = run_mccv(collections[side], spec, cfg, opts);
  }
  return out;
}

}  // namespace genesis
