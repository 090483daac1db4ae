#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "genesis/dataset.hpp"
#include "genesis/training.hpp"

namespace genesis {

struct PredictionSet {
  std::vector<double> scores;  // ensembled planet-class probability
  std::vector<int> labels;
  double threshold = 0.5;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct EnsembleReport {
  double ensembled_accuracy = 0.0;
  double ensembled_auc = 0.0;
  ConfusionCounts confusion;
  std::size_t n_models = 0;
  std::size_t n_views = 0;
};

struct Histogram {
  std::vector<double> edges;       // n_bins + 1
  std::vector<std::size_t> counts; // n_bins
};

struct PartitionResult {
  std::size_t partition_index = 0;
  DatasetSplit split;
  std::uint64_t ensemble_seed = 0;
  EnsembleReport report;
};

struct CvReport {
  std::vector<PartitionResult> partitions;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // population standard deviation
  double accuracy_min = 0.0;
  double accuracy_max = 0.0;
  Histogram histogram;
};

// Mean planet-class probability over the models, inference mode.
PredictionSet ensemble_predict(const std::vector<GenesisModel>& models,
                               const ViewCollection& views,
                               double threshold = 0.5);

// Fraction of views where (score >= threshold) matches (label == planet);
// a score exactly at the threshold classifies as planet.
double accuracy(const PredictionSet& p);

// Probability that a random positive outscores a random negative, ties at
// half weight (Mann-Whitney ranks, O(n log n)).
double auc(const PredictionSet& p);

ConfusionCounts confusion_counts(const PredictionSet& p);

EnsembleReport evaluate_ensemble(const std::vector<GenesisModel>& models,
                                 const ViewCollection& test);

Histogram build_histogram(const std::vector<double>& values, int n_bins = 20);

struct MccvOptions {
  std::size_t n_partitions = 20;
  int n_instances = 10;
  AugmentOptions augment;
  int histogram_bins = 20;
};

// The Monte Carlo cross-validation experiment: per partition, split with
// seed cfg.seed + partition, measure the training-set noise statistics,
// augment only the training part, train an ensemble, evaluate on that
// partition's test part. Aggregates mean/std/min/max and a histogram of the
// ensembled accuracies.
CvReport run_mccv(const ViewCollection& views, const ModelSpec& spec,
                  const TrainConfig& cfg, const MccvOptions& opts = {});

struct RawCorpus {
  std::vector<RawLightCurve> lightcurves;
  std::vector<TceRecord> catalog;
};

struct BinsizeComparison {
  std::array<int, 2> bin_counts{};
  std::array<CvReport, 2> reports;
  std::array<std::size_t, 2> skipped_records{};
};

// Preprocesses the same raw corpus at two resolutions and runs the identical
// cross-validation experiment (same seeds, paired partitions) on each.
// Records that fail preprocessing at either resolution are skipped from both
// so the partition indices stay aligned.
BinsizeComparison compare_binsizes(const RawCorpus& corpus,
                                   std::array<int, 2> bin_counts,
                                   const PrepConfig& prep,
                                   const ModelSpec& spec_template,
                                   const TrainConfig& cfg,
                                   const MccvOptions& opts = {});

}  // namespace genesis
