#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genesis/dataset.hpp"
#include "genesis/model.hpp"
#include "genesis/network.hpp"

namespace genesis {

enum class OptimizerKind { kAdam, kSgd };

struct TrainConfig {
  int max_epochs = 125;
  int patience = 50;
  double min_delta = 0.001;  // absolute validation-accuracy improvement
  double learning_rate = 1e-3;
  int batch_size = 64;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainReport {
  std::uint64_t seed = 0;
  std::vector<EpochStats> epochs;
  int stopped_epoch = 0;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
  double wall_time_seconds = 0.0;
};

// Adam moment accumulators (beta1 0.9, beta2 0.999, eps 1e-8), shape-matched
// to the model parameters.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static OptimizerState create(const GenesisModel& model, OptimizerKind kind,
                               double learning_rate);
  void apply(GenesisModel& model, const Gradients& grads);
};

// One training session: Xavier init from instance_seed, minibatch passes
// reshuffled per epoch, per-epoch validation accuracy, early stopping once
// the validation accuracy has not improved by min_delta for `patience`
// consecutive epochs. Returns the parameters of the best validation epoch.
std::pair<GenesisModel, TrainReport> train_instance(
    const ViewCollection& train, const ViewCollection& validation,
    const ModelSpec& spec, const TrainConfig& cfg, std::uint64_t instance_seed);

// Instance i runs with seed cfg.seed + i; instances are independent and may
// run in parallel, results are ordered by instance index either way.
std::vector<std::pair<GenesisModel, TrainReport>> train_ensemble(
    const ViewCollection& train, const ViewCollection& validation,
    const ModelSpec& spec, const TrainConfig& cfg, int n_instances = 10);

// Fraction of views whose thresholded planet probability matches the label
// (inference mode, threshold 0.5, ties classify as planet).
double model_accuracy(const GenesisModel& model, const ViewCollection& views,
                      FftConvWorkspace* ws = nullptr);

}  // namespace genesis
