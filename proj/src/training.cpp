#include "genesis/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "genesis/parallel.hpp"

namespace genesis {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(min_delta > 0.0) || !(min_delta < 1.0))
    throw std::invalid_argument("min_delta must be in (0, 1)");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

OptimizerState OptimizerState::create(const GenesisModel& model,
                                      OptimizerKind kind,
                                      double learning_rate) {
  OptimizerState st;
  st.kind = kind;
  st.learning_rate = learning_rate;
  if (kind == OptimizerKind::kAdam) {
    for (std::span<const double> p : model.params()) {
      st.m.emplace_back(p.size(), 0.0);
      st.v.emplace_back(p.size(), 0.0);
    }
  }
  return st;
}

void OptimizerState::apply(GenesisModel& model, const Gradients& grads) {
  std::vector<std::span<double>> params = model.params();
  if (params.size() != grads.tensors.size())
    throw std::invalid_argument("gradient shape mismatch");
  ++step;
  if (kind == OptimizerKind::kSgd) {
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t i = 0; i < params[t].size(); ++i)
        params[t][i] -= learning_rate * grads.tensors[t][i];
    return;
  }
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    double* mt = m[t].data();
    double* vt = v[t].data();
    const double* g = grads.tensors[t].data();
    double* p = params[t].data();
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      mt[i] = kAdamBeta1 * mt[i] + (1.0 - kAdamBeta1) * g[i];
      vt[i] = kAdamBeta2 * vt[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      const double mhat = mt[i] / bc1;
      const double vhat = vt[i] / bc2;
      p[i] -= learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  }
}

double model_accuracy(const GenesisModel& model, const ViewCollection& views,
                      FftConvWorkspace* ws) {
  if (views.views.empty())
    throw std::invalid_argument("accuracy of an empty set");
  ForwardCache cache;
  std::size_t correct = 0;
  for (const View& v : views.views) {
    const std::vector<double> probs =
        forward_view(model, v, false, nullptr, cache, ws);
    const int predicted = probs[kLabelPlanet] >= 0.5 ? kLabelPlanet
                                                     : kLabelNonPlanet;
    if (predicted == v.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(views.size());
}

std::pair<GenesisModel, TrainReport> train_instance(
    const ViewCollection& train, const ViewCollection& validation,
    const ModelSpec& spec, const TrainConfig& cfg,
    std::uint64_t instance_seed) {
  cfg.validate();
  if (train.views.empty() || validation.views.empty())
    throw std::invalid_argument("training and validation sets must be non-empty");
  train.validate();
  validation.validate();
  if (train.bin_count != spec.bin_count ||
      validation.bin_count != spec.bin_count)
    throw std::invalid_argument("bin count mismatch between data and model");

  const auto t_start = std::chrono::steady_clock::now();

  GenesisModel model = GenesisModel::make(spec);
  Rng rng(instance_seed);
  init_parameters(model, rng);

  OptimizerState opt =
      OptimizerState::create(model, cfg.optimizer, cfg.learning_rate);
  Gradients grads = Gradients::zeros_like(model);
  FftConvWorkspace ws;
  ForwardCache cache;

  TrainReport report;
  report.seed = instance_seed;

  GenesisModel best_model = model;
  double best_acc = -1.0;
  int epochs_without_improvement = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + cfg.batch_size);
      grads.zero();
      for (std::size_t i = start; i < end; ++i) {
        const View& v = train.views[order[i]];
        const std::vector<double> probs =
            forward_view(model, v, true, &rng, cache, &ws);
        loss_sum += -std::log(std::max(probs[v.label], 1e-300));
        const int predicted = probs[kLabelPlanet] >= probs[kLabelNonPlanet]
                                  ? kLabelPlanet
                                  : kLabelNonPlanet;
        if (predicted == v.label) ++correct;
        backward(model, cache, v.label, grads, &ws);
      }
      grads.scale(1.0 / static_cast<double>(end - start));
      opt.apply(model, grads);
      ws.invalidate_weights();
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(train.size());
    stats.validation_accuracy = model_accuracy(model, validation, &ws);
    report.epochs.push_back(stats);
    report.stopped_epoch = epoch;

    if (stats.validation_accuracy - best_acc >= cfg.min_delta) {
      best_acc = stats.validation_accuracy;
      best_model = model;
      report.best_epoch = epoch;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= cfg.patience) break;
    }
  }

  report.best_validation_accuracy = best_acc;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return {std::move(best_model), std::move(report)};
}

std::vector<std::pair<GenesisModel, TrainReport>> train_ensemble(
    const ViewCollection& train, const ViewCollection& validation,
    const ModelSpec& spec, const TrainConfig& cfg, int n_instances) {
  if (n_instances < 1)
    throw std::invalid_argument("n_instances must be >= 1");
  std::vector<std::pair<GenesisModel, TrainReport>> results(n_instances);
  std::vector<std::string> errors(n_instances);
  parallel_for(static_cast<std::size_t>(n_instances), [&](std::size_t i) {
    try {
      results[i] = train_instance(train, validation, spec, cfg, cfg.seed + i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < n_instances; ++i)
    if (!errors[i].empty())
      throw std::runtime_error("instance " + std::to_string(i) + ": " +
                               errors[i]);
  return results;
}

}  // namespace genesis
