#include "genesis/network.hpp"

#include <stdexcept>

namespace genesis {

Gradients Gradients::zeros_like(const GenesisModel& model) {
  Gradients g;
  for (std::span<const double> p : model.params())
    g.tensors.emplace_back(p.size(), 0.0);
  return g;
}

void Gradients::zero() {
  for (auto& t : tensors) std::fill(t.begin(), t.end(), 0.0);
}

void Gradients::scale(double factor) {
  for (auto& t : tensors)
    for (double& v : t) v *= factor;
}

std::vector<double> forward(const GenesisModel& model,
                            std::span<const float> bins, bool training,
                            Rng* rng, ForwardCache& cache,
                            FftConvWorkspace* ws) {
  if (static_cast<int>(bins.size()) != model.spec.bin_count)
    throw std::invalid_argument("bin count mismatch: model expects " +
                                std::to_string(model.spec.bin_count) +
                                ", view has " + std::to_string(bins.size()));
  cache.training = training;
  cache.input.resize(1, model.spec.bin_count);
  for (std::size_t i = 0; i < bins.size(); ++i)
    cache.input.values[i] = bins[i];

  conv1d_forward(cache.input, model.conv[0], cache.act[0], ws, 0);
  relu_inplace(cache.act[0]);
  conv1d_forward(cache.act[0], model.conv[1], cache.act[1], ws, 1);
  relu_inplace(cache.act[1]);

  maxpool_forward(cache.act[1], model.spec.pool_window, model.spec.pool_stride,
                  cache.pooled, &cache.pool_argmax);

  conv1d_forward(cache.pooled, model.conv[2], cache.act[2], ws, 2);
  relu_inplace(cache.act[2]);
  conv1d_forward(cache.act[2], model.conv[3], cache.act[3], ws, 3);
  relu_inplace(cache.act[3]);

  cache.gap = global_avg_pool(cache.act[3]);

  cache.dropped.resize(cache.gap.size());
  cache.drop_mask.resize(cache.gap.size());
  dropout_forward(cache.gap, model.spec.dropout_rate, training, rng,
                  cache.dropped, cache.drop_mask);

  cache.fc_act[0].resize(model.fc[0].out_dim);
  dense_forward(cache.dropped, model.fc[0], cache.fc_act[0]);
  relu_inplace(cache.fc_act[0]);
  cache.fc_act[1].resize(model.fc[1].out_dim);
  dense_forward(cache.fc_act[0], model.fc[1], cache.fc_act[1]);
  relu_inplace(cache.fc_act[1]);

  cache.logits.resize(model.head.out_dim);
  dense_forward(cache.fc_act[1], model.head, cache.logits);
  cache.probs = softmax(cache.logits);
  return cache.probs;
}

std::vector<double> forward_view(const GenesisModel& model, const View& view,
                                 bool training, Rng* rng, ForwardCache& cache,
                                 FftConvWorkspace* ws) {
  return forward(model, view.bins, training, rng, cache, ws);
}

double predict_planet_probability(const GenesisModel& model, const View& view,
                                  FftConvWorkspace* ws) {
  ForwardCache cache;
  const std::vector<double> probs =
      forward_view(model, view, false, nullptr, cache, ws);
  return probs[kLabelPlanet];
}

namespace {

// d(relu)/dz recovered from the stored post-activation: positive output
// means the unit was active.
void relu_mask(const FeatureMap& activated, FeatureMap& grad) {
  for (std::size_t i = 0; i < grad.values.size(); ++i)
    if (activated.values[i] <= 0.0) grad.values[i] = 0.0;
}

void relu_mask(std::span<const double> activated, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (activated[i] <= 0.0) grad[i] = 0.0;
}

}  // namespace

void backward(const GenesisModel& model, const ForwardCache& cache, int label,
              Gradients& grads, FftConvWorkspace* ws) {
  if (cache.probs.empty())
    throw std::invalid_argument("backward needs a populated forward cache");
  if (label < 0 || label >= static_cast<int>(cache.probs.size()))
    throw std::invalid_argument("label out of range");

  // softmax cross-entropy head
  std::vector<double> dlogits = cache.probs;
  dlogits[label] -= 1.0;

  std::vector<double> d_fc2(model.head.in_dim);
  dense_backward(cache.fc_act[1], model.head, dlogits, grads.head_w(),
                 grads.head_b(), d_fc2);
  relu_mask(cache.fc_act[1], d_fc2);

  std::vector<double> d_fc1(model.fc[1].in_dim);
  dense_backward(cache.fc_act[0], model.fc[1], d_fc2, grads.fc_w(1),
                 grads.fc_b(1), d_fc1);
  relu_mask(cache.fc_act[0], d_fc1);

  std::vector<double> d_dropped(model.fc[0].in_dim);
  dense_backward(cache.dropped, model.fc[0], d_fc1, grads.fc_w(0),
                 grads.fc_b(0), d_dropped);

  // dropout backward reuses the recorded multipliers
  std::vector<double> d_gap(d_dropped.size());
  for (std::size_t i = 0; i < d_gap.size(); ++i)
    d_gap[i] = d_dropped[i] * cache.drop_mask[i];

  FeatureMap d_act3;
  d_act3.resize(cache.act[3].channels, cache.act[3].length);
  global_avg_pool_backward(d_gap, d_act3);
  relu_mask(cache.act[3], d_act3);

  FeatureMap d_act2;
  conv1d_backward(cache.act[2], model.conv[3], d_act3, grads.conv_w(3),
                  grads.conv_b(3), &d_act2, ws, 3);
  relu_mask(cache.act[2], d_act2);

  FeatureMap d_pooled;
  conv1d_backward(cache.pooled, model.conv[2], d_act2, grads.conv_w(2),
                  grads.conv_b(2), &d_pooled, ws, 2);

  FeatureMap d_act1;
  d_act1.resize(cache.act[1].channels, cache.act[1].length);
  maxpool_backward(d_pooled, cache.pool_argmax, d_act1);
  relu_mask(cache.act[1], d_act1);

  FeatureMap d_act0;
  conv1d_backward(cache.act[0], model.conv[1], d_act1, grads.conv_w(1),
                  grads.conv_b(1), &d_act0, ws, 1);
  relu_mask(cache.act[0], d_act0);

  // input gradient is not needed below the first layer
  conv1d_backward(cache.input, model.conv[0], d_act0, grads.conv_w(0),
                  grads.conv_b(0), nullptr, ws, 0);
}

}  // namespace genesis
