#pragma once

#include <array>
#include <span>
#include <vector>

#include "genesis/lightcurve.hpp"
#include "genesis/model.hpp"
#include "genesis/netops.hpp"
#include "genesis/rng.hpp"

namespace genesis {

// Activations recorded by forward() for the exact backward pass. ReLU
// derivative masks are recovered from the stored post-activation values.
struct ForwardCache {
  bool training = false;
  FeatureMap input;               // 1 x bin_count
  std::array<FeatureMap, 4> act;  // post-ReLU conv outputs
  FeatureMap pooled;              // after the max pool
  std::vector<int> pool_argmax;
  std::vector<double> gap;         // after the global average pool
  std::vector<double> drop_mask;   // inverted-dropout multipliers
  std::vector<double> dropped;     // gap after dropout
  std::array<std::vector<double>, 2> fc_act;  // post-ReLU fc outputs
  std::vector<double> logits;
  std::vector<double> probs;
};

// Parameter-shaped gradient accumulators, ordered like
// GenesisModel::params().
struct Gradients {
  std::vector<std::vector<double>> tensors;

  static Gradients zeros_like(const GenesisModel& model);
  void zero();
  void scale(double factor);
  std::span<double> conv_w(int i) { return tensors[2 * i]; }
  std::span<double> conv_b(int i) { return tensors[2 * i + 1]; }
  std::span<double> fc_w(int i) { return tensors[8 + 2 * i]; }
  std::span<double> fc_b(int i) { return tensors[8 + 2 * i + 1]; }
  std::span<double> head_w() { return tensors[12]; }
  std::span<double> head_b() { return tensors[13]; }
};

// Full stack in the fixed order conv1..conv4 / maxpool / global average
// pool / dropout / fc1 / fc2 / head / softmax, ReLU after every conv and fc
// layer. Training mode draws the dropout mask from rng. Returns the class
// probabilities.
std::vector<double> forward(const GenesisModel& model,
                            std::span<const float> bins, bool training,
                            Rng* rng, ForwardCache& cache,
                            FftConvWorkspace* ws = nullptr);

// Bin-count-checked front door.
std::vector<double> forward_view(const GenesisModel& model, const View& view,
                                 bool training, Rng* rng, ForwardCache& cache,
                                 FftConvWorkspace* ws = nullptr);

// Inference-mode planet-class probability.
double predict_planet_probability(const GenesisModel& model, const View& view,
                                  FftConvWorkspace* ws = nullptr);

// Exact gradients of softmax cross-entropy composed with forward(), added
// into grads. The cache must come from a forward() call on the same model
// and parameters; its dropout mask is reused.
void backward(const GenesisModel& model, const ForwardCache& cache, int label,
              Gradients& grads, FftConvWorkspace* ws = nullptr);

}  // namespace genesis
