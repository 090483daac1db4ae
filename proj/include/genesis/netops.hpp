#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "genesis/model.hpp"
#include "genesis/rng.hpp"

namespace genesis {

class FftConvWorkspace;

// Cross-correlation, stride 1, 'same' zero padding (output length equals
// input length). An optional workspace routes large layers through a cached
// FFT evaluation; results agree with the direct path to ~1e-13 and the
// direct path stays the reference. layer_slot identifies the layer inside
// the workspace cache.
void conv1d_forward(const FeatureMap& x, const ConvLayer& layer, FeatureMap& y,
                    FftConvWorkspace* ws = nullptr, int layer_slot = -1);

// Accumulates dW/db and, when dx is non-null, writes the input gradient.
void conv1d_backward(const FeatureMap& x, const ConvLayer& layer,
                     const FeatureMap& dy, std::span<double> dW,
                     std::span<double> db, FeatureMap* dx,
                     FftConvWorkspace* ws = nullptr, int layer_slot = -1);

// Per-channel max over non-overlapping windows; the trailing remainder
// shorter than the window is dropped. argmax records the first maximal
// input index per output element for the backward pass.
void maxpool_forward(const FeatureMap& x, int window, int stride,
                     FeatureMap& y, std::vector<int>* argmax = nullptr);
void maxpool_backward(const FeatureMap& dy, const std::vector<int>& argmax,
                      FeatureMap& dx_shape);

// Per-channel mean over the full length.
std::vector<double> global_avg_pool(const FeatureMap& x);
void global_avg_pool_backward(std::span<const double> dpooled, FeatureMap& dx);

void relu_inplace(FeatureMap& x);
void relu_inplace(std::span<double> x);

// Inverted dropout: each element zeroed with probability rate, survivors
// scaled by 1/(1-rate); at inference the mask is all ones.
void dropout_forward(std::span<const double> x, double rate, bool training,
                     Rng* rng, std::span<double> out, std::span<double> mask);

struct SoftmaxLoss {
  double loss = 0.0;
  std::vector<double> probs;
  std::vector<double> dlogits;  // probs - onehot(label)
};

// Numerically stable softmax + categorical cross-entropy against a class
// index, with its exact logits gradient.
SoftmaxLoss softmax_cross_entropy(std::span<const double> logits, int label);
std::vector<double> softmax(std::span<const double> logits);

void dense_forward(std::span<const double> x, const DenseLayer& layer,
                   std::span<double> y);
void dense_backward(std::span<const double> x, const DenseLayer& layer,
                    std::span<const double> dy, std::span<double> dW,
                    std::span<double> db, std::span<double> dx);

// Caches FFT plans and kernel spectra for the convolution layers of one
// model instance. Owned by whoever mutates the weights (a trainer, or an
// inference pass over a frozen model); call invalidate_weights() after any
// parameter update. Not thread-safe across callers; use one per worker.
class FftConvWorkspace {
 public:
  FftConvWorkspace();
  ~FftConvWorkspace();
  FftConvWorkspace(const FftConvWorkspace&) = delete;
  FftConvWorkspace& operator=(const FftConvWorkspace&) = delete;

  void invalidate_weights();

  // FFT evaluation pays off only for wide many-channel layers.
  static bool accelerates(const ConvLayer& layer, int length);

  void forward(const FeatureMap& x, const ConvLayer& layer, int layer_slot,
               FeatureMap& y);
  void backward_data(const ConvLayer& layer, int layer_slot,
                     const FeatureMap& dy, FeatureMap& dx);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace genesis
