#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genesis/rng.hpp"

namespace genesis {

// channels x length activation matrix, row-major per channel.
struct FeatureMap {
  int channels = 0;
  int length = 0;
  std::vector<double> values;

  void resize(int c, int l) {
    channels = c;
    length = l;
    values.assign(static_cast<std::size_t>(c) * l, 0.0);
  }
  double* row(int c) { return values.data() + static_cast<std::size_t>(c) * length; }
  const double* row(int c) const {
    return values.data() + static_cast<std::size_t>(c) * length;
  }
  double& at(int c, int t) { return values[static_cast<std::size_t>(c) * length + t]; }
  double at(int c, int t) const {
    return values[static_cast<std::size_t>(c) * length + t];
  }
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_size = 0;
  std::vector<double> weights;  // [out][in][kernel]
  std::vector<double> bias;     // [out]

  void resize(int in, int out, int k);
  std::size_t param_count() const { return weights.size() + bias.size(); }
  double* kernel(int o, int c) {
    return weights.data() +
           (static_cast<std::size_t>(o) * in_channels + c) * kernel_size;
  }
  const double* kernel(int o, int c) const {
    return weights.data() +
           (static_cast<std::size_t>(o) * in_channels + c) * kernel_size;
  }
};

struct DenseLayer {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> weights;  // [out][in]
  std::vector<double> bias;     // [out]

  void resize(int in, int out);
  std::size_t param_count() const { return weights.size() + bias.size(); }
};

enum class PaddingMode : std::uint8_t { kSameZero = 0 };

// Stack shape: conv1 -> conv2 -> maxpool -> conv3 -> conv4 -> global average
// pool -> dropout -> fc1 -> fc2 -> head -> softmax, ReLU after every conv
// and fc layer. The standard configuration is genesis(); smaller variants
// with the same stack are available for tests through make().
struct ModelSpec {
  int bin_count = 2001;
  std::array<int, 4> conv_channels = {64, 64, 64, 64};
  std::array<int, 4> conv_kernels = {50, 50, 12, 12};
  int pool_window = 32;
  int pool_stride = 32;
  std::array<int, 2> fc_widths = {256, 256};
  int n_classes = 2;
  double dropout_rate = 0.25;
  PaddingMode padding = PaddingMode::kSameZero;
};

struct GenesisModel {
  ModelSpec spec;
  std::array<ConvLayer, 4> conv;
  std::array<DenseLayer, 2> fc;
  DenseLayer head;

  static GenesisModel make(const ModelSpec& spec);
  // The standard architecture at the given input resolution.
  static GenesisModel genesis(int bin_count);

  int bin_count() const { return spec.bin_count; }
  std::size_t param_count() const;
  // Parameter tensors in declaration order: conv1.w, conv1.b, ..., head.b.
  std::vector<std::span<double>> params();
  std::vector<std::span<const double>> params() const;
  // Length of the feature maps after the max pool stage.
  int pooled_length() const;
};

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void xavier_uniform_fill(std::span<double> values, int fan_in, int fan_out,
                         Rng& rng);

// Xavier-uniform weights, zero biases; conv fans include the kernel size.
void init_parameters(GenesisModel& model, Rng& rng);

// Model file: magic "GENM", u16 version, u32 bin_count, u8 padding mode,
// pool/dropout/class header, then per-layer dimension headers each followed
// by its f64 parameters, little-endian, declaration order.
void save_model(const std::string& path, const GenesisModel& model);
GenesisModel load_model(const std::string& path);

}  // namespace genesis
