#include "genesis/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace genesis {

void ConvLayer::resize(int in, int out, int k) {
  if (in < 1 || out < 1 || k < 1)
    throw std::invalid_argument("bad conv layer dimensions");
  in_channels = in;
  out_channels = out;
  kernel_size = k;
  weights.assign(static_cast<std::size_t>(out) * in * k, 0.0);
  bias.assign(out, 0.0);
}

void DenseLayer::resize(int in, int out) {
  if (in < 1 || out < 1)
    throw std::invalid_argument("bad dense layer dimensions");
  in_dim = in;
  out_dim = out;
  weights.assign(static_cast<std::size_t>(out) * in, 0.0);
  bias.assign(out, 0.0);
}

GenesisModel GenesisModel::make(const ModelSpec& spec) {
  if (spec.bin_count < spec.pool_window)
    throw std::invalid_argument("bin_count shorter than the pool window");
  if (spec.pool_window < 1 || spec.pool_stride < 1)
    throw std::invalid_argument("bad pool configuration");
  if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  GenesisModel m;
  m.spec = spec;
  m.conv[0].resize(1, spec.conv_channels[0], spec.conv_kernels[0]);
  m.conv[1].resize(spec.conv_channels[0], spec.conv_channels[1],
                   spec.conv_kernels[1]);
  m.conv[2].resize(spec.conv_channels[1], spec.conv_channels[2],
                   spec.conv_kernels[2]);
  m.conv[3].resize(spec.conv_channels[2], spec.conv_channels[3],
                   spec.conv_kernels[3]);
  m.fc[0].resize(spec.conv_channels[3], spec.fc_widths[0]);
  m.fc[1].resize(spec.fc_widths[0], spec.fc_widths[1]);
  m.head.resize(spec.fc_widths[1], spec.n_classes);
  return m;
}

GenesisModel GenesisModel::genesis(int bin_count) {
  ModelSpec spec;
  spec.bin_count = bin_count;
  return make(spec);
}

std::size_t GenesisModel::param_count() const {
  std::size_t total = 0;
  for (const ConvLayer& l : conv) total += l.param_count();
  for (const DenseLayer& l : fc) total += l.param_count();
  total += head.param_count();
  return total;
}

std::vector<std::span<double>> GenesisModel::params() {
  std::vector<std::span<double>> out;
  out.reserve(14);
  for (ConvLayer& l : conv) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  for (DenseLayer& l : fc) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  out.emplace_back(head.weights);
  out.emplace_back(head.bias);
  return out;
}

std::vector<std::span<const double>> GenesisModel::params() const {
  std::vector<std::span<const double>> out;
  out.reserve(14);
  for (const ConvLayer& l : conv) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  for (const DenseLayer& l : fc) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  out.emplace_back(head.weights);
  out.emplace_back(head.bias);
  return out;
}

int GenesisModel::pooled_length() const {
  return (spec.bin_count - spec.pool_window) / spec.pool_stride + 1;
}

void xavier_uniform_fill(std::span<double> values, int fan_in, int fan_out,
                         Rng& rng) {
  if (fan_in < 1 || fan_out < 1)
    throw std::invalid_argument("fan counts must be >= 1");
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : values) v = rng.uniform(-a, a);
}

void init_parameters(GenesisModel& model, Rng& rng) {
  for (ConvLayer& l : model.conv) {
    xavier_uniform_fill(l.weights, l.in_channels * l.kernel_size,
                        l.out_channels * l.kernel_size, rng);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  for (DenseLayer& l : model.fc) {
    xavier_uniform_fill(l.weights, l.in_dim, l.out_dim, rng);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  xavier_uniform_fill(model.head.weights, model.head.in_dim,
                      model.head.out_dim, rng);
  std::fill(model.head.bias.begin(), model.head.bias.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr char kModelMagic[4] = {'G', 'E', 'N', 'M'};
constexpr std::uint16_t kModelVersion = 1;
constexpr std::uint8_t kLayerConv = 0;
constexpr std::uint8_t kLayerDense = 1;

template <typename T>
void write_le(std::ofstream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in)
    throw std::runtime_error(std::string("truncated model file at ") + what);
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void write_params(std::ofstream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_params(std::ifstream& in, std::vector<double>& values) {
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated model file in parameters");
}

}  // namespace

void save_model(const std::string& path, const GenesisModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.write(kModelMagic, 4);
  write_le<std::uint16_t>(out, kModelVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.bin_count));
  write_le<std::uint8_t>(out, static_cast<std::uint8_t>(model.spec.padding));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.pool_window));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.pool_stride));
  write_le<double>(out, model.spec.dropout_rate);
  write_le<std::uint32_t>(out, 7);  // layer count
  for (const ConvLayer& l : model.conv) {
    write_le<std::uint8_t>(out, kLayerConv);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_channels));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_channels));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.kernel_size));
    write_params(out, l.weights);
    write_params(out, l.bias);
  }
  auto write_dense = [&](const DenseLayer& l) {
    write_le<std::uint8_t>(out, kLayerDense);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_dim));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_dim));
    write_params(out, l.weights);
    write_params(out, l.bias);
  };
  for (const DenseLayer& l : model.fc) write_dense(l);
  write_dense(model.head);
  if (!out) throw std::runtime_error("write failed: " + path);
}

GenesisModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw std::runtime_error("not a model file: " + path);
  const auto version = read_le<std::uint16_t>(in, "version");
  if (version != kModelVersion)
    throw std::runtime_error("unsupported model file version " +
                             std::to_string(version));

  ModelSpec spec;
  spec.bin_count = static_cast<int>(read_le<std::uint32_t>(in, "bin_count"));
  const auto padding = read_le<std::uint8_t>(in, "padding mode");
  if (padding != static_cast<std::uint8_t>(PaddingMode::kSameZero))
    throw std::runtime_error("unsupported padding mode");
  spec.padding = PaddingMode::kSameZero;
  spec.pool_window = static_cast<int>(read_le<std::uint32_t>(in, "pool window"));
  spec.pool_stride = static_cast<int>(read_le<std::uint32_t>(in, "pool stride"));
  spec.dropout_rate = read_le<double>(in, "dropout rate");
  const auto n_layers = read_le<std::uint32_t>(in, "layer count");
  if (n_layers != 7)
    throw std::runtime_error("architecture mismatch: expected 7 layers, got " +
                             std::to_string(n_layers));

  struct Header {
    std::uint8_t kind;
    std::uint32_t a, b, c;
  };
  std::array<ConvLayer, 4> conv;
  std::array<DenseLayer, 2> fc;
  DenseLayer head;
  for (int i = 0; i < 7; ++i) {
    Header h{};
    h.kind = read_le<std::uint8_t>(in, "layer kind");
    const bool expect_conv = i < 4;
    if (h.kind != (expect_conv ? kLayerConv : kLayerDense))
      throw std::runtime_error("architecture mismatch in layer order");
    if (expect_conv) {
      h.a = read_le<std::uint32_t>(in, "conv in");
      h.b = read_le<std::uint32_t>(in, "conv out");
      h.c = read_le<std::uint32_t>(in, "conv kernel");
      conv[i].resize(static_cast<int>(h.a), static_cast<int>(h.b),
                     static_cast<int>(h.c));
      read_params(in, conv[i].weights);
      read_params(in, conv[i].bias);
    } else {
      h.a = read_le<std::uint32_t>(in, "dense in");
      h.b = read_le<std::uint32_t>(in, "dense out");
      DenseLayer& l = i < 6 ? fc[i - 4] : head;
      l.resize(static_cast<int>(h.a), static_cast<int>(h.b));
      read_params(in, l.weights);
      read_params(in, l.bias);
    }
  }

  spec.conv_channels = {conv[0].out_channels, conv[1].out_channels,
                        conv[2].out_channels, conv[3].out_channels};
  spec.conv_kernels = {conv[0].kernel_size, conv[1].kernel_size,
                       conv[2].kernel_size, conv[3].kernel_size};
  spec.fc_widths = {fc[0].out_dim, fc[1].out_dim};
  spec.n_classes = head.out_dim;

  GenesisModel model = GenesisModel::make(spec);
  model.conv = std::move(conv);
  model.fc = std::move(fc);
  model.head = std::move(head);
  return model;
}

}  // namespace genesis
