#include "genesis/netops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace genesis {

namespace {

constexpr int kTileWidth = 32;
constexpr int kMaxStackKernel = 64;

// Input panel padded with (K-1)/2 leading and K-1-(K-1)/2 trailing zeros per
// channel, so the kernels below never branch on boundaries.
void build_padded(const FeatureMap& x, int K, std::vector<double>& panel) {
  const int pad = (K - 1) / 2;
  const int lpad = x.length + K - 1;
  panel.assign(static_cast<std::size_t>(x.channels) * lpad, 0.0);
  for (int c = 0; c < x.channels; ++c)
    std::memcpy(panel.data() + static_cast<std::size_t>(c) * lpad + pad,
                x.row(c), sizeof(double) * x.length);
}

thread_local std::vector<double> t_panel;
thread_local std::vector<double> t_dypanel;

// The correlation kernels are templated on the tap count; the layer front
// doors dispatch the stack's kernel sizes to fully unrolled instantiations
// and fall back to the runtime-KT==0 form otherwise.

template <int KT>
void conv_forward_impl(const double* panel, const ConvLayer& layer, int L,
                       int runtime_k, FeatureMap& y) {
  const int K = KT > 0 ? KT : runtime_k;
  const int C = layer.in_channels;
  const int O = layer.out_channels;
  const int lpad = L + K - 1;
  const double* w = layer.weights.data();

  int o = 0;
  for (; o + 4 <= O; o += 4) {
    double* y0 = y.row(o);
    double* y1 = y.row(o + 1);
    double* y2 = y.row(o + 2);
    double* y3 = y.row(o + 3);
    for (int t0 = 0; t0 < L; t0 += kTileWidth) {
      const int n = std::min(kTileWidth, L - t0);
      double a0[kTileWidth], a1[kTileWidth], a2[kTileWidth], a3[kTileWidth];
      for (int i = 0; i < n; ++i) a0[i] = layer.bias[o];
      for (int i = 0; i < n; ++i) a1[i] = layer.bias[o + 1];
      for (int i = 0; i < n; ++i) a2[i] = layer.bias[o + 2];
      for (int i = 0; i < n; ++i) a3[i] = layer.bias[o + 3];
      for (int c = 0; c < C; ++c) {
        const double* xc = panel + static_cast<std::size_t>(c) * lpad + t0;
        const double* w0 = w + (static_cast<std::size_t>(o) * C + c) * K;
        const double* w1 = w0 + static_cast<std::size_t>(C) * K;
        const double* w2 = w1 + static_cast<std::size_t>(C) * K;
        const double* w3 = w2 + static_cast<std::size_t>(C) * K;
        for (int k = 0; k < K; ++k) {
          const double c0 = w0[k], c1 = w1[k], c2 = w2[k], c3 = w3[k];
          const double* xs = xc + k;
          for (int i = 0; i < n; ++i) {
            const double xv = xs[i];
            a0[i] += c0 * xv;
            a1[i] += c1 * xv;
            a2[i] += c2 * xv;
            a3[i] += c3 * xv;
          }
        }
      }
      for (int i = 0; i < n; ++i) y0[t0 + i] = a0[i];
      for (int i = 0; i < n; ++i) y1[t0 + i] = a1[i];
      for (int i = 0; i < n; ++i) y2[t0 + i] = a2[i];
      for (int i = 0; i < n; ++i) y3[t0 + i] = a3[i];
    }
  }
  for (; o < O; ++o) {
    double* yo = y.row(o);
    for (int t = 0; t < L; ++t) yo[t] = layer.bias[o];
    for (int c = 0; c < C; ++c) {
      const double* xc = panel + static_cast<std::size_t>(c) * lpad;
      const double* wr = w + (static_cast<std::size_t>(o) * C + c) * K;
      for (int k = 0; k < K; ++k) {
        const double wk = wr[k];
        const double* xs = xc + k;
        for (int t = 0; t < L; ++t) yo[t] += wk * xs[t];
      }
    }
  }
}

template <int KT>
void conv_dw_impl(const double* panel, const FeatureMap& dy,
                  const ConvLayer& layer, int L, int runtime_k,
                  std::span<double> dW) {
  const int K = KT > 0 ? KT : runtime_k;
  const int C = layer.in_channels;
  const int O = layer.out_channels;
  const int lpad = L + K - 1;

  if (K <= kMaxStackKernel) {
    int o = 0;
    for (; o + 2 <= O; o += 2) {
      const double* dy0 = dy.row(o);
      const double* dy1 = dy.row(o + 1);
      for (int c = 0; c < C; ++c) {
        const double* xc = panel + static_cast<std::size_t>(c) * lpad;
        double r0[kMaxStackKernel] = {0};
        double r1[kMaxStackKernel] = {0};
        for (int t = 0; t < L; ++t) {
          const double d0 = dy0[t], d1 = dy1[t];
          const double* xs = xc + t;
          for (int k = 0; k < K; ++k) {
            const double xv = xs[k];
            r0[k] += d0 * xv;
            r1[k] += d1 * xv;
          }
        }
        double* g0 = dW.data() + (static_cast<std::size_t>(o) * C + c) * K;
        double* g1 = g0 + static_cast<std::size_t>(C) * K;
        for (int k = 0; k < K; ++k) g0[k] += r0[k];
        for (int k = 0; k < K; ++k) g1[k] += r1[k];
      }
    }
    for (; o < O; ++o) {
      const double* dyo = dy.row(o);
      for (int c = 0; c < C; ++c) {
        const double* xc = panel + static_cast<std::size_t>(c) * lpad;
        double r0[kMaxStackKernel] = {0};
        for (int t = 0; t < L; ++t) {
          const double d0 = dyo[t];
          const double* xs = xc + t;
          for (int k = 0; k < K; ++k) r0[k] += d0 * xs[k];
        }
        double* g0 = dW.data() + (static_cast<std::size_t>(o) * C + c) * K;
        for (int k = 0; k < K; ++k) g0[k] += r0[k];
      }
    }
  } else {
    for (int o = 0; o < O; ++o) {
      const double* dyo = dy.row(o);
      for (int c = 0; c < C; ++c) {
        const double* xc = panel + static_cast<std::size_t>(c) * lpad;
        double* g0 = dW.data() + (static_cast<std::size_t>(o) * C + c) * K;
        for (int t = 0; t < L; ++t) {
          const double d0 = dyo[t];
          const double* xs = xc + t;
          for (int k = 0; k < K; ++k) g0[k] += d0 * xs[k];
        }
      }
    }
  }
}

template <int KT>
void conv_dx_impl(const double* dypanel, const ConvLayer& layer, int L,
                  int runtime_k, FeatureMap& dx) {
  const int K = KT > 0 ? KT : runtime_k;
  const int C = layer.in_channels;
  const int O = layer.out_channels;
  const int lpad = L + K - 1;
  const double* w = layer.weights.data();

  int c = 0;
  for (; c + 4 <= C; c += 4) {
    double* x0 = dx.row(c);
    double* x1 = dx.row(c + 1);
    double* x2 = dx.row(c + 2);
    double* x3 = dx.row(c + 3);
    for (int s0 = 0; s0 < L; s0 += kTileWidth) {
      const int n = std::min(kTileWidth, L - s0);
      double a0[kTileWidth] = {0}, a1[kTileWidth] = {0}, a2[kTileWidth] = {0},
             a3[kTileWidth] = {0};
      for (int o = 0; o < O; ++o) {
        const double* dyo =
            dypanel + static_cast<std::size_t>(o) * lpad + s0;
        const double* w0 = w + (static_cast<std::size_t>(o) * C + c) * K;
        const double* w1 = w0 + K;
        const double* w2 = w1 + K;
        const double* w3 = w2 + K;
        for (int k = 0; k < K; ++k) {
          const double* ds = dyo + (K - 1 - k);
          const double c0 = w0[k], c1 = w1[k], c2 = w2[k], c3 = w3[k];
          for (int i = 0; i < n; ++i) {
            const double dv = ds[i];
            a0[i] += c0 * dv;
            a1[i] += c1 * dv;
            a2[i] += c2 * dv;
            a3[i] += c3 * dv;
          }
        }
      }
      for (int i = 0; i < n; ++i) x0[s0 + i] = a0[i];
      for (int i = 0; i < n; ++i) x1[s0 + i] = a1[i];
      for (int i = 0; i < n; ++i) x2[s0 + i] = a2[i];
      for (int i = 0; i < n; ++i) x3[s0 + i] = a3[i];
    }
  }
  for (; c < C; ++c) {
    double* xc = dx.row(c);
    for (int s = 0; s < L; ++s) xc[s] = 0.0;
    for (int o = 0; o < O; ++o) {
      const double* dyo = dypanel + static_cast<std::size_t>(o) * lpad;
      const double* wr = w + (static_cast<std::size_t>(o) * C + c) * K;
      for (int k = 0; k < K; ++k) {
        const double wk = wr[k];
        const double* ds = dyo + (K - 1 - k);
        for (int s = 0; s < L; ++s) xc[s] += wk * ds[s];
      }
    }
  }
}

}  // namespace

void conv1d_forward(const FeatureMap& x, const ConvLayer& layer, FeatureMap& y,
                    FftConvWorkspace* ws, int layer_slot) {
  if (x.channels != layer.in_channels)
    throw std::invalid_argument("conv input channel mismatch");
  if (ws != nullptr && layer_slot >= 0 &&
      FftConvWorkspace::accelerates(layer, x.length)) {
    ws->forward(x, layer, layer_slot, y);
    return;
  }

  const int L = x.length;
  const int K = layer.kernel_size;
  y.resize(layer.out_channels, L);
  build_padded(x, K, t_panel);
  const double* panel = t_panel.data();
  switch (K) {
    case 50:
      conv_forward_impl<50>(panel, layer, L, K, y);
      break;
    case 12:
      conv_forward_impl<12>(panel, layer, L, K, y);
      break;
    default:
      conv_forward_impl<0>(panel, layer, L, K, y);
  }
}

void conv1d_backward(const FeatureMap& x, const ConvLayer& layer,
                     const FeatureMap& dy, std::span<double> dW,
                     std::span<double> db, FeatureMap* dx,
                     FftConvWorkspace* ws, int layer_slot) {
  if (x.channels != layer.in_channels)
    throw std::invalid_argument("conv input channel mismatch");
  if (dy.channels != layer.out_channels || dy.length != x.length)
    throw std::invalid_argument("conv output gradient shape mismatch");
  if (dW.size() != layer.weights.size() || db.size() != layer.bias.size())
    throw std::invalid_argument("conv gradient buffer shape mismatch");

  const int L = x.length;
  const int K = layer.kernel_size;
  const int C = layer.in_channels;
  const int O = layer.out_channels;
  const int lpad = L + K - 1;

  for (int o = 0; o < O; ++o) {
    const double* dyo = dy.row(o);
    double acc = 0.0;
    for (int t = 0; t < L; ++t) acc += dyo[t];
    db[o] += acc;
  }

  build_padded(x, K, t_panel);
  switch (K) {
    case 50:
      conv_dw_impl<50>(t_panel.data(), dy, layer, L, K, dW);
      break;
    case 12:
      conv_dw_impl<12>(t_panel.data(), dy, layer, L, K, dW);
      break;
    default:
      conv_dw_impl<0>(t_panel.data(), dy, layer, L, K, dW);
  }

  if (dx == nullptr) return;
  if (ws != nullptr && layer_slot >= 0 &&
      FftConvWorkspace::accelerates(layer, L)) {
    ws->backward_data(layer, layer_slot, dy, *dx);
    return;
  }

  // input gradient: dx[c][s] = sum_{o,k} w[o][c][k] dy[o][s+pad-k];
  // with dy padded by K-1-pad leading zeros it becomes a correlation
  // against the reversed kernel.
  const int rpad = K - 1 - (K - 1) / 2;
  t_dypanel.assign(static_cast<std::size_t>(O) * lpad, 0.0);
  for (int o = 0; o < O; ++o)
    std::memcpy(t_dypanel.data() + static_cast<std::size_t>(o) * lpad + rpad,
                dy.row(o), sizeof(double) * L);
  dx->resize(C, L);
  switch (K) {
    case 50:
      conv_dx_impl<50>(t_dypanel.data(), layer, L, K, *dx);
      break;
    case 12:
      conv_dx_impl<12>(t_dypanel.data(), layer, L, K, *dx);
      break;
    default:
      conv_dx_impl<0>(t_dypanel.data(), layer, L, K, *dx);
  }
}

void maxpool_forward(const FeatureMap& x, int window, int stride,
                     FeatureMap& y, std::vector<int>* argmax) {
  if (window < 1 || stride < 1)
    throw std::invalid_argument("bad pool window/stride");
  if (x.length < window)
    throw std::invalid_argument("input shorter than the pool window");
  const int out_len = (x.length - window) / stride + 1;
  y.resize(x.channels, out_len);
  if (argmax) argmax->assign(static_cast<std::size_t>(x.channels) * out_len, 0);
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.row(c);
    double* yc = y.row(c);
    for (int t = 0; t < out_len; ++t) {
      const int base = t * stride;
      int best = base;
      double bv = xc[base];
      for (int j = 1; j < window; ++j) {
        if (xc[base + j] > bv) {
          bv = xc[base + j];
          best = base + j;
        }
      }
      yc[t] = bv;
      if (argmax)
        (*argmax)[static_cast<std::size_t>(c) * out_len + t] = best;
    }
  }
}

void maxpool_backward(const FeatureMap& dy, const std::vector<int>& argmax,
                      FeatureMap& dx_shape) {
  std::fill(dx_shape.values.begin(), dx_shape.values.end(), 0.0);
  for (int c = 0; c < dy.channels; ++c) {
    const double* dyc = dy.row(c);
    double* dxc = dx_shape.row(c);
    for (int t = 0; t < dy.length; ++t)
      dxc[argmax[static_cast<std::size_t>(c) * dy.length + t]] += dyc[t];
  }
}

std::vector<double> global_avg_pool(const FeatureMap& x) {
  if (x.length < 1) throw std::invalid_argument("empty feature map");
  std::vector<double> out(x.channels);
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.row(c);
    double acc = 0.0;
    for (int t = 0; t < x.length; ++t) acc += xc[t];
    out[c] = acc / x.length;
  }
  return out;
}

void global_avg_pool_backward(std::span<const double> dpooled,
                              FeatureMap& dx) {
  if (static_cast<int>(dpooled.size()) != dx.channels)
    throw std::invalid_argument("pooled gradient channel mismatch");
  for (int c = 0; c < dx.channels; ++c) {
    const double g = dpooled[c] / dx.length;
    double* dxc = dx.row(c);
    for (int t = 0; t < dx.length; ++t) dxc[t] = g;
  }
}

void relu_inplace(FeatureMap& x) { relu_inplace(std::span<double>(x.values)); }

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void dropout_forward(std::span<const double> x, double rate, bool training,
                     Rng* rng, std::span<double> out, std::span<double> mask) {
  if (out.size() != x.size() || mask.size() != x.size())
    throw std::invalid_argument("dropout buffer size mismatch");
  if (!training || rate == 0.0) {
    std::copy(x.begin(), x.end(), out.begin());
    std::fill(mask.begin(), mask.end(), 1.0);
    return;
  }
  if (rng == nullptr)
    throw std::invalid_argument("training-mode dropout needs a generator");
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool keep = rng->uniform01() >= rate;
    mask[i] = keep ? keep_scale : 0.0;
    out[i] = x[i] * mask[i];
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

SoftmaxLoss softmax_cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || label >= static_cast<int>(logits.size()))
    throw std::invalid_argument("label out of range");
  SoftmaxLoss out;
  out.probs = softmax(logits);
  out.loss = -std::log(std::max(out.probs[label], 1e-300));
  out.dlogits = out.probs;
  out.dlogits[label] -= 1.0;
  return out;
}

void dense_forward(std::span<const double> x, const DenseLayer& layer,
                   std::span<double> y) {
  if (static_cast<int>(x.size()) != layer.in_dim ||
      static_cast<int>(y.size()) != layer.out_dim)
    throw std::invalid_argument("dense shape mismatch");
  for (int o = 0; o < layer.out_dim; ++o) {
    const double* w = layer.weights.data() +
                      static_cast<std::size_t>(o) * layer.in_dim;
    double acc = layer.bias[o];
    for (int i = 0; i < layer.in_dim; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

void dense_backward(std::span<const double> x, const DenseLayer& layer,
                    std::span<const double> dy, std::span<double> dW,
                    std::span<double> db, std::span<double> dx) {
  if (dW.size() != layer.weights.size() || db.size() != layer.bias.size())
    throw std::invalid_argument("dense gradient buffer mismatch");
  for (int o = 0; o < layer.out_dim; ++o) {
    const double g = dy[o];
    db[o] += g;
    double* gw = dW.data() + static_cast<std::size_t>(o) * layer.in_dim;
    for (int i = 0; i < layer.in_dim; ++i) gw[i] += g * x[i];
  }
  if (!dx.empty()) {
    std::fill(dx.begin(), dx.end(), 0.0);
    for (int o = 0; o < layer.out_dim; ++o) {
      const double g = dy[o];
      const double* w = layer.weights.data() +
                        static_cast<std::size_t>(o) * layer.in_dim;
      for (int i = 0; i < layer.in_dim; ++i) dx[i] += g * w[i];
    }
  }
}

}  // namespace genesis
