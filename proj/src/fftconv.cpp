#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "genesis/netops.hpp"

namespace genesis {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int next_fast_size(int n) {
  for (;; ++n) {
    int m = n;
    while (m % 2 == 0) m /= 2;
    while (m % 3 == 0) m /= 3;
    while (m % 5 == 0) m /= 5;
    if (m == 1) return n;
  }
}

struct PlanSet {
  int n = 0;
  int nb = 0;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit PlanSet(int size) : n(size), nb(size / 2 + 1) {
    rbuf = fftw_alloc_real(n);
    cbuf = fftw_alloc_complex(nb);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, rbuf, cbuf, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(n, cbuf, rbuf, FFTW_ESTIMATE);
    if (fwd == nullptr || inv == nullptr)
      throw std::runtime_error("fft plan creation failed");
  }
  ~PlanSet() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(rbuf);
    fftw_free(cbuf);
  }
  PlanSet(const PlanSet&) = delete;
  PlanSet& operator=(const PlanSet&) = delete;
};

struct KernelSpectra {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_size = 0;
  int n = 0;
  std::uint64_t generation = 0;
  bool valid = false;
  // planar spectra, [o][c][bin]
  std::vector<double> re;
  std::vector<double> im;
};

}  // namespace

struct FftConvWorkspace::Impl {
  std::map<int, PlanSet> plans;
  std::map<int, KernelSpectra> slots;
  std::uint64_t generation = 1;
  // planar scratch for input/output-gradient spectra and accumulators
  std::vector<double> sig_re, sig_im, acc_re, acc_im;

  PlanSet& plan_for(int n) {
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.try_emplace(n, n).first;
    return it->second;
  }

  KernelSpectra& spectra_for(const ConvLayer& layer, int slot, int n) {
    KernelSpectra& ks = slots[slot];
    const bool stale = !ks.valid || ks.generation != generation ||
                       ks.in_channels != layer.in_channels ||
                       ks.out_channels != layer.out_channels ||
                       ks.kernel_size != layer.kernel_size || ks.n != n;
    if (!stale) return ks;

    PlanSet& ps = plan_for(n);
    const int nb = ps.nb;
    const std::size_t pairs =
        static_cast<std::size_t>(layer.out_channels) * layer.in_channels;
    ks.re.resize(pairs * nb);
    ks.im.resize(pairs * nb);
    for (int o = 0; o < layer.out_channels; ++o) {
      for (int c = 0; c < layer.in_channels; ++c) {
        std::memset(ps.rbuf, 0, sizeof(double) * n);
        std::memcpy(ps.rbuf, layer.kernel(o, c),
                    sizeof(double) * layer.kernel_size);
        fftw_execute(ps.fwd);
        double* re = ks.re.data() +
                     (static_cast<std::size_t>(o) * layer.in_channels + c) * nb;
        double* im = ks.im.data() +
                     (static_cast<std::size_t>(o) * layer.in_channels + c) * nb;
        for (int i = 0; i < nb; ++i) {
          re[i] = ps.cbuf[i][0];
          im[i] = ps.cbuf[i][1];
        }
      }
    }
    ks.in_channels = layer.in_channels;
    ks.out_channels = layer.out_channels;
    ks.kernel_size = layer.kernel_size;
    ks.n = n;
    ks.generation = generation;
    ks.valid = true;
    return ks;
  }
};

FftConvWorkspace::FftConvWorkspace() : impl_(std::make_unique<Impl>()) {}
FftConvWorkspace::~FftConvWorkspace() = default;

void FftConvWorkspace::invalidate_weights() { ++impl_->generation; }

bool FftConvWorkspace::accelerates(const ConvLayer& layer, int length) {
  return layer.in_channels >= 16 && layer.out_channels >= 16 &&
         layer.kernel_size >= 8 && length >= 768;
}

// y[o][t] = b[o] + sum_c corr(x_c, w_oc)[t]; correlation realized as
// irfft(conj(W) * X) with x embedded at offset pad so the 'same' window
// starts at index 0. n >= L + K - 1 rules out circular wrap.
void FftConvWorkspace::forward(const FeatureMap& x, const ConvLayer& layer,
                               int layer_slot, FeatureMap& y) {
  const int L = x.length;
  const int K = layer.kernel_size;
  const int pad = (K - 1) / 2;
  const int n = next_fast_size(L + K - 1);
  Impl& im = *impl_;
  PlanSet& ps = im.plan_for(n);
  const int nb = ps.nb;
  const KernelSpectra& ks = im.spectra_for(layer, layer_slot, n);

  const int C = layer.in_channels;
  const int O = layer.out_channels;
  im.sig_re.resize(static_cast<std::size_t>(C) * nb);
  im.sig_im.resize(static_cast<std::size_t>(C) * nb);
  for (int c = 0; c < C; ++c) {
    std::memset(ps.rbuf, 0, sizeof(double) * n);
    std::memcpy(ps.rbuf + pad, x.row(c), sizeof(double) * L);
    fftw_execute(ps.fwd);
    double* re = im.sig_re.data() + static_cast<std::size_t>(c) * nb;
    double* imag = im.sig_im.data() + static_cast<std::size_t>(c) * nb;
    for (int i = 0; i < nb; ++i) {
      re[i] = ps.cbuf[i][0];
      imag[i] = ps.cbuf[i][1];
    }
  }

  y.resize(O, L);
  im.acc_re.resize(nb);
  im.acc_im.resize(nb);
  const double inv_n = 1.0 / n;
  for (int o = 0; o < O; ++o) {
    double* ar = im.acc_re.data();
    double* ai = im.acc_im.data();
    std::memset(ar, 0, sizeof(double) * nb);
    std::memset(ai, 0, sizeof(double) * nb);
    for (int c = 0; c < C; ++c) {
      const double* wr =
          ks.re.data() + (static_cast<std::size_t>(o) * C + c) * nb;
      const double* wi =
          ks.im.data() + (static_cast<std::size_t>(o) * C + c) * nb;
      const double* xr = im.sig_re.data() + static_cast<std::size_t>(c) * nb;
      const double* xi = im.sig_im.data() + static_cast<std::size_t>(c) * nb;
      for (int i = 0; i < nb; ++i) {
        // conj(w) * x
        ar[i] += wr[i] * xr[i] + wi[i] * xi[i];
        ai[i] += wr[i] * xi[i] - wi[i] * xr[i];
      }
    }
    for (int i = 0; i < nb; ++i) {
      ps.cbuf[i][0] = ar[i];
      ps.cbuf[i][1] = ai[i];
    }
    fftw_execute(ps.inv);
    double* yo = y.row(o);
    const double b = layer.bias[o];
    for (int t = 0; t < L; ++t) yo[t] = ps.rbuf[t] * inv_n + b;
  }
}

// dx[c][s] = sum_{o,k} w[o][c][k] dy[o][s+pad-k] = conv(w_oc, dy_o)[s+pad],
// realized as irfft(W * DY) read at offset pad. Same kernel spectra as the
// forward pass, no conjugation.
void FftConvWorkspace::backward_data(const ConvLayer& layer, int layer_slot,
                                     const FeatureMap& dy, FeatureMap& dx) {
  const int L = dy.length;
  const int K = layer.kernel_size;
  const int pad = (K - 1) / 2;
  const int n = next_fast_size(L + K - 1);
  Impl& im = *impl_;
  PlanSet& ps = im.plan_for(n);
  const int nb = ps.nb;
  const KernelSpectra& ks = im.spectra_for(layer, layer_slot, n);

  const int C = layer.in_channels;
  const int O = layer.out_channels;
  im.sig_re.resize(static_cast<std::size_t>(O) * nb);
  im.sig_im.resize(static_cast<std::size_t>(O) * nb);
  for (int o = 0; o < O; ++o) {
    std::memset(ps.rbuf, 0, sizeof(double) * n);
    std::memcpy(ps.rbuf, dy.row(o), sizeof(double) * L);
    fftw_execute(ps.fwd);
    double* re = im.sig_re.data() + static_cast<std::size_t>(o) * nb;
    double* imag = im.sig_im.data() + static_cast<std::size_t>(o) * nb;
    for (int i = 0; i < nb; ++i) {
      re[i] = ps.cbuf[i][0];
      imag[i] = ps.cbuf[i][1];
    }
  }

  dx.resize(C, L);
  im.acc_re.resize(nb);
  im.acc_im.resize(nb);
  const double inv_n = 1.0 / n;
  for (int c = 0; c < C; ++c) {
    double* ar = im.acc_re.data();
    double* ai = im.acc_im.data();
    std::memset(ar, 0, sizeof(double) * nb);
    std::memset(ai, 0, sizeof(double) * nb);
    for (int o = 0; o < O; ++o) {
      const double* wr =
          ks.re.data() + (static_cast<std::size_t>(o) * C + c) * nb;
      const double* wi =
          ks.im.data() + (static_cast<std::size_t>(o) * C + c) * nb;
      const double* yr = im.sig_re.data() + static_cast<std::size_t>(o) * nb;
      const double* yi = im.sig_im.data() + static_cast<std::size_t>(o) * nb;
      for (int i = 0; i < nb; ++i) {
        ar[i] += wr[i] * yr[i] - wi[i] * yi[i];
        ai[i] += wr[i] * yi[i] + wi[i] * yr[i];
      }
    }
    for (int i = 0; i < nb; ++i) {
      ps.cbuf[i][0] = ar[i];
      ps.cbuf[i][1] = ai[i];
    }
    fftw_execute(ps.inv);
    double* dxc = dx.row(c);
    for (int s = 0; s < L; ++s) dxc[s] = ps.rbuf[s + pad] * inv_n;
  }
}

}  // namespace genesis
