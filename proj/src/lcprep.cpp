#include "genesis/lightcurve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace genesis {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty range");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lo = *std::max_element(values.begin(), values.begin() + mid);
    m = 0.5 * (lo + m);
  }
  return m;
}

double stddev_of(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

// Least-squares polynomial fit over offsets u in [-h, h]; returns the row of
// weights that evaluates the fitted polynomial at offset d, i.e.
// trend = sum_j row[j] * flux[window_start + j].
std::vector<double> sg_weight_row(int window, int polyorder, int d) {
  const int h = (window - 1) / 2;
  const int m = polyorder + 1;
  // normal matrix N = A^T A with A[j][p] = u_j^p
  std::vector<double> N(static_cast<std::size_t>(m) * m, 0.0);
  for (int j = 0; j < window; ++j) {
    const double u = j - h;
    double up[32];
    up[0] = 1.0;
    for (int p = 1; p < m; ++p) up[p] = up[p - 1] * u;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) N[r * m + c] += up[r] * up[c];
  }
  // solve N v = t(d) with t(d)[p] = d^p, Gaussian elimination with pivoting
  std::vector<double> v(m);
  {
    std::vector<double> M(N);
    std::vector<double> rhs(m);
    double dp = 1.0;
    for (int p = 0; p < m; ++p, dp *= d) rhs[p] = dp;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      for (int r = col + 1; r < m; ++r)
        if (std::fabs(M[r * m + col]) > std::fabs(M[piv * m + col])) piv = r;
      if (piv != col) {
        for (int c = 0; c < m; ++c) std::swap(M[col * m + c], M[piv * m + c]);
        std::swap(rhs[col], rhs[piv]);
      }
      const double diag = M[col * m + col];
      if (diag == 0.0)
        throw std::runtime_error("singular normal matrix in trend fit");
      for (int r = col + 1; r < m; ++r) {
        const double f = M[r * m + col] / diag;
        for (int c = col; c < m; ++c) M[r * m + c] -= f * M[col * m + c];
        rhs[r] -= f * rhs[col];
      }
    }
    for (int r = m - 1; r >= 0; --r) {
      double s = rhs[r];
      for (int c = r + 1; c < m; ++c) s -= M[r * m + c] * v[c];
      v[r] = s / M[r * m + r];
    }
  }
  // row[j] = sum_p v[p] * u_j^p
  std::vector<double> row(window);
  for (int j = 0; j < window; ++j) {
    const double u = j - h;
    double acc = 0.0, up = 1.0;
    for (int p = 0; p < m; ++p, up *= u) acc += v[p] * up;
    row[j] = acc;
  }
  return row;
}

}  // namespace

void RawLightCurve::validate() const {
  if (time.size() != flux.size())
    throw std::invalid_argument("time and flux lengths differ");
  if (time.size() < 2)
    throw std::invalid_argument("lightcurve needs at least 2 samples");
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (!std::isfinite(time[i]) || !std::isfinite(flux[i]))
      throw std::invalid_argument("non-finite sample in lightcurve");
    if (i > 0 && time[i] <= time[i - 1])
      throw std::invalid_argument("time not strictly increasing");
  }
}

void Ephemeris::validate() const {
  if (!(period_days > 0.0)) throw std::invalid_argument("period must be > 0");
  if (!(duration_hours > 0.0))
    throw std::invalid_argument("duration must be > 0");
  if (!std::isfinite(epoch_days))
    throw std::invalid_argument("epoch must be finite");
  if (duration_hours / 24.0 >= period_days)
    throw std::invalid_argument("duration must be shorter than the period");
}

RawLightCurve sigma_clip(const RawLightCurve& lc, double sigma_upper,
                         double sigma_lower, int max_iters) {
  lc.validate();
  if (!(sigma_upper > 0.0) || !(sigma_lower > 0.0))
    throw std::invalid_argument("sigma bounds must be positive");

  RawLightCurve cur = lc;
  for (int iter = 0; iter < max_iters; ++iter) {
    if (cur.flux.empty())
      throw std::runtime_error("empty lightcurve after clipping");
    const double center = median_of(cur.flux);
    const double scale = stddev_of(cur.flux);
    const double hi = center + sigma_upper * scale;
    const double lo = center - sigma_lower * scale;

    RawLightCurve next;
    next.time.reserve(cur.size());
    next.flux.reserve(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur.flux[i] > hi || cur.flux[i] < lo) continue;
      next.time.push_back(cur.time[i]);
      next.flux.push_back(cur.flux[i]);
    }
    if (next.size() == cur.size()) break;
    cur = std::move(next);
  }
  if (cur.flux.empty())
    throw std::runtime_error("empty lightcurve after clipping");
  return cur;
}

std::vector<double> savitzky_golay_trend(const std::vector<double>& flux,
                                         int window_length, int polyorder) {
  if (window_length % 2 == 0 || window_length < polyorder + 2)
    throw std::invalid_argument(
        "window must be odd and at least polyorder + 2");
  if (polyorder < 0 || polyorder > 30)
    throw std::invalid_argument("unsupported polyorder");
  const int n = static_cast<int>(flux.size());
  if (n < window_length)
    throw std::runtime_error("series too short to flatten");

  const int h = (window_length - 1) / 2;
  const std::vector<double> center_row = sg_weight_row(window_length, polyorder, 0);

  std::vector<double> trend(n);
  for (int i = h; i < n - h; ++i) {
    double acc = 0.0;
    const double* f = flux.data() + (i - h);
    for (int j = 0; j < window_length; ++j) acc += center_row[j] * f[j];
    trend[i] = acc;
  }
  // off-center evaluation against the first and last full windows
  for (int i = 0; i < h; ++i) {
    const std::vector<double> row = sg_weight_row(window_length, polyorder, i - h);
    double acc = 0.0;
    for (int j = 0; j < window_length; ++j) acc += row[j] * flux[j];
    trend[i] = acc;
  }
  for (int i = n - h; i < n; ++i) {
    const int d = i - (n - 1 - h);
    const std::vector<double> row = sg_weight_row(window_length, polyorder, d);
    double acc = 0.0;
    const double* f = flux.data() + (n - window_length);
    for (int j = 0; j < window_length; ++j) acc += row[j] * f[j];
    trend[i] = acc;
  }
  return trend;
}

RawLightCurve savitzky_golay_flatten(const RawLightCurve& lc,
                                     int window_length, int polyorder) {
  lc.validate();
  const std::vector<double> trend =
      savitzky_golay_trend(lc.flux, window_length, polyorder);
  RawLightCurve out;
  out.time = lc.time;
  out.flux.resize(lc.flux.size());
  for (std::size_t i = 0; i < lc.flux.size(); ++i) {
    if (trend[i] == 0.0 || !std::isfinite(trend[i]))
      throw std::runtime_error("trend vanished while flattening");
    out.flux[i] = lc.flux[i] / trend[i];
  }
  return out;
}

FoldedSeries phase_fold(const RawLightCurve& lc, const Ephemeris& eph) {
  lc.validate();
  eph.validate();
  const std::size_t n = lc.size();

  std::vector<double> phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = std::fmod((lc.time[i] - eph.epoch_days) / eph.period_days + 0.5, 1.0);
    if (m < 0.0) m += 1.0;
    if (m >= 1.0) m = 0.0;  // fmod rounding can land exactly on 1
    phase[i] = m - 0.5;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return phase[a] < phase[b]; });

  FoldedSeries out;
  out.phase.resize(n);
  out.flux.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.phase[i] = phase[order[i]];
    out.flux[i] = lc.flux[order[i]];
  }
  return out;
}

View bin_median(const FoldedSeries& fs, int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("bin_count must be >= 2");
  if (fs.phase.size() != fs.flux.size())
    throw std::invalid_argument("folded series lengths differ");
  if (fs.phase.empty()) throw std::runtime_error("no data to bin");

  std::vector<std::vector<double>> buckets(bin_count);
  for (std::size_t i = 0; i < fs.phase.size(); ++i) {
    int b = static_cast<int>((fs.phase[i] + 0.5) * bin_count);
    if (b < 0) b = 0;
    if (b >= bin_count) b = bin_count - 1;
    buckets[b].push_back(fs.flux[i]);
  }

  std::vector<double> binned(bin_count, 0.0);
  std::vector<bool> filled(bin_count, false);
  for (int b = 0; b < bin_count; ++b) {
    if (buckets[b].empty()) continue;
    binned[b] = median_of(buckets[b]);
    filled[b] = true;
  }

  int first = -1, last = -1;
  for (int b = 0; b < bin_count; ++b)
    if (filled[b]) {
      if (first < 0) first = b;
      last = b;
    }
  if (first < 0) throw std::runtime_error("no data to bin");

  for (int b = 0; b < first; ++b) binned[b] = binned[first];
  for (int b = last + 1; b < bin_count; ++b) binned[b] = binned[last];
  int prev = first;
  for (int b = first + 1; b <= last; ++b) {
    if (!filled[b]) continue;
    for (int e = prev + 1; e < b; ++e) {
      const double w = static_cast<double>(e - prev) / (b - prev);
      binned[e] = binned[prev] * (1.0 - w) + binned[b] * w;
    }
    prev = b;
  }

  View v;
  v.bins.resize(bin_count);
  for (int b = 0; b < bin_count; ++b) v.bins[b] = static_cast<float>(binned[b]);
  return v;
}

View normalize_view(const View& v) {
  if (v.bins.empty()) throw std::invalid_argument("empty view");
  std::vector<double> work(v.bins.begin(), v.bins.end());
  const double med = median_of(work);
  double lo = 0.0;
  for (double& x : work) {
    x -= med;
    lo = std::min(lo, x);
  }
  View out;
  out.label = v.label;
  out.bins.resize(v.bins.size());
  if (lo == 0.0) {
    std::fill(out.bins.begin(), out.bins.end(), 0.0f);
    return out;
  }
  const double scale = -lo;
  for (std::size_t i = 0; i < work.size(); ++i)
    out.bins[i] = static_cast<float>(work[i] / scale);
  return out;
}

View preprocess(const RawLightCurve& lc, const Ephemeris& eph,
                const PrepConfig& cfg) {
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
  };
  const RawLightCurve clipped = stage("sigma_clip", [&] {
    return sigma_clip(lc, cfg.sigma_upper, cfg.sigma_lower);
  });
  const RawLightCurve flat = stage("savitzky_golay_flatten", [&] {
    return savitzky_golay_flatten(clipped, cfg.sg_window, cfg.sg_polyorder);
  });
  const FoldedSeries folded =
      stage("phase_fold", [&] { return phase_fold(flat, eph); });
  const View binned =
      stage("bin_median", [&] { return bin_median(folded, cfg.bin_count); });
  return stage("normalize_view", [&] { return normalize_view(binned); });
}

RawLightCurve read_lightcurve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lightcurve file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty lightcurve file: " + path);
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "time,flux")
    throw std::runtime_error("bad lightcurve header in " + path);

  RawLightCurve lc;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected time,flux");
    try {
      lc.time.push_back(std::stod(line.substr(0, comma)));
      lc.flux.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed number");
    }
  }
  lc.validate();
  return lc;
}

void write_lightcurve_csv(const std::string& path, const RawLightCurve& lc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write lightcurve file: " + path);
  out << "time,flux\n";
  char buf[64];
  for (std::size_t i = 0; i < lc.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f\n", lc.time[i], lc.flux[i]);
    out << buf;
  }
}

}  // namespace genesis
