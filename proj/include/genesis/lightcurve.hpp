#pragma once

#include <string>
#include <vector>

namespace genesis {

inline constexpr int kLabelNonPlanet = 0;
inline constexpr int kLabelPlanet = 1;

// Irregularly sampled brightness series for one target.
struct RawLightCurve {
  std::vector<double> time;  // days, strictly increasing
  std::vector<double> flux;  // relative brightness

  std::size_t size() const { return time.size(); }
  void validate() const;  // throws std::invalid_argument on bad shape
};

struct Ephemeris {
  double period_days = 0.0;
  double epoch_days = 0.0;     // time of transit center
  double duration_hours = 0.0;

  void validate() const;
};

// Phase-folded samples, sorted by phase in [-0.5, 0.5).
struct FoldedSeries {
  std::vector<double> phase;
  std::vector<double> flux;
};

// Fixed-length binned view of a folded curve; the network input.
// label: 1 = planet candidate, 0 = non-candidate, -1 = unlabeled.
struct View {
  std::vector<float> bins;
  int label = -1;

  int bin_count() const { return static_cast<int>(bins.size()); }
  bool labeled() const { return label >= 0; }
};

struct PrepConfig {
  int bin_count = 2001;
  int sg_window = 101;
  int sg_polyorder = 2;
  double sigma_upper = 4.0;
  double sigma_lower = 20.0;
};

// Iterative asymmetric outlier rejection around the running median, scale =
// standard deviation of the surviving flux. At most max_iters passes; stops
// early once no sample is removed.
RawLightCurve sigma_clip(const RawLightCurve& lc, double sigma_upper,
                         double sigma_lower, int max_iters = 5);

// Savitzky-Golay trend of the flux (centered least-squares polynomial fit,
// samples treated as equally spaced). Edges reuse the first/last full
// window, evaluating the fitted polynomial off-center.
std::vector<double> savitzky_golay_trend(const std::vector<double>& flux,
                                         int window_length, int polyorder);

// Divides the flux by its Savitzky-Golay trend.
RawLightCurve savitzky_golay_flatten(const RawLightCurve& lc,
                                     int window_length, int polyorder);

// phase_i = ((time_i - epoch) / period + 0.5) mod 1 - 0.5, sorted by phase;
// the transit center lands on phase 0.
FoldedSeries phase_fold(const RawLightCurve& lc, const Ephemeris& eph);

// Median of the flux per equal-width phase bin; empty bins filled by linear
// interpolation between the nearest populated bins (constant at the ends).
View bin_median(const FoldedSeries& fs, int bin_count);

// Shifts the median to 0 and scales the minimum to -1. A view that is flat
// after the median shift becomes all zeros.
View normalize_view(const View& v);

// sigma_clip -> savitzky_golay_flatten -> phase_fold -> bin_median ->
// normalize_view. Errors are rethrown with the failing stage prefixed.
View preprocess(const RawLightCurve& lc, const Ephemeris& eph,
                const PrepConfig& cfg);

// Plain-text lightcurve format: header "time,flux", one sample per line.
RawLightCurve read_lightcurve_csv(const std::string& path);
void write_lightcurve_csv(const std::string& path, const RawLightCurve& lc);

}  // namespace genesis
