#include <cmath>
#include <stdexcept>
#include <string>

#include "genesis/dataset.hpp"

namespace genesis {

namespace {

// Wrapped phase distance from the transit center at phase `center`.
double phase_distance(double t, const Ephemeris& eph, double center) {
  double m = std::fmod((t - eph.epoch_days) / eph.period_days + 0.5, 1.0);
  if (m < 0.0) m += 1.0;
  double d = std::fabs((m - 0.5) - center);
  if (d > 0.5) d = 1.0 - d;
  return d;
}

struct CurveSpec {
  Ephemeris eph;
  double depth = 0.0;          // primary dip depth
  double secondary_rel = 0.0;  // eclipsing-binary secondary, 0 = none
  double secondary_dur_scale = 1.0;
  bool inject_primary = false;
  double trend_amp = 0.0;
  double trend_period = 30.0;
  double trend_phase = 0.0;
};

RawLightCurve render_curve(const CurveSpec& s, const SynthOptions& opts,
                           Rng& rng) {
  RawLightCurve lc;
  lc.time.resize(opts.samples_per_curve);
  lc.flux.resize(opts.samples_per_curve);
  const double half_dur_phase =
      0.5 * (s.eph.duration_hours / 24.0) / s.eph.period_days;
  for (int i = 0; i < opts.samples_per_curve; ++i) {
    // jittered cadence breaks period/cadence resonances
    const double t = (i + 0.4 * rng.uniform(-1.0, 1.0)) * opts.cadence_days;
    double f = 1.0 + s.trend_amp * std::sin(6.283185307179586 * t /
                                                s.trend_period +
                                            s.trend_phase);
    if (s.inject_primary && phase_distance(t, s.eph, 0.0) <= half_dur_phase)
      f -= s.depth;
    if (s.secondary_rel > 0.0 &&
        phase_distance(t, s.eph, 0.5) <=
            half_dur_phase * s.secondary_dur_scale)
      f -= s.depth * s.secondary_rel;
    f += rng.normal(0.0, opts.noise_std * s.depth);
    lc.time[i] = t;
    lc.flux[i] = f;
  }
  return lc;
}

CurveSpec draw_spec(int label, Rng& rng) {
  CurveSpec s;
  s.eph.period_days = rng.uniform(2.0, 8.0);
  s.eph.epoch_days = rng.uniform(0.0, s.eph.period_days);
  const double dur_frac = rng.uniform(0.01, 0.05);
  s.eph.duration_hours = dur_frac * s.eph.period_days * 24.0;
  s.depth = rng.uniform(0.005, 0.02);
  s.trend_amp = s.depth * rng.uniform(1.0, 3.0);
  s.trend_period = rng.uniform(20.0, 60.0);
  s.trend_phase = rng.uniform(0.0, 6.283185307179586);
  if (label == kLabelPlanet) {
    s.inject_primary = true;
  } else if (rng.uniform01() < 0.5) {
    // eclipsing-binary-like: primary dip plus a secondary at phase +-0.5
    s.inject_primary = true;
    s.secondary_rel = rng.uniform(0.4, 0.9);
    s.secondary_dur_scale = rng.uniform(0.8, 1.2);
  }
  // remaining negatives carry no dip at all
  return s;
}

}  // namespace

SynthCorpus synth_generate(const SynthOptions& opts) {
  if (opts.n_per_class < 1)
    throw std::invalid_argument("n_per_class must be >= 1");
  if (opts.bin_count < 2)
    throw std::invalid_argument("bin_count must be >= 2");
  if (opts.noise_std < 0.0)
    throw std::invalid_argument("noise_std must be >= 0");
  if (opts.samples_per_curve < 64)
    throw std::invalid_argument("samples_per_curve must be >= 64");

  const Rng root(opts.seed);
  PrepConfig prep;
  prep.bin_count = opts.bin_count;

  SynthCorpus corpus;
  corpus.views.bin_count = opts.bin_count;
  const int total = 2 * opts.n_per_class;
  corpus.views.views.reserve(total);
  corpus.catalog.reserve(total);
  if (opts.keep_raw) corpus.lightcurves.reserve(total);

  for (int i = 0; i < total; ++i) {
    const int label = i < opts.n_per_class ? kLabelPlanet : kLabelNonPlanet;
    Rng rng = root.substream(static_cast<std::uint64_t>(i));
    const CurveSpec spec = draw_spec(label, rng);
    RawLightCurve lc = render_curve(spec, opts, rng);

    View v = preprocess(lc, spec.eph, prep);
    v.label = label;
    corpus.views.views.push_back(std::move(v));

    TceRecord rec;
    rec.target_id = (label == kLabelPlanet ? "SYN-P" : "SYN-N") +
                    std::to_string(i);
    rec.ephemeris = spec.eph;
    rec.label = label;
    corpus.catalog.push_back(std::move(rec));
    if (opts.keep_raw) corpus.lightcurves.push_back(std::move(lc));
  }
  return corpus;
}

}  // namespace genesis
