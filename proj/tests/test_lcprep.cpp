#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "genesis/dataset.hpp"
#include "genesis/lightcurve.hpp"
#include "genesis/rng.hpp"
#include "oracles.hpp"

using namespace genesis;

namespace {

RawLightCurve make_curve(const std::vector<double>& flux, double dt = 0.02) {
  RawLightCurve lc;
  lc.flux = flux;
  lc.time.resize(flux.size());
  for (std::size_t i = 0; i < flux.size(); ++i) lc.time[i] = dt * i;
  return lc;
}

double median_ref(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev_ref(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / v.size());
}

}  // namespace

TEST_CASE("sigma_clip keeps a constant series untouched") {
  const RawLightCurve lc = make_curve(std::vector<double>(100, 1.0));
  const RawLightCurve out = sigma_clip(lc, 4.0, 20.0);
  CHECK(out.size() == 100);
  CHECK(out.flux == lc.flux);
  CHECK(out.time == lc.time);
}

TEST_CASE("sigma_clip is asymmetric: +5 sigma goes, -10 sigma stays") {
  Rng rng(42);
  std::vector<double> flux(1000);
  const double sigma = 0.001;
  for (double& f : flux) f = 1.0 + rng.normal(0.0, sigma);
  flux[200] = 1.0 + 5 * sigma;   // above the 4-sigma upper bound
  flux[700] = 1.0 - 10 * sigma;  // well inside the 20-sigma lower bound
  const RawLightCurve lc = make_curve(flux);

  // independent recomputation of the first-pass bounds
  const double med = median_ref(flux);
  const double sd = stddev_ref(flux);
  REQUIRE(flux[200] > med + 4 * sd);
  REQUIRE(flux[700] > med - 20 * sd);

  const RawLightCurve out = sigma_clip(lc, 4.0, 20.0);
  CHECK(std::find(out.flux.begin(), out.flux.end(), flux[200]) ==
        out.flux.end());
  CHECK(std::find(out.flux.begin(), out.flux.end(), flux[700]) !=
        out.flux.end());
}

TEST_CASE("sigma_clip two-point hand case") {
  // median 1.5, population stddev 0.5; with an upper bound of 0.5 sigma the
  // larger point (z = +1) is removed and the survivor converges alone
  const RawLightCurve lc = make_curve({1.0, 2.0});
  const RawLightCurve out = sigma_clip(lc, 0.5, 20.0);
  REQUIRE(out.size() == 1);
  CHECK(out.flux[0] == 1.0);
}

TEST_CASE("sigma_clip reports a fully clipped series") {
  RawLightCurve lc = make_curve({1.0, -1.0, 1.0, -1.0, 1.0, -1.0});
  CHECK_THROWS_WITH_AS(sigma_clip(lc, 0.01, 0.01, 5),
                       doctest::Contains("empty lightcurve after clipping"),
                       std::runtime_error);
}

TEST_CASE("sigma_clip is idempotent once converged") {
  Rng rng(7);
  std::vector<double> flux(500);
  for (std::size_t i = 0; i < flux.size(); ++i)
    flux[i] = rng.normal(0.0, 1.0) + (i % 97 == 0 ? 8.0 : 0.0);
  const RawLightCurve once = sigma_clip(make_curve(flux), 3.0, 3.0, 10);
  const RawLightCurve twice = sigma_clip(once, 3.0, 3.0, 10);
  CHECK(once.flux == twice.flux);
  CHECK(once.time == twice.time);
}

TEST_CASE("sigma_clip never removes points inside the tighter bound") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> flux(300);
    for (double& f : flux) f = rng.normal(0.0, 1.0);
    const double su = rng.uniform(1.0, 4.0);
    const double sl = rng.uniform(1.0, 4.0);
    const RawLightCurve lc = make_curve(flux);
    const double med = median_ref(flux);
    const double sd = stddev_ref(flux);
    const double safe = std::min(su, sl) * sd;
    const RawLightCurve out = sigma_clip(lc, su, sl);
    for (std::size_t i = 0; i < flux.size(); ++i) {
      if (std::fabs(flux[i] - med) < safe) {
        CHECK(std::find(out.flux.begin(), out.flux.end(), flux[i]) !=
              out.flux.end());
      }
    }
  }
}

TEST_CASE("savitzky_golay reproduces polynomials up to its order") {
  Rng rng(3);
  for (int order = 0; order <= 3; ++order) {
    std::vector<double> coef(order + 1);
    for (double& c : coef) c = rng.uniform(-1.0, 1.0);
    coef[0] += 5.0;  // keep the trend away from zero
    std::vector<double> flux(301);
    for (int i = 0; i < 301; ++i) {
      double v = 0.0, x = 1.0;
      for (int p = 0; p <= order; ++p, x *= (i / 300.0)) v += coef[p] * x;
      flux[i] = v;
    }
    const RawLightCurve out =
        savitzky_golay_flatten(make_curve(flux), 31, std::max(order, 2));
    for (double f : out.flux) CHECK(f == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("savitzky_golay trend matches the sliding least-squares oracle") {
  Rng rng(11);
  std::vector<double> flux(501);
  for (double& f : flux) f = rng.uniform(0.5, 1.5);
  const std::vector<double> trend = savitzky_golay_trend(flux, 101, 2);
  const std::vector<double> ref = oracle::sliding_polyfit_trend(flux, 101, 2);
  for (std::size_t i = 0; i < flux.size(); ++i)
    CHECK(trend[i] == doctest::Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("savitzky_golay flattens a constant to ones") {
  const RawLightCurve out =
      savitzky_golay_flatten(make_curve(std::vector<double>(200, 3.7)), 21, 2);
  for (double f : out.flux) CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("savitzky_golay rejects a too-short series") {
  CHECK_THROWS_WITH_AS(
      savitzky_golay_flatten(make_curve(std::vector<double>(50, 1.0)), 101, 2),
      doctest::Contains("series too short to flatten"), std::runtime_error);
}

TEST_CASE("phase_fold maps the ephemeris anchors") {
  RawLightCurve lc;
  lc.time = {1.2, 1.2 + 3.7 / 2};
  lc.flux = {1.0, 2.0};
  Ephemeris eph{3.7, 1.2, 2.0};
  const FoldedSeries fs = phase_fold(lc, eph);
  // epoch itself lands on 0, a half period later wraps to -0.5
  CHECK(fs.phase[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(fs.flux[0] == 2.0);
  CHECK(fs.phase[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(fs.flux[1] == 1.0);
}

TEST_CASE("phase_fold matches a per-point modulo oracle and sorts") {
  Rng rng(5);
  std::vector<double> times(1000);
  double t = 0.0;
  for (double& x : times) {
    t += rng.uniform(0.001, 0.2);
    x = t;
  }
  RawLightCurve lc;
  lc.time = times;
  lc.flux.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) lc.flux[i] = i;
  const Ephemeris eph{3.7, 1.2, 2.0};
  const FoldedSeries fs = phase_fold(lc, eph);

  for (std::size_t i = 0; i < fs.phase.size(); ++i) {
    CHECK(fs.phase[i] >= -0.5);
    CHECK(fs.phase[i] < 0.5);
    if (i > 0) CHECK(fs.phase[i] >= fs.phase[i - 1]);
    // oracle on the original sample carried along as its flux index
    const double orig_t = times[static_cast<std::size_t>(fs.flux[i])];
    double frac = (orig_t - eph.epoch_days) / eph.period_days + 0.5;
    frac -= std::floor(frac);
    CHECK(fs.phase[i] == doctest::Approx(frac - 0.5).epsilon(1e-12));
  }
}

TEST_CASE("phase_fold is invariant under whole-period time shifts") {
  Rng rng(6);
  RawLightCurve lc;
  double t = 0.0;
  for (int i = 0; i < 400; ++i) {
    t += rng.uniform(0.01, 0.1);
    lc.time.push_back(t);
    lc.flux.push_back(rng.uniform(0.0, 1.0));
  }
  const Ephemeris eph{2.9, 0.7, 1.5};
  const FoldedSeries a = phase_fold(lc, eph);
  RawLightCurve shifted = lc;
  for (double& x : shifted.time) x += 17 * eph.period_days;
  const FoldedSeries b = phase_fold(shifted, eph);
  REQUIRE(a.phase.size() == b.phase.size());
  for (std::size_t i = 0; i < a.phase.size(); ++i) {
    CHECK(a.phase[i] == doctest::Approx(b.phase[i]).epsilon(1e-12));
    CHECK(a.flux[i] == b.flux[i]);
  }
}

TEST_CASE("bin_median of full constant coverage is constant") {
  FoldedSeries fs;
  for (int i = 0; i < 1000; ++i) {
    fs.phase.push_back(-0.5 + (i + 0.5) / 1000.0);
    fs.flux.push_back(1.0);
  }
  const View v = bin_median(fs, 50);
  for (float b : v.bins) CHECK(b == 1.0f);
}

TEST_CASE("bin_median hand case with interpolation fill") {
  FoldedSeries fs;
  fs.phase = {-0.4, -0.4};
  fs.flux = {1.0, 3.0};
  const View v = bin_median(fs, 5);
  REQUIRE(v.bins.size() == 5);
  for (float b : v.bins) CHECK(b == 2.0f);
}

TEST_CASE("bin_median matches the bucket oracle exactly") {
  Rng rng(8);
  FoldedSeries fs;
  for (int i = 0; i < 10000; ++i) {
    fs.phase.push_back(rng.uniform(-0.5, 0.5));
    fs.flux.push_back(rng.uniform(-2.0, 2.0));
  }
  std::sort(fs.phase.begin(), fs.phase.end());
  const View v = bin_median(fs, 2001);
  std::vector<bool> filled;
  const std::vector<double> ref =
      oracle::bin_medians(fs.phase, fs.flux, 2001, &filled);
  for (int b = 0; b < 2001; ++b)
    if (filled[b]) CHECK(v.bins[b] == static_cast<float>(ref[b]));
}

TEST_CASE("bin_median rejects an empty series") {
  FoldedSeries fs;
  CHECK_THROWS_WITH_AS(bin_median(fs, 10), doctest::Contains("no data to bin"),
                       std::runtime_error);
}

TEST_CASE("normalize_view hand cases") {
  View v;
  v.bins = {1, 1, 0, 1, 1};
  const View n = normalize_view(v);
  CHECK(n.bins == std::vector<float>{0, 0, -1, 0, 0});

  View flat;
  flat.bins = {5, 5, 5};
  const View nf = normalize_view(flat);
  CHECK(nf.bins == std::vector<float>{0, 0, 0});
}

TEST_CASE("normalize_view yields median 0 and min -1") {
  Rng rng(10);
  View v;
  v.bins.resize(2001);
  for (float& b : v.bins) b = static_cast<float>(rng.uniform(-3.0, 3.0));
  const View n = normalize_view(v);
  std::vector<double> out(n.bins.begin(), n.bins.end());
  CHECK(std::fabs(median_ref(out)) < 1e-9);
  CHECK(std::fabs(*std::min_element(out.begin(), out.end()) + 1.0) < 1e-9);
}

TEST_CASE("preprocess centers a noiseless box transit") {
  SynthOptions opts;
  opts.n_per_class = 3;
  opts.bin_count = 501;
  opts.noise_std = 0.0;
  opts.seed = 21;
  opts.samples_per_curve = 4000;
  opts.keep_raw = false;
  const SynthCorpus corpus = synth_generate(opts);
  for (int i = 0; i < 3; ++i) {
    const View& v = corpus.views.views[i];
    REQUIRE(v.label == kLabelPlanet);
    const auto min_it = std::min_element(v.bins.begin(), v.bins.end());
    const int min_bin = static_cast<int>(min_it - v.bins.begin());
    CHECK(std::abs(min_bin - 250) <= 1);
    CHECK(*min_it == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("preprocess of pure noise honors the normalization contract") {
  Rng rng(13);
  RawLightCurve lc;
  for (int i = 0; i < 4000; ++i) {
    lc.time.push_back(i * 0.02);
    lc.flux.push_back(1.0 + rng.normal(0.0, 0.001));
  }
  const Ephemeris eph{3.1, 0.4, 2.5};
  PrepConfig cfg;
  cfg.bin_count = 501;
  const View v = preprocess(lc, eph, cfg);
  std::vector<double> bins(v.bins.begin(), v.bins.end());
  for (double b : bins) CHECK(b >= -1.0 - 1e-9);
  CHECK(std::fabs(median_ref(bins)) < 1e-9);
}

TEST_CASE("2001-bin and 4002-bin views of the same input correlate") {
  SynthOptions opts;
  opts.n_per_class = 2;
  opts.bin_count = 2001;
  opts.noise_std = 0.0;
  opts.seed = 33;
  opts.samples_per_curve = 16000;
  const SynthCorpus base = synth_generate(opts);

  PrepConfig cfg;
  cfg.bin_count = 4002;
  for (int i = 0; i < 2; ++i) {
    const View wide =
        preprocess(base.lightcurves[i], base.catalog[i].ephemeris, cfg);
    const View& narrow = base.views.views[i];
    // pairwise-average the 4002-bin view down to 2001 bins
    std::vector<double> avg(2001), ref(2001);
    for (int b = 0; b < 2001; ++b) {
      avg[b] = 0.5 * (wide.bins[2 * b] + wide.bins[2 * b + 1]);
      ref[b] = narrow.bins[b];
    }
    double ma = 0, mr = 0;
    for (int b = 0; b < 2001; ++b) {
      ma += avg[b] / 2001;
      mr += ref[b] / 2001;
    }
    double num = 0, da = 0, dr = 0;
    for (int b = 0; b < 2001; ++b) {
      num += (avg[b] - ma) * (ref[b] - mr);
      da += (avg[b] - ma) * (avg[b] - ma);
      dr += (ref[b] - mr) * (ref[b] - mr);
    }
    CHECK(num / std::sqrt(da * dr) > 0.99);
  }
}

TEST_CASE("preprocess is bitwise deterministic") {
  SynthOptions opts;
  opts.n_per_class = 2;
  opts.bin_count = 301;
  opts.noise_std = 0.4;
  opts.seed = 55;
  opts.samples_per_curve = 3000;
  const SynthCorpus corpus = synth_generate(opts);
  PrepConfig cfg;
  cfg.bin_count = 301;
  for (int i = 0; i < 4; ++i) {
    const View a =
        preprocess(corpus.lightcurves[i], corpus.catalog[i].ephemeris, cfg);
    const View b =
        preprocess(corpus.lightcurves[i], corpus.catalog[i].ephemeris, cfg);
    CHECK(a.bins == b.bins);
  }
}

TEST_CASE("preprocess names the failing stage") {
  RawLightCurve lc = make_curve(std::vector<double>(50, 1.0));
  const Ephemeris eph{3.0, 0.0, 2.0};
  PrepConfig cfg;
  cfg.bin_count = 101;  // series far shorter than the default SG window
  CHECK_THROWS_WITH_AS(preprocess(lc, eph, cfg),
                       doctest::Contains("savitzky_golay_flatten"),
                       std::runtime_error);
}

TEST_CASE("lightcurve csv round trip") {
  Rng rng(77);
  RawLightCurve lc;
  for (int i = 0; i < 100; ++i) {
    lc.time.push_back(i * 0.02);
    lc.flux.push_back(1.0 + rng.normal(0.0, 0.01));
  }
  const std::string path = "lcprep_roundtrip.csv";
  write_lightcurve_csv(path, lc);
  const RawLightCurve back = read_lightcurve_csv(path);
  REQUIRE(back.size() == lc.size());
  for (std::size_t i = 0; i < lc.size(); ++i) {
    CHECK(back.time[i] == doctest::Approx(lc.time[i]).epsilon(1e-9));
    CHECK(back.flux[i] == doctest::Approx(lc.flux[i]).epsilon(1e-9));
  }
  std::remove(path.c_str());
}
