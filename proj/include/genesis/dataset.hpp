#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genesis/lightcurve.hpp"
#include "genesis/rng.hpp"

namespace genesis {

struct TceRecord {
  std::string target_id;
  Ephemeris ephemeris;
  int label = kLabelNonPlanet;
};

// Disjoint, exhaustive index partition of a view collection.
struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct ViewCollection {
  int bin_count = 0;
  std::vector<View> views;

  std::size_t size() const { return views.size(); }
  ViewCollection subset(const std::vector<std::size_t>& indices) const;
  void validate() const;  // shared bin_count, every view labeled
};

// Catalog format: header "target_id,period_days,epoch_days,duration_hours,label",
// label token "planet" or "nonplanet". Malformed lines raise with the line
// number and field named.
std::vector<TceRecord> load_catalog(const std::string& path);
void save_catalog(const std::string& path,
                  const std::vector<TceRecord>& records);

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

// Random permutation split: first round(train*n) indices to train, next
// round(validation*n) to validation, remainder to test.
DatasetSplit mc_split(std::size_t n_items, const SplitFractions& fractions,
                      std::uint64_t seed);
DatasetSplit mc_split(std::size_t n_items, std::uint64_t seed);

// Split i is seeded with base_seed + i.
std::vector<DatasetSplit> make_splits(std::size_t n_items,
                                      std::size_t n_partitions,
                                      std::uint64_t base_seed);

// Bins reversed end to end; label kept.
View reflect(const View& v);

// Mean/stddev over every bin of every view (population stddev).
struct BinStats {
  double mean = 0.0;
  double stddev = 0.0;
};
BinStats bin_statistics(const ViewCollection& views);

// Independent per-bin noise drawn from Normal(train_mean, train_std).
std::vector<View> gaussian_copies(const View& v, double train_mean,
                                  double train_std, int n_copies, Rng& rng);

struct AugmentOptions {
  int gaussian_copies = 4;
  // Forces the additive noise to mean 0 instead of the training-set mean.
  bool zero_mean_noise = false;
};

// originals + reflections + gaussian_copies noisy copies of each original;
// noise statistics are measured over the given training views.
ViewCollection augment_training_set(const ViewCollection& train, Rng& rng,
                                    const AugmentOptions& opts = {});

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthOptions {
  int n_per_class = 500;
  int bin_count = 2001;
  // Noise standard deviation in units of each curve's signal depth.
  double noise_std = 0.5;
  std::uint64_t seed = 0;
  int samples_per_curve = 8000;
  double cadence_days = 0.02;
  bool keep_raw = true;  // retain the raw lightcurves alongside the views
};

struct SynthCorpus {
  ViewCollection views;
  std::vector<TceRecord> catalog;
  std::vector<RawLightCurve> lightcurves;  // empty when keep_raw is false
};

// Balanced two-class corpus: planets are box transits at phase 0 (depth in
// [0.005, 0.02], duration 1-5% of the period); non-planets are either pure
// noise or an eclipsing-binary-like pair of dips at phase 0 and +-0.5.
// Views come out of the standard preprocessing pipeline.
SynthCorpus synth_generate(const SynthOptions& opts);

// ---------------------------------------------------------------------------
// View file: magic "GENV", u16 version = 1, u32 bin_count, u32 record count,
// then per record [u8 label][bin_count x f32 bins], all little-endian.

void write_views(const std::string& path, const ViewCollection& views);
ViewCollection read_views(const std::string& path);

}  // namespace genesis
