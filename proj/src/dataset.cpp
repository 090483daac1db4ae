#include "genesis/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace genesis {

ViewCollection ViewCollection::subset(
    const std::vector<std::size_t>& indices) const {
  ViewCollection out;
  out.bin_count = bin_count;
  out.views.reserve(indices.size());
  for (std::size_t i : indices) out.views.push_back(views.at(i));
  return out;
}

void ViewCollection::validate() const {
  for (const View& v : views) {
    if (v.bin_count() != bin_count)
      throw std::invalid_argument("view bin_count mismatch in collection");
    if (!v.labeled())
      throw std::invalid_argument("unlabeled view in collection");
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

double parse_positive(const std::string& text, const char* field,
                      std::size_t lineno) {
  double v = 0.0;
  try {
    v = std::stod(text);
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(lineno) +
                             ": malformed " + field);
  }
  if (!(v > 0.0))
    throw std::runtime_error("line " + std::to_string(lineno) + ": " + field +
                             " must be positive");
  return v;
}

}  // namespace

std::vector<TceRecord> load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty catalog: " + path);
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "target_id,period_days,epoch_days,duration_hours,label")
    throw std::runtime_error("bad catalog header in " + path);

  std::vector<TceRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 5)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected 5 fields, got " +
                               std::to_string(f.size()));
    TceRecord rec;
    rec.target_id = f[0];
    rec.ephemeris.period_days = parse_positive(f[1], "period_days", lineno);
    try {
      rec.ephemeris.epoch_days = std::stod(f[2]);
    } catch (const std::exception&) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": malformed epoch_days");
    }
    rec.ephemeris.duration_hours =
        parse_positive(f[3], "duration_hours", lineno);
    if (f[4] == "planet") {
      rec.label = kLabelPlanet;
    } else if (f[4] == "nonplanet") {
      rec.label = kLabelNonPlanet;
    } else {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": unknown label token '" + f[4] + "'");
    }
    rec.ephemeris.validate();
    records.push_back(std::move(rec));
  }
  return records;
}

void save_catalog(const std::string& path,
                  const std::vector<TceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalog: " + path);
  out << "target_id,period_days,epoch_days,duration_hours,label\n";
  char buf[160];
  for (const TceRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%.9f,%.9f,%.9f,%s\n",
                  r.target_id.c_str(), r.ephemeris.period_days,
                  r.ephemeris.epoch_days, r.ephemeris.duration_hours,
                  r.label == kLabelPlanet ? "planet" : "nonplanet");
    out << buf;
  }
}

DatasetSplit mc_split(std::size_t n_items, const SplitFractions& fractions,
                      std::uint64_t seed) {
  if (n_items < 10)
    throw std::invalid_argument("need at least 10 items to split");
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fractions.train * n_items));
  const std::size_t n_val =
      static_cast<std::size_t>(std::llround(fractions.validation * n_items));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n_items)
    throw std::invalid_argument("fractions give an empty part");

  std::vector<std::size_t> order(n_items);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  DatasetSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train,
                          order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

DatasetSplit mc_split(std::size_t n_items, std::uint64_t seed) {
  return mc_split(n_items, SplitFractions{}, seed);
}

std::vector<DatasetSplit> make_splits(std::size_t n_items,
                                      std::size_t n_partitions,
                                      std::uint64_t base_seed) {
  if (n_partitions < 1)
    throw std::invalid_argument("need at least one partition");
  std::vector<DatasetSplit> splits;
  splits.reserve(n_partitions);
  for (std::size_t i = 0; i < n_partitions; ++i)
    splits.push_back(mc_split(n_items, base_seed + i));
  return splits;
}

View reflect(const View& v) {
  View out = v;
  std::reverse(out.bins.begin(), out.bins.end());
  return out;
}

BinStats bin_statistics(const ViewCollection& views) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const View& v : views.views) {
    for (float b : v.bins) sum += b;
    n += v.bins.size();
  }
  if (n == 0) throw std::invalid_argument("no bins to measure");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const View& v : views.views)
    for (float b : v.bins) ss += (b - mean) * (b - mean);
  return BinStats{mean, std::sqrt(ss / static_cast<double>(n))};
}

std::vector<View> gaussian_copies(const View& v, double train_mean,
                                  double train_std, int n_copies, Rng& rng) {
  if (n_copies < 1) throw std::invalid_argument("n_copies must be >= 1");
  if (train_std < 0.0) throw std::invalid_argument("train_std must be >= 0");
  std::vector<View> out;
  out.reserve(n_copies);
  for (int c = 0; c < n_copies; ++c) {
    View copy;
    copy.label = v.label;
    copy.bins.resize(v.bins.size());
    for (std::size_t i = 0; i < v.bins.size(); ++i)
      copy.bins[i] = static_cast<float>(v.bins[i] +
                                        rng.normal(train_mean, train_std));
    out.push_back(std::move(copy));
  }
  return out;
}

ViewCollection augment_training_set(const ViewCollection& train, Rng& rng,
                                    const AugmentOptions& opts) {
  if (train.views.empty())
    throw std::invalid_argument("cannot augment an empty training set");
  train.validate();
  const BinStats stats = bin_statistics(train);
  const double noise_mean = opts.zero_mean_noise ? 0.0 : stats.mean;

  ViewCollection out;
  out.bin_count = train.bin_count;
  out.views.reserve(train.views.size() * (2 + opts.gaussian_copies));
  for (const View& v : train.views) out.views.push_back(v);
  for (const View& v : train.views) out.views.push_back(reflect(v));
  for (const View& v : train.views) {
    std::vector<View> copies =
        gaussian_copies(v, noise_mean, stats.stddev, opts.gaussian_copies, rng);
    for (View& c : copies) out.views.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// View file

namespace {

constexpr char kViewMagic[4] = {'G', 'E', 'N', 'V'};
constexpr std::uint16_t kViewVersion = 1;

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
  if (!in) throw std::runtime_error(std::string("truncated view file at ") + what);
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_views(const std::string& path, const ViewCollection& views) {
  views.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write view file: " + path);
  out.write(kViewMagic, 4);
  write_le<std::uint16_t>(out, kViewVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(views.bin_count));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(views.views.size()));
  for (const View& v : views.views) {
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(v.label));
    out.write(reinterpret_cast<const char*>(v.bins.data()),
              static_cast<std::streamsize>(v.bins.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ViewCollection read_views(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open view file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kViewMagic, 4) != 0)
    throw std::runtime_error("not a view file: " + path);
  const auto version = read_le<std::uint16_t>(in, "version");
  if (version != kViewVersion)
    throw std::runtime_error("unsupported view file version " +
                             std::to_string(version));
  const auto bin_count = read_le<std::uint32_t>(in, "bin_count");
  const auto n_records = read_le<std::uint32_t>(in, "record count");
  if (bin_count < 2) throw std::runtime_error("corrupt view file bin_count");

  ViewCollection out;
  out.bin_count = static_cast<int>(bin_count);
  out.views.resize(n_records);
  for (std::uint32_t r = 0; r < n_records; ++r) {
    const auto label = read_le<std::uint8_t>(in, "record label");
    if (label > 1)
      throw std::runtime_error("corrupt view file label " +
                               std::to_string(label));
    View& v = out.views[r];
    v.label = label;
    v.bins.resize(bin_count);
    in.read(reinterpret_cast<char*>(v.bins.data()),
            static_cast<std::streamsize>(bin_count * sizeof(float)));
    if (!in) throw std::runtime_error("truncated view file record");
  }
  return out;
}

}  // namespace genesis
