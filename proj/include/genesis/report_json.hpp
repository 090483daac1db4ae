#pragma once

#include <json.hpp>

#include "genesis/evaluation.hpp"
#include "genesis/training.hpp"

namespace genesis {

// Report serialization. Wall-clock timings deliberately stay out of these
// documents so reruns with identical inputs produce identical bytes; the
// run manifest carries the timing side-channel instead.

inline nlohmann::json to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

inline nlohmann::json to_json(const EnsembleReport& r) {
  return {{"ensembled_accuracy", r.ensembled_accuracy},
          {"ensembled_auc", r.ensembled_auc},
          {"confusion", to_json(r.confusion)},
          {"n_models", r.n_models},
          {"n_views", r.n_views}};
}

inline nlohmann::json to_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}};
}

inline nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochStats& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"validation_accuracy", e.validation_accuracy}});
  return {{"seed", r.seed},
          {"epochs", epochs},
          {"stopped_epoch", r.stopped_epoch},
          {"best_epoch", r.best_epoch},
          {"best_validation_accuracy", r.best_validation_accuracy}};
}

inline nlohmann::json to_json(const DatasetSplit& s) {
  return {{"seed", s.seed},
          {"train", s.train},
          {"validation", s.validation},
          {"test", s.test}};
}

inline nlohmann::json to_json(const CvReport& r) {
  nlohmann::json partitions = nlohmann::json::array();
  for (const PartitionResult& p : r.partitions)
    partitions.push_back({{"partition", p.partition_index},
                          {"split_seed", p.split.seed},
                          {"ensemble_seed", p.ensemble_seed},
                          {"n_train", p.split.train.size()},
                          {"n_validation", p.split.validation.size()},
                          {"n_test", p.split.test.size()},
                          {"report", to_json(p.report)}});
  return {{"partitions", partitions},
          {"accuracy_mean", r.accuracy_mean},
          {"accuracy_std", r.accuracy_std},
          {"accuracy_min", r.accuracy_min},
          {"accuracy_max", r.accuracy_max},
          {"histogram", to_json(r.histogram)}};
}

inline nlohmann::json to_json(const BinsizeComparison& c) {
  nlohmann::json out;
  for (int side = 0; side < 2; ++side) {
    out[std::to_string(c.bin_counts[side])] = {
        {"report", to_json(c.reports[side])},
        {"skipped_records", c.skipped_records[side]}};
  }
  return out;
}

inline DatasetSplit split_from_json(const nlohmann::json& j) {
  DatasetSplit s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.validation = j.at("validation").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  return s;
}

}  // namespace genesis
