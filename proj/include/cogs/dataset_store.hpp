#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "cogs/recompose.hpp"

namespace cogs {

struct StorageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyStore : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StoreStats {
  int total = 0;
  std::map<int, int> factor_count_histogram;
  std::map<std::string, int> category_frequency;
  int dedup_rejections = 0;
};

struct StoreManifest {
  std::string created_at;
  std::string pool_header;      // JSON blob of the generating pool header
  std::string config_snapshot;  // JSON blob of the pipeline config
};

// Append-ordered store of synthesized samples with (image, concise question)
// dedup. Single writer, many readers; appends are serialized.
class DatasetStore {
 public:
  DatasetStore() = default;
  explicit DatasetStore(StoreManifest manifest) : manifest_(std::move(manifest)) {}
  DatasetStore(DatasetStore&& o) noexcept {
    std::lock_guard lk(o.mu_);
    records_ = std::move(o.records_);
    index_ = std::move(o.index_);
    manifest_ = std::move(o.manifest_);
    dedup_rejections_ = o.dedup_rejections_;
  }

  // false when the dedup key already exists.
  bool append(const SynthesizedSample& sample);

  bool contains(const std::string& image_ref, const std::string& concise_norm) const;

  const std::vector<SynthesizedSample>& records() const { return records_; }
  const StoreManifest& manifest() const { return manifest_; }

  std::map<std::string, std::vector<std::size_t>> split(
      const std::vector<std::pair<std::string, double>>& ratios,
      std::uint64_t seed) const;

  // JSONL rows {prompt, image, ground_truth, sub_items}; returns row count.
  int export_trainer_format(const std::vector<std::size_t>& record_ids,
                            const std::string& path) const;

  StoreStats stats() const;

  void save(const std::string& path) const;
  static DatasetStore load(const std::string& path);

 private:
  mutable std::mutex mu_;
  std::vector<SynthesizedSample> records_;
  std::set<std::pair<std::string, std::string>> index_;
  StoreManifest manifest_;
  int dedup_rejections_ = 0;
};

std::string sample_to_json(const SynthesizedSample& s);
SynthesizedSample sample_from_json(const std::string& line);

}  // namespace cogs
