#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cogs/decompose.hpp"

namespace cogs {

struct InsufficientPool : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoolStats {
  int categories = 0;
  int exemplars_total = 0;
  std::map<std::string, int> per_category;
  std::vector<std::string> sources;
};

struct ReasoningFactorSpec {
  FactorCategory category;
  int count = 1;
  std::vector<std::string> exemplars;
};

struct RecompositionSpec {
  std::string image_ref;
  std::optional<std::string> metadata;
  int perception_count = 1;
  std::vector<std::string> perception_exemplars;
  std::vector<ReasoningFactorSpec> reasoning_factors;
  std::vector<std::string> concise_examples;
  int pairs_requested = 5;

  int total_factors() const;
  std::string serialize() const;
  std::string fingerprint() const;  // stable hash over serialize()
};

struct SamplingConfig {
  int perception_count_min = 1;
  int perception_count_max = 3;
  int reasoning_category_count_min = 1;
  int reasoning_category_count_max = 3;
  int per_category_count = 1;      // occurrences of each sampled factor
  int exemplars_per_category = 3;
  int concise_example_count = 3;
  int pairs_requested = 5;
};

// Aggregated factor space: categories mapped to exemplar subquestions with
// provenance. add() is synchronized; sampling is pure given an rng.
class FactorPool {
 public:
  explicit FactorPool(std::uint64_t rng_seed = 0);
  FactorPool(const FactorPool& o);
  FactorPool& operator=(const FactorPool& o);

  void add(const FactorizedQuestion& fq, const std::string& dataset_id);
  void add_factor(const Factor& f, const std::string& dataset_id);

  friend FactorPool merge(const FactorPool& a, const FactorPool& b);

  RecompositionSpec sample_spec(const std::string& image_ref,
                                const std::optional<std::string>& metadata,
                                const SamplingConfig& config,
                                std::mt19937_64& rng) const;

  PoolStats stats() const;
  std::uint64_t rng_seed() const { return rng_seed_; }
  std::vector<std::string> category_names() const;
  std::set<std::string> provenance_of(const std::string& category) const;
  bool empty() const;

  void save(const std::string& path) const;
  static FactorPool load(const std::string& path);

 private:
  struct Entry {
    FactorKind kind = FactorKind::Reasoning;
    // (subquestion, source_question_id); dedup key is (category, subquestion)
    std::map<std::string, std::string> exemplars;
    std::set<std::string> datasets;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> datasets_;
  std::uint64_t rng_seed_ = 0;
};

FactorPool merge(const FactorPool& a, const FactorPool& b);

}  // namespace cogs
