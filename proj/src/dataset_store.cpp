#include "cogs/dataset_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "cogs/prompts.hpp"
#include "cogs/text.hpp"

namespace cogs {

using nlohmann::json;

std::string sample_to_json(const SynthesizedSample& s) {
  json items = json::array();
  for (const auto& it : s.sub_items) {
    items.push_back({{"category", it.category.name},
                     {"subquestion", it.subquestion},
                     {"subanswer", it.subanswer}});
  }
  json j = {{"image", s.image_ref},
            {"question", s.detailed_question},
            {"concise_question", s.concise_question},
            {"reasoning", s.reasoning_trace},
            {"final_answer", s.final_answer},
            {"sub_items", std::move(items)},
            {"spec_fingerprint", s.spec_fingerprint},
            {"metadata_used", s.metadata_used}};
  return j.dump();
}

SynthesizedSample sample_from_json(const std::string& line) {
  json j = json::parse(line);
  SynthesizedSample s;
  s.image_ref = j.at("image").get<std::string>();
  s.detailed_question = j.at("question").get<std::string>();
  s.concise_question = j.at("concise_question").get<std::string>();
  s.reasoning_trace = j.value("reasoning", "");
  s.final_answer = j.at("final_answer").get<std::string>();
  for (const auto& it : j.value("sub_items", json::array())) {
    SubItem item;
    item.category = make_category(it.at("category").get<std::string>());
    item.subquestion = it.value("subquestion", "");
    item.subanswer = it.value("subanswer", "");
    s.sub_items.push_back(std::move(item));
  }
  s.spec_fingerprint = j.value("spec_fingerprint", "");
  s.metadata_used = j.value("metadata_used", false);
  return s;
}

bool DatasetStore::append(const SynthesizedSample& sample) {
  std::lock_guard lk(mu_);
  auto key = std::make_pair(sample.image_ref,
                            text::normalize_question(sample.concise_question));
  if (index_.count(key)) {
    ++dedup_rejections_;
    return false;
  }
  index_.insert(std::move(key));
  records_.push_back(sample);
  return true;
}

bool DatasetStore::contains(const std::string& image_ref,
                            const std::string& concise_norm) const {
  std::lock_guard lk(mu_);
  return index_.count({image_ref, concise_norm}) > 0;
}

std::map<std::string, std::vector<std::size_t>> DatasetStore::split(
    const std::vector<std::pair<std::string, double>>& ratios,
    std::uint64_t seed) const {
  std::lock_guard lk(mu_);
  if (records_.empty()) throw EmptyStore("cannot split an empty store");
  for (const auto& [name, w] : ratios) {
    if (w <= 0) throw std::invalid_argument("split weight for '" + name + "' <= 0");
  }
  double total_w = 0;
  for (const auto& [_, w] : ratios) total_w += w;

  std::vector<std::size_t> idx(records_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[text::bounded(rng, i)]);

  // largest-remainder apportionment keeps each split within 1 of exact
  std::size_t n = records_.size();
  std::vector<std::size_t> counts(ratios.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    double exact = n * ratios[k].second / total_w;
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[k];
    remainders.push_back({exact - std::floor(exact), k});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned)
    ++counts[remainders[i % remainders.size()].second];

  std::map<std::string, std::vector<std::size_t>> out;
  std::size_t at = 0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    auto& ids = out[ratios[k].first];
    ids.assign(idx.begin() + at, idx.begin() + at + counts[k]);
    std::sort(ids.begin(), ids.end());
    at += counts[k];
  }
  return out;
}

int DatasetStore::export_trainer_format(const std::vector<std::size_t>& record_ids,
                                        const std::string& path) const {
  std::lock_guard lk(mu_);
  std::ofstream out(path);
  if (!out) throw StorageError("cannot write export file: " + path);
  int count = 0;
  for (std::size_t id : record_ids) {
    if (id >= records_.size()) throw StorageError("record id out of range");
    const auto& s = records_[id];
    json items = json::array();
    for (const auto& it : s.sub_items) {
      items.push_back({{"category", it.category.name},
                       {"subquestion", it.subquestion},
                       {"subanswer", it.subanswer}});
    }
    json row = {{"prompt", prompts::kEvaluationPreamble + "\n\nQuestion: " +
                               s.concise_question},
                {"image", s.image_ref},
                {"ground_truth", s.final_answer},
                {"sub_items", std::move(items)}};
    out << row.dump() << "\n";
    ++count;
  }
  if (!out) throw StorageError("write failed: " + path);
  return count;
}

StoreStats DatasetStore::stats() const {
  std::lock_guard lk(mu_);
  StoreStats s;
  s.total = static_cast<int>(records_.size());
  s.dedup_rejections = dedup_rejections_;
  for (const auto& r : records_) {
    ++s.factor_count_histogram[static_cast<int>(r.sub_items.size())];
    for (const auto& it : r.sub_items) ++s.category_frequency[it.category.name];
  }
  return s;
}

void DatasetStore::save(const std::string& path) const {
  std::lock_guard lk(mu_);
  std::ofstream out(path);
  if (!out) throw StorageError("cannot write dataset file: " + path);
  json manifest = {{"type", "manifest"},
                   {"created_at", manifest_.created_at},
                   {"pool_header", manifest_.pool_header},
                   {"config_snapshot", manifest_.config_snapshot},
                   {"dedup_rejections", dedup_rejections_}};
  out << manifest.dump() << "\n";
  for (const auto& r : records_) out << sample_to_json(r) << "\n";
  if (!out) throw StorageError("write failed: " + path);
}

DatasetStore DatasetStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read dataset file: " + path);
  DatasetStore store;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    if (first) {
      first = false;
      json j = json::parse(line);
      if (j.value("type", "") == "manifest") {
        store.manifest_.created_at = j.value("created_at", "");
        store.manifest_.pool_header = j.value("pool_header", "");
        store.manifest_.config_snapshot = j.value("config_snapshot", "");
        store.dedup_rejections_ = j.value("dedup_rejections", 0);
        continue;
      }
    }
    store.append(sample_from_json(line));
  }
  return store;
}

}  // namespace cogs
