#include "cogs/factor_pool.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cogs/text.hpp"

namespace cogs {

using nlohmann::json;

int RecompositionSpec::total_factors() const {
  int n = perception_count;
  for (const auto& rf : reasoning_factors) n += rf.count;
  return n;
}

std::string RecompositionSpec::serialize() const {
  json j;
  j["image"] = image_ref;
  if (metadata) j["metadata"] = *metadata;
  j["perception_count"] = perception_count;
  j["perception_exemplars"] = perception_exemplars;
  j["reasoning_factors"] = json::array();
  for (const auto& rf : reasoning_factors) {
    j["reasoning_factors"].push_back({{"category", rf.category.name},
                                      {"count", rf.count},
                                      {"exemplars", rf.exemplars}});
  }
  j["concise_examples"] = concise_examples;
  j["pairs_requested"] = pairs_requested;
  return j.dump();
}

std::string RecompositionSpec::fingerprint() const {
  std::ostringstream os;
  os << std::hex << text::fnv1a(serialize());
  return os.str();
}

FactorPool::FactorPool(std::uint64_t rng_seed) : rng_seed_(rng_seed) {}

FactorPool::FactorPool(const FactorPool& o) {
  std::lock_guard lk(o.mu_);
  entries_ = o.entries_;
  datasets_ = o.datasets_;
  rng_seed_ = o.rng_seed_;
}

FactorPool& FactorPool::operator=(const FactorPool& o) {
  if (this == &o) return *this;
  FactorPool tmp(o);
  std::lock_guard lk(mu_);
  entries_ = std::move(tmp.entries_);
  datasets_ = std::move(tmp.datasets_);
  rng_seed_ = tmp.rng_seed_;
  return *this;
}

void FactorPool::add_factor(const Factor& f, const std::string& dataset_id) {
  std::lock_guard lk(mu_);
  auto& entry = entries_[f.category.name];
  entry.kind = f.category.kind;
  entry.exemplars.emplace(f.subquestion, f.source_question_id);
  entry.datasets.insert(dataset_id);
  datasets_.insert(dataset_id);
}

void FactorPool::add(const FactorizedQuestion& fq, const std::string& dataset_id) {
  for (const auto& f : fq.factors) add_factor(f, dataset_id);
}

FactorPool merge(const FactorPool& a, const FactorPool& b) {
  FactorPool out(a);
  FactorPool bb(b);  // snapshot under b's lock
  for (const auto& [name, entry] : bb.entries_) {
    auto& dst = out.entries_[name];
    dst.kind = entry.kind;
    dst.exemplars.insert(entry.exemplars.begin(), entry.exemplars.end());
    dst.datasets.insert(entry.datasets.begin(), entry.datasets.end());
  }
  out.datasets_.insert(bb.datasets_.begin(), bb.datasets_.end());
  return out;
}

PoolStats FactorPool::stats() const {
  std::lock_guard lk(mu_);
  PoolStats s;
  s.categories = static_cast<int>(entries_.size());
  for (const auto& [name, entry] : entries_) {
    int n = static_cast<int>(entry.exemplars.size());
    s.per_category[name] = n;
    s.exemplars_total += n;
  }
  s.sources.assign(datasets_.begin(), datasets_.end());
  return s;
}

std::vector<std::string> FactorPool::category_names() const {
  std::lock_guard lk(mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::set<std::string> FactorPool::provenance_of(const std::string& category) const {
  std::lock_guard lk(mu_);
  auto it = entries_.find(category);
  return it == entries_.end() ? std::set<std::string>{} : it->second.datasets;
}

bool FactorPool::empty() const {
  std::lock_guard lk(mu_);
  return entries_.empty();
}

namespace {

// k distinct indices from [0, n), uniform without replacement.
std::vector<std::size_t> draw_indices(std::mt19937_64& rng, std::size_t n,
                                      std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + text::bounded(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

int draw_in_range(std::mt19937_64& rng, int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("empty sampling range");
  return lo + static_cast<int>(text::bounded(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

RecompositionSpec FactorPool::sample_spec(const std::string& image_ref,
                                          const std::optional<std::string>& metadata,
                                          const SamplingConfig& config,
                                          std::mt19937_64& rng) const {
  std::lock_guard lk(mu_);

  std::vector<const std::pair<const std::string, Entry>*> perception, reasoning;
  for (const auto& kv : entries_) {
    (kv.second.kind == FactorKind::Perception ? perception : reasoning).push_back(&kv);
  }
  if (perception.empty())
    throw InsufficientPool("pool has no perception category");

  RecompositionSpec spec;
  spec.image_ref = image_ref;
  spec.metadata = metadata;
  spec.pairs_requested = config.pairs_requested;
  spec.perception_count =
      draw_in_range(rng, config.perception_count_min, config.perception_count_max);

  int want_categories = draw_in_range(rng, config.reasoning_category_count_min,
                                      config.reasoning_category_count_max);
  if (want_categories > static_cast<int>(reasoning.size()))
    throw InsufficientPool("requested " + std::to_string(want_categories) +
                           " reasoning categories, pool has " +
                           std::to_string(reasoning.size()));

  auto sample_exemplars = [&](const Entry& entry, int k) {
    std::vector<std::string> subs;
    for (const auto& [sub, _] : entry.exemplars) subs.push_back(sub);
    std::vector<std::string> out;
    for (auto i : draw_indices(rng, subs.size(), static_cast<std::size_t>(k)))
      out.push_back(subs[i]);
    return out;
  };

  // Perception exemplars come from the union of perception categories.
  {
    std::vector<std::string> subs;
    for (const auto* kv : perception)
      for (const auto& [sub, _] : kv->second.exemplars) subs.push_back(sub);
    for (auto i : draw_indices(rng, subs.size(),
                               static_cast<std::size_t>(config.exemplars_per_category)))
      spec.perception_exemplars.push_back(subs[i]);
  }

  for (auto i : draw_indices(rng, reasoning.size(),
                             static_cast<std::size_t>(want_categories))) {
    const auto* kv = reasoning[i];
    ReasoningFactorSpec rf;
    rf.category.name = kv->first;
    rf.category.kind = kv->second.kind;
    rf.count = config.per_category_count;
    rf.exemplars = sample_exemplars(kv->second, config.exemplars_per_category);
    if (rf.exemplars.empty())
      throw InsufficientPool("category '" + kv->first + "' has no exemplars");
    spec.reasoning_factors.push_back(std::move(rf));
  }

  // Concise examples are drawn across the whole pool.
  {
    std::vector<std::string> all;
    for (const auto& [_, entry] : entries_)
      for (const auto& [sub, __] : entry.exemplars) all.push_back(sub);
    for (auto i : draw_indices(rng, all.size(),
                               static_cast<std::size_t>(config.concise_example_count)))
      spec.concise_examples.push_back(all[i]);
  }
  return spec;
}

void FactorPool::save(const std::string& path) const {
  std::lock_guard lk(mu_);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pool file: " + path);
  json header = {{"type", "header"},
                 {"seed", rng_seed_},
                 {"datasets", std::vector<std::string>(datasets_.begin(),
                                                       datasets_.end())}};
  out << header.dump() << "\n";
  for (const auto& [name, entry] : entries_) {
    for (const auto& [sub, src] : entry.exemplars) {
      // dataset provenance is per category; record the full set on each row
      json rec = {{"type", "factor"},
                  {"category", name},
                  {"kind", entry.kind == FactorKind::Perception ? "perception"
                                                                : "reasoning"},
                  {"subquestion", sub},
                  {"source_question_id", src},
                  {"dataset_id", std::vector<std::string>(entry.datasets.begin(),
                                                          entry.datasets.end())}};
      out << rec.dump() << "\n";
    }
  }
}

FactorPool FactorPool::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read pool file: " + path);
  std::string line;
  FactorPool pool;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    json j = json::parse(line);
    std::string type = j.value("type", "");
    if (type == "header") {
      pool.rng_seed_ = j.value("seed", 0ull);
      for (const auto& d : j.value("datasets", std::vector<std::string>{}))
        pool.datasets_.insert(d);
      have_header = true;
    } else if (type == "factor") {
      Factor f;
      f.category.name = j.at("category").get<std::string>();
      f.category.kind = j.value("kind", "reasoning") == "perception"
                            ? FactorKind::Perception
                            : FactorKind::Reasoning;
      f.subquestion = j.at("subquestion").get<std::string>();
      f.source_question_id = j.value("source_question_id", "");
      auto& entry = pool.entries_[f.category.name];
      entry.kind = f.category.kind;
      entry.exemplars.emplace(f.subquestion, f.source_question_id);
      if (j.contains("dataset_id")) {
        if (j["dataset_id"].is_array()) {
          for (const auto& d : j["dataset_id"])
            entry.datasets.insert(d.get<std::string>());
        } else {
          entry.datasets.insert(j["dataset_id"].get<std::string>());
        }
      }
    }
  }
  if (!have_header) throw std::runtime_error("pool file missing header: " + path);
  return pool;
}

}  // namespace cogs
