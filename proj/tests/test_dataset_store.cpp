#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogs/dataset_store.hpp"
#include "cogs/text.hpp"

using namespace cogs;

namespace {

SynthesizedSample make_sample(const std::string& image, const std::string& concise,
                              int n_sub_items = 3) {
  SynthesizedSample s;
  s.image_ref = image;
  s.detailed_question = "detailed form of: " + concise;
  s.concise_question = concise;
  s.reasoning_trace = "Step 1: value is 4. Step 2: value is 1. Step 3: 4 - 1 = 3.";
  s.final_answer = "3";
  for (int i = 0; i < n_sub_items; ++i) {
    SubItem item;
    item.category = make_category(i == 0 ? "identification" : "calculation");
    item.subquestion = "sub " + std::to_string(i);
    item.subanswer = std::to_string(i + 1);
    s.sub_items.push_back(std::move(item));
  }
  return s;
}

DatasetStore store_of(int n) {
  DatasetStore store;
  for (int i = 0; i < n; ++i)
    store.append(make_sample("img-" + std::to_string(i % 7) + ".png",
                             "What is value number " + std::to_string(i) + "?"));
  return store;
}

std::filesystem::path temp_file(const std::string& stem) {
  return std::filesystem::temp_directory_path() /
         (stem + "_" + std::to_string(::getpid()) + ".jsonl");
}

}  // namespace

TEST_CASE("fresh samples append") {
  DatasetStore store;
  CHECK(store.append(make_sample("a.png", "What is A?")));
  CHECK(store.records().size() == 1);
}

TEST_CASE("identical concise question on the same image is rejected") {
  DatasetStore store;
  CHECK(store.append(make_sample("a.png", "What is A?")));
  CHECK_FALSE(store.append(make_sample("a.png", "What is A?")));
  CHECK(store.records().size() == 1);
  CHECK(store.stats().dedup_rejections == 1);
}

TEST_CASE("dedup is insensitive to case, whitespace, and trailing punctuation") {
  DatasetStore store;
  CHECK(store.append(make_sample("a.png", "What is A?")));
  CHECK_FALSE(store.append(make_sample("a.png", "  what   is a ")));
}

TEST_CASE("same concise question on a different image is accepted") {
  DatasetStore store;
  CHECK(store.append(make_sample("a.png", "What is A?")));
  CHECK(store.append(make_sample("b.png", "What is A?")));
  CHECK(store.records().size() == 2);
}

TEST_CASE("contains uses the normalized key") {
  DatasetStore store;
  store.append(make_sample("a.png", "What is A?"));
  CHECK(store.contains("a.png", text::normalize_question("What is A?")));
  CHECK_FALSE(store.contains("b.png", text::normalize_question("What is A?")));
}

TEST_CASE("100 records split 90/10 deterministically") {
  DatasetStore store = store_of(100);
  auto split_a = store.split({{"train", 0.9}, {"eval", 0.1}}, 7);
  REQUIRE(split_a.count("train"));
  REQUIRE(split_a.count("eval"));
  CHECK(split_a["train"].size() == 90);
  CHECK(split_a["eval"].size() == 10);

  auto split_b = store.split({{"train", 0.9}, {"eval", 0.1}}, 7);
  CHECK(split_a == split_b);
}

TEST_CASE("splits are disjoint and exhaustive") {
  DatasetStore store = store_of(101);
  auto split = store.split({{"train", 0.7}, {"dev", 0.2}, {"eval", 0.1}}, 11);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto& [name, ids] : split) {
    total += ids.size();
    for (std::size_t id : ids) CHECK(seen.insert(id).second);
  }
  CHECK(total == 101);
}

TEST_CASE("a single full-weight split covers the whole store") {
  DatasetStore store = store_of(9);
  auto split = store.split({{"all", 1.0}}, 1);
  REQUIRE(split.size() == 1);
  CHECK(split["all"].size() == 9);
}

TEST_CASE("splitting an empty store is an error") {
  DatasetStore store;
  CHECK_THROWS_AS(store.split({{"train", 1.0}}, 1), EmptyStore);
}

TEST_CASE("split weights must be positive") {
  DatasetStore store = store_of(3);
  CHECK_THROWS_AS(store.split({{"train", 0.0}}, 1), std::invalid_argument);
}

TEST_CASE("split determinism and disjointness over random stores") {
  std::mt19937_64 rng(5150);
  for (int iter = 0; iter < 25; ++iter) {
    int n = 1 + static_cast<int>(rng() % 40);
    DatasetStore store = store_of(n);
    std::uint64_t seed = rng();
    auto a = store.split({{"train", 0.8}, {"eval", 0.2}}, seed);
    auto b = store.split({{"train", 0.8}, {"eval", 0.2}}, seed);
    CHECK(a == b);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& [_, ids] : a) {
      total += ids.size();
      for (std::size_t id : ids) CHECK(seen.insert(id).second);
    }
    CHECK(total == static_cast<std::size_t>(n));
  }
}

TEST_CASE("exported rows carry prompt, image, ground truth, and sub_items") {
  DatasetStore store;
  store.append(make_sample("a.png", "What is the difference between A and B?", 3));
  auto path = temp_file("cogs_export");
  CHECK(store.export_trainer_format({0}, path.string()) == 1);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  auto row = nlohmann::json::parse(line);
  CHECK(row.at("image") == "a.png");
  CHECK(row.at("ground_truth") == "3");
  CHECK(row.at("sub_items").size() == 3);
  std::string prompt = row.at("prompt").get<std::string>();
  CHECK(prompt.find("The answer is X") != std::string::npos);
  CHECK(prompt.find("Question: What is the difference between A and B?") !=
        std::string::npos);
  CHECK_FALSE(std::getline(in, line));
  std::filesystem::remove(path);
}

TEST_CASE("unwritable export path raises StorageError") {
  DatasetStore store = store_of(1);
  CHECK_THROWS_AS(
      store.export_trainer_format({0}, "/no/such/dir/out.jsonl"), StorageError);
}

TEST_CASE("empty store stats are zeros") {
  DatasetStore store;
  StoreStats s = store.stats();
  CHECK(s.total == 0);
  CHECK(s.factor_count_histogram.empty());
  CHECK(s.category_frequency.empty());
  CHECK(s.dedup_rejections == 0);
}

TEST_CASE("factor-count histogram counts records by sub_item size") {
  DatasetStore store;
  store.append(make_sample("a.png", "q1?", 3));
  store.append(make_sample("a.png", "q2?", 5));
  StoreStats s = store.stats();
  CHECK(s.total == 2);
  CHECK(s.factor_count_histogram == std::map<int, int>{{3, 1}, {5, 1}});
  CHECK(s.category_frequency.at("identification") == 2);
  CHECK(s.category_frequency.at("calculation") == 6);
}

TEST_CASE("save and load preserve records, manifest, and stats") {
  StoreManifest manifest;
  manifest.created_at = "1970-01-01T00:00:00Z";
  manifest.pool_header = R"({"seed":3})";
  manifest.config_snapshot = R"({"lambda":0.5})";
  DatasetStore store(manifest);
  store.append(make_sample("a.png", "What is A?", 2));
  store.append(make_sample("b.png", "What is B?", 4));
  store.append(make_sample("a.png", "What is A?"));  // dedup rejection

  auto path = temp_file("cogs_store_roundtrip");
  store.save(path.string());
  DatasetStore loaded = DatasetStore::load(path.string());

  StoreStats before = store.stats();
  StoreStats after = loaded.stats();
  CHECK(after.total == before.total);
  CHECK(after.factor_count_histogram == before.factor_count_histogram);
  CHECK(after.category_frequency == before.category_frequency);
  CHECK(after.dedup_rejections == before.dedup_rejections);
  CHECK(loaded.manifest().created_at == "1970-01-01T00:00:00Z");
  REQUIRE(loaded.records().size() == 2);
  CHECK(loaded.records()[0].concise_question == "What is A?");
  CHECK(loaded.records()[1].sub_items.size() == 4);
  std::filesystem::remove(path);
}

TEST_CASE("sample JSON round-trips every field") {
  SynthesizedSample s = make_sample("img.png", "What is A?", 2);
  s.spec_fingerprint = "deadbeef";
  s.metadata_used = true;
  SynthesizedSample back = sample_from_json(sample_to_json(s));
  CHECK(back.image_ref == s.image_ref);
  CHECK(back.detailed_question == s.detailed_question);
  CHECK(back.concise_question == s.concise_question);
  CHECK(back.reasoning_trace == s.reasoning_trace);
  CHECK(back.final_answer == s.final_answer);
  CHECK(back.spec_fingerprint == "deadbeef");
  CHECK(back.metadata_used);
  REQUIRE(back.sub_items.size() == 2);
  CHECK(back.sub_items[1].category.name == s.sub_items[1].category.name);
  CHECK(back.sub_items[1].subanswer == s.sub_items[1].subanswer);
}

TEST_CASE("reload equivalence over random stores") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 15; ++iter) {
    DatasetStore store = store_of(1 + static_cast<int>(rng() % 25));
    auto path = temp_file("cogs_store_prop_" + std::to_string(iter));
    store.save(path.string());
    DatasetStore loaded = DatasetStore::load(path.string());
    StoreStats a = store.stats();
    StoreStats b = loaded.stats();
    CHECK(a.total == b.total);
    CHECK(a.factor_count_histogram == b.factor_count_histogram);
    CHECK(a.category_frequency == b.category_frequency);
    std::filesystem::remove(path);
  }
}
