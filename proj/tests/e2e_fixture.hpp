// Shared scripted-backend fixture for the pipeline tests: four chart seed
// questions, two target images, and a mock script whose responses replay the
// decomposition exemplars and two synthesized question blocks.
#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogs/pipeline.hpp"

namespace e2e {

inline const char* kExemplarLines[4] = {
    "(Question: How many times has the satisfied rate been above 25%?) = "
    "(identification: satisfied rate of each year) + (comparison: each instance "
    "> 25%) + (count: number of instances where satisfied rate > 25%)",

    "(Question: Is the following statement True or False? Gen X has experienced "
    "a steeper population increase than baby boomers did between 1990 and "
    "2015.) = (identification: Gen X's population increase curve) + "
    "(identification: baby boomers' increase curve) + (comparison: which one "
    "has a steeper curve) + (fact checking: given the finding from the previous "
    "step, is the statement true?)",

    "(Question: if a multi-college district served 10,000 students, how many "
    "students were determined eligible using EFC criteria?) = (identification: "
    "percentage of students determined eligible using EFC criteria in a "
    "multi-college district) + (calculation: number of students based on that "
    "percentage)",

    "(Question: if the actual Avg ACA Premium in 2017 had turned out to be "
    "$5,000, and the +30% label accurately reflected the difference compared to "
    "the Low Est. projection for that hypothetical $5,000 value, what would be "
    "the implied Avg Individual Mrkt Premium Without ACA - Low Est. - in 2017?) "
    "= (identification: Avg ACA Premium in 2017) + (identification: +30% label "
    "that reflects the difference of Avg ACA Premium in 2017 compared to Low "
    "Est.) + (calculation: implied Low Est. value based on the given 30% "
    "difference and hypothetical $5,000 ACA Premium)",
};

inline const char* kSeedQuestions[4] = {
    "How many times has the satisfied rate been above 25%?",
    "Is the following statement True or False? Gen X has experienced a steeper "
    "population increase than baby boomers did between 1990 and 2015.",
    "if a multi-college district served 10,000 students, how many students were "
    "determined eligible using EFC criteria?",
    "if the actual Avg ACA Premium in 2017 had turned out to be $5,000, and the "
    "+30% label accurately reflected the difference compared to the Low Est. "
    "projection for that hypothetical $5,000 value, what would be the implied "
    "Avg Individual Mrkt Premium Without ACA - Low Est. - in 2017?",
};

// One synthesized record with a three-step reasoning trace; the pipeline
// fixtures pin the sampled spec to 2 perception + 1 reasoning factors.
inline std::string three_step_record(int idx, const std::string& label) {
  std::string a = std::to_string(10 + idx);
  std::string b = std::to_string(3 + idx);
  return "  " + std::to_string(idx) + ": {\n" +
         "    \"Question\": \"What is the value of " + label + " A at point " +
         std::to_string(idx) + ", what is the value of " + label +
         " B, and what is their difference?\",\n" +
         "    \"Concise question\": \"What is the difference between " + label +
         " A and B at point " + std::to_string(idx) + "?\",\n" +
         "    \"Answer\": \"Step 1: " + label + " A's value is " + a +
         ". Step 2: " + label + " B's value is " + b +
         ". Step 3: The difference is " + a + " - " + b + " = 7.\",\n" +
         "    \"Final Answer\": \"7\"\n  }";
}

inline std::string five_record_block(const std::string& label) {
  std::string block = "{\n";
  for (int i = 1; i <= 5; ++i) {
    block += three_step_record(i, label);
    block += i < 5 ? ",\n" : "\n";
  }
  block += "}";
  return block;
}

struct Workspace {
  std::filesystem::path root;
  std::filesystem::path seeds = "";
  std::filesystem::path images = "";
  std::filesystem::path mock = "";
  std::filesystem::path image_files[2];

  explicit Workspace(const std::string& tag) {
    root = std::filesystem::temp_directory_path() /
           ("cogs_e2e_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(root);

    for (int i = 0; i < 2; ++i) {
      image_files[i] = root / ("chart" + std::to_string(i + 1) + ".png");
      std::ofstream img(image_files[i], std::ios::binary);
      img << "\x89PNG fake chart " << i;
    }

    seeds = root / "seeds.jsonl";
    {
      std::ofstream out(seeds);
      for (int i = 0; i < 4; ++i) {
        nlohmann::json j = {{"id", "seed-" + std::to_string(i + 1)},
                            {"image", image_files[i % 2].string()},
                            {"question", kSeedQuestions[i]},
                            {"domain", "chart"}};
        out << j.dump() << "\n";
      }
    }

    images = root / "images.jsonl";
    {
      std::ofstream out(images);
      nlohmann::json j1 = {{"image", image_files[0].string()}};
      nlohmann::json j2 = {{"image", image_files[1].string()},
                           {"metadata", "Sector,Share\nTechnology,23.7\nFinance,21.1"}};
      out << j1.dump() << "\n" << j2.dump() << "\n";
    }

    mock = root / "mock.json";
    {
      nlohmann::json script = nlohmann::json::array();
      // decomposition responses, consumed in seed order (parallel = 1)
      for (int i = 0; i < 4; ++i)
        script.push_back({{"match", "decompose"}, {"response", kExemplarLines[i]}});
      // synthesis responses, consumed in image order
      script.push_back({{"match", "Generate Now"},
                        {"response", five_record_block("series")}});
      script.push_back({{"match", "Generate Now"},
                        {"response", five_record_block("metric")}});
      std::ofstream out(mock);
      out << script.dump(2);
    }
  }

  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
  }

  // Scripted-backend config with a pinned 2-perception + 1-reasoning spec so
  // the mock responses always match the sampled factor total of 3.
  cogs::PipelineConfig config(std::uint64_t seed = 7) const {
    cogs::PipelineConfig cfg;
    cfg.mock_script_path = mock.string();
    cfg.rng_seed = seed;
    cfg.parallel = 1;  // keeps scripted response consumption in input order
    cfg.sampling.perception_count_min = 2;
    cfg.sampling.perception_count_max = 2;
    cfg.sampling.reasoning_category_count_min = 1;
    cfg.sampling.reasoning_category_count_max = 1;
    return cfg;
  }

  std::filesystem::path path(const std::string& name) const { return root / name; }
};

inline std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace e2e
