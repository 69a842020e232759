#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cogs/dataset_store.hpp"
#include "cogs/factor_pool.hpp"
#include "cogs/gateway.hpp"
#include "cogs/reward.hpp"

namespace cogs {

struct PipelineError : std::runtime_error {
  std::string code;
  PipelineError(std::string code_, const std::string& msg)
      : std::runtime_error(msg), code(std::move(code_)) {}
};

struct PipelineConfig {
  GatewayConfig gateway;
  std::string mock_script_path;  // scripted backend when non-empty
  SamplingConfig sampling;
  double lambda = 0.5;
  JudgeMode judge = JudgeMode::DeterministicMatch;
  RewardModelKind reward_model = RewardModelKind::ProcessRM_max;
  std::uint64_t rng_seed = 0;
  int parallel = 4;
  int retry_max_attempts = 3;

  // flag > env > config file > default is applied by the CLI layer;
  // this loads the config-file + env tiers.
  static PipelineConfig load(const std::string& config_path = "");
};

std::vector<MockEntry> load_mock_script(const std::string& path);
std::shared_ptr<Gateway> make_gateway(const PipelineConfig& config);

std::vector<SeedQuestion> read_seeds(const std::string& path);

struct ImageEntry {
  std::string image;
  std::optional<std::string> metadata;
};
std::vector<ImageEntry> read_image_manifest(const std::string& path);

struct CmdResult {
  int exit_code = 0;
  std::string report_json;  // machine-readable report (stdout)
};

CmdResult cmd_decompose(const std::string& seeds_path, const std::string& out_pool_path,
                        const PipelineConfig& config);

CmdResult cmd_synthesize(const std::string& pool_path, const std::string& images_path,
                         const std::string& out_dataset, const PipelineConfig& config);

CmdResult cmd_score(const std::string& rollouts_path, const std::string& dataset_path,
                    const PipelineConfig& config);

struct SimulateOptions {
  std::vector<double> lambdas{0.5};
  int pairs = 1000;
  long trials = 100000;
  int mc_pairs = 20;
  bool shared_fail_noise = false;
  std::uint64_t seed = 42;
  std::string csv_path;  // optional per-pair CSV
};
CmdResult cmd_simulate(const SimulateOptions& options);

CmdResult cmd_stats(const std::string& dataset_path);

}  // namespace cogs
