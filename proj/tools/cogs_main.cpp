#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogs/pipeline.hpp"
#include "cogs/reward_service.hpp"

using cogs::CmdResult;
using cogs::PipelineConfig;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string mock_script;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallel = 0;
  double lambda = 0;
  bool lambda_set = false;
  std::string judge;
  std::string reward_model;
};

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--config", opts.config_path, "Pipeline config file (JSON)");
  app->add_option("--mock", opts.mock_script,
                  "Scripted mock backend (JSON array of {match, response})");
  app->add_option("--seed", opts.seed, "RNG seed")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  app->add_option("--parallel", opts.parallel, "Worker count (default 4)");
  app->add_option("--lambda", opts.lambda, "Process reward weight, in (0,1)")
      ->each([&](const std::string&) { opts.lambda_set = true; });
  app->add_option("--judge", opts.judge, "deterministic | llm");
  app->add_option("--reward-model", opts.reward_model, "standard | sum | max");
}

PipelineConfig build_config(const CommonOpts& opts) {
  PipelineConfig cfg = PipelineConfig::load(opts.config_path);
  if (!opts.mock_script.empty()) cfg.mock_script_path = opts.mock_script;
  if (opts.seed_set) cfg.rng_seed = opts.seed;
  if (opts.parallel > 0) cfg.parallel = opts.parallel;
  if (opts.lambda_set) cfg.lambda = opts.lambda;
  if (!opts.judge.empty()) cfg.judge = cogs::judge_mode_from_name(opts.judge);
  if (!opts.reward_model.empty())
    cfg.reward_model = cogs::reward_model_from_name(opts.reward_model);
  return cfg;
}

int finish(const CmdResult& result) {
  std::cout << result.report_json << std::endl;
  return result.exit_code;
}

int fail(const std::string& code, const std::string& message) {
  nlohmann::json err = {{"error", code}, {"message", message}};
  std::cerr << err.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COGS: compositional question synthesis and process-reward scoring"};
  app.require_subcommand(1);

  CommonOpts opts;

  std::string seeds_path, pool_path, images_path, dataset_path, rollouts_path;
  std::string out_path, csv_path;
  int port = 8080;
  cogs::SimulateOptions sim;
  std::vector<double> lambdas;

  auto* decompose = app.add_subcommand("decompose", "Decompose seeds into a factor pool");
  decompose->add_option("--seeds", seeds_path, "Seeds JSONL")->required();
  decompose->add_option("--out", out_path, "Output pool JSONL")->required();
  add_common(decompose, opts);

  auto* synthesize = app.add_subcommand("synthesize", "Recompose factors over new images");
  synthesize->add_option("--pool", pool_path, "Factor pool JSONL")->required();
  synthesize->add_option("--images", images_path, "Image manifest JSONL")->required();
  synthesize->add_option("--out", out_path, "Output dataset JSONL")->required();
  add_common(synthesize, opts);

  auto* score = app.add_subcommand("score", "Score rollouts against a dataset");
  score->add_option("--rollouts", rollouts_path, "Rollouts JSONL")->required();
  score->add_option("--dataset", dataset_path, "Dataset JSONL")->required();
  add_common(score, opts);

  auto* serve = app.add_subcommand("serve-rewards", "Run the scoring HTTP service");
  serve->add_option("--port", port, "Listen port");
  add_common(serve, opts);

  auto* simulate = app.add_subcommand("simulate", "Reward order-preservation sweep");
  simulate->add_option("--lambda", lambdas, "Lambda grid values in (0,1)");
  simulate->add_option("--pairs", sim.pairs, "Policy pairs per lambda");
  simulate->add_option("--trials", sim.trials, "Monte Carlo trials per pair");
  simulate->add_option("--mc-pairs", sim.mc_pairs, "Pairs given Monte Carlo checks");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_flag("--shared-fail-noise", sim.shared_fail_noise,
                     "Force equal failure-noise means within each pair");
  simulate->add_option("--csv", csv_path, "Per-pair CSV output path");

  auto* stats = app.add_subcommand("stats", "Summarize a dataset");
  stats->add_option("--dataset", dataset_path, "Dataset JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (decompose->parsed()) {
      std::cerr << "decomposing " << seeds_path << "...\n";
      return finish(cogs::cmd_decompose(seeds_path, out_path, build_config(opts)));
    }
    if (synthesize->parsed()) {
      std::cerr << "synthesizing over " << images_path << "...\n";
      return finish(
          cogs::cmd_synthesize(pool_path, images_path, out_path, build_config(opts)));
    }
    if (score->parsed()) {
      return finish(cogs::cmd_score(rollouts_path, dataset_path, build_config(opts)));
    }
    if (serve->parsed()) {
      PipelineConfig cfg = build_config(opts);
      std::shared_ptr<cogs::Gateway> judge;
      if (cfg.judge == cogs::JudgeMode::LLMJudge) judge = cogs::make_gateway(cfg);
      cogs::RewardService service(judge.get());
      service.start("0.0.0.0", port);
      std::cerr << "serving rewards on port " << port << " (ctrl-c to stop)\n";
      while (service.running())
        std::this_thread::sleep_for(std::chrono::seconds(1));
      return 0;
    }
    if (simulate->parsed()) {
      if (!lambdas.empty()) sim.lambdas = lambdas;
      sim.csv_path = csv_path;
      return finish(cogs::cmd_simulate(sim));
    }
    if (stats->parsed()) {
      return finish(cogs::cmd_stats(dataset_path));
    }
  } catch (const cogs::PipelineError& e) {
    return fail(e.code, e.what());
  } catch (const std::exception& e) {
    return fail("Error", e.what());
  }
  return 0;
}
