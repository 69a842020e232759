#include "cogs/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cogs/order_sim.hpp"
#include "cogs/recompose.hpp"
#include "cogs/text.hpp"

namespace cogs {

using nlohmann::json;

PipelineConfig PipelineConfig::load(const std::string& config_path) {
  PipelineConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw PipelineError("ConfigNotFound", "cannot read " + config_path);
    json j = json::parse(in);
    if (j.contains("gateway")) {
      const auto& g = j["gateway"];
      cfg.gateway.endpoint = g.value("endpoint", "");
      cfg.gateway.api_key = g.value("api_key", "");
      cfg.gateway.model_id = g.value("model_id", "");
      cfg.gateway.max_concurrent = g.value("max_concurrent", 4);
    }
    cfg.mock_script_path = j.value("mock_script", "");
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      cfg.sampling.perception_count_min = s.value("perception_count_min", 1);
      cfg.sampling.perception_count_max = s.value("perception_count_max", 3);
      cfg.sampling.reasoning_category_count_min =
          s.value("reasoning_category_count_min", 1);
      cfg.sampling.reasoning_category_count_max =
          s.value("reasoning_category_count_max", 3);
      cfg.sampling.exemplars_per_category = s.value("exemplars_per_category", 3);
      cfg.sampling.concise_example_count = s.value("concise_example_count", 3);
      cfg.sampling.pairs_requested = s.value("pairs_requested", 5);
    }
    cfg.lambda = j.value("lambda", 0.5);
    if (j.contains("judge")) cfg.judge = judge_mode_from_name(j["judge"]);
    if (j.contains("reward_model"))
      cfg.reward_model = reward_model_from_name(j["reward_model"]);
    cfg.rng_seed = j.value("rng_seed", 0ull);
    cfg.parallel = j.value("parallel", 4);
    cfg.retry_max_attempts = j.value("retry_max_attempts", 3);
  }
  cfg.gateway = GatewayConfig::from_env(cfg.gateway);
  return cfg;
}

std::vector<MockEntry> load_mock_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("ConfigNotFound", "cannot read mock script " + path);
  json j = json::parse(in);
  std::vector<MockEntry> script;
  for (const auto& e : j) {
    MockEntry entry;
    entry.matcher = e.at("match").get<std::string>();
    entry.response = e.value("response", "");
    entry.error = e.value("error", "");
    script.push_back(std::move(entry));
  }
  return script;
}

std::shared_ptr<Gateway> make_gateway(const PipelineConfig& config) {
  if (!config.mock_script_path.empty())
    return register_mock(load_mock_script(config.mock_script_path));
  return std::make_shared<HttpGateway>(config.gateway);
}

std::vector<SeedQuestion> read_seeds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("InputNotFound", "cannot read seeds " + path);
  std::vector<SeedQuestion> seeds;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    json j = json::parse(line);
    SeedQuestion s;
    s.id = j.at("id").get<std::string>();
    s.image_ref = j.at("image").get<std::string>();
    s.question_text = j.at("question").get<std::string>();
    std::string domain = text::lower(j.value("domain", "chart"));
    s.domain = (domain == "web" || domain == "webgui") ? Domain::WebGUI : Domain::Chart;
    if (j.contains("metadata")) s.metadata_ref = j["metadata"].get<std::string>();
    seeds.push_back(std::move(s));
  }
  if (seeds.empty()) throw PipelineError("EmptyInput", "no seeds in " + path);
  return seeds;
}

std::vector<ImageEntry> read_image_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("InputNotFound", "cannot read manifest " + path);
  std::vector<ImageEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    json j = json::parse(line);
    ImageEntry e;
    e.image = j.at("image").get<std::string>();
    if (j.contains("metadata")) e.metadata = j["metadata"].get<std::string>();
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw PipelineError("EmptyInput", "no images in " + path);
  return entries;
}

namespace {

std::string dataset_id_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::string now_utc() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Ordered parallel map: results land in input order regardless of worker
// interleaving, so outputs stay deterministic.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  int count = std::min<int>(workers, static_cast<int>(n));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

CmdResult cmd_decompose(const std::string& seeds_path, const std::string& out_pool_path,
                        const PipelineConfig& config) {
  auto seeds = read_seeds(seeds_path);
  auto gateway = make_gateway(config);
  std::string dataset_id = dataset_id_from_path(seeds_path);

  RetryPolicy retry;
  retry.max_attempts = config.retry_max_attempts;

  FactorPool pool(config.rng_seed);
  std::vector<std::string> failures(seeds.size());
  std::vector<int> ok(seeds.size(), 0);
  std::vector<std::vector<std::string>> unknown(seeds.size());

  parallel_for(seeds.size(), config.parallel, [&](std::size_t i) {
    try {
      FactorizedQuestion fq = decompose(seeds[i], *gateway, retry);
      for (const auto& f : fq.factors)
        if (!f.category.known) unknown[i].push_back(f.category.name);
      pool.add(fq, dataset_id);
      ok[i] = 1;
    } catch (const std::exception& e) {
      failures[i] = seeds[i].id + ": " + e.what();
    }
  });

  pool.save(out_pool_path);

  PoolStats stats = pool.stats();
  json report;
  report["command"] = "decompose";
  report["dataset_id"] = dataset_id;
  report["seeds"] = seeds.size();
  report["decomposed"] = std::count(ok.begin(), ok.end(), 1);
  json fails = json::array();
  for (const auto& f : failures)
    if (!f.empty()) fails.push_back(f);
  report["parse_failures"] = std::move(fails);
  report["categories"] = stats.per_category;
  json unk = json::array();
  for (const auto& us : unknown)
    for (const auto& u : us) unk.push_back(u);
  report["unknown_categories"] = std::move(unk);
  json domains = json::array();
  for (const auto& s : seeds)
    domains.push_back(s.domain == Domain::Chart ? "chart" : "web");
  report["domains"] = std::move(domains);
  report["pool_path"] = out_pool_path;

  CmdResult result;
  result.exit_code = pool.empty() ? 1 : 0;
  result.report_json = report.dump(2);
  return result;
}

CmdResult cmd_synthesize(const std::string& pool_path, const std::string& images_path,
                         const std::string& out_dataset,
                         const PipelineConfig& config) {
  FactorPool pool = FactorPool::load(pool_path);
  auto images = read_image_manifest(images_path);
  auto gateway = make_gateway(config);
  bool mock = !config.mock_script_path.empty();

  RetryPolicy retry;
  retry.max_attempts = config.retry_max_attempts;

  json pool_header = {{"seed", pool.rng_seed()}, {"datasets", pool.stats().sources}};
  json config_snapshot = {{"rng_seed", config.rng_seed},
                          {"lambda", config.lambda},
                          {"pairs_requested", config.sampling.pairs_requested}};
  StoreManifest manifest;
  manifest.created_at = mock ? "1970-01-01T00:00:00Z" : now_utc();
  manifest.pool_header = pool_header.dump();
  manifest.config_snapshot = config_snapshot.dump();
  DatasetStore store(manifest);

  std::vector<std::vector<SynthesizedSample>> per_image(images.size());
  std::vector<std::string> skips(images.size());

  parallel_for(images.size(), config.parallel, [&](std::size_t i) {
    // per-image generator keyed on (seed, index): stable under reordering
    std::mt19937_64 rng(config.rng_seed * 0x9e3779b97f4a7c15ull + i + 1);
    try {
      RecompositionSpec spec =
          pool.sample_spec(images[i].image, images[i].metadata, config.sampling, rng);
      per_image[i] = synthesize(spec, *gateway, retry);
    } catch (const std::exception& e) {
      skips[i] = images[i].image + ": " + e.what();
    }
  });

  int accepted = 0;
  for (const auto& samples : per_image)
    for (const auto& s : samples)
      if (store.append(s)) ++accepted;

  store.save(out_dataset);
  StoreStats stats = store.stats();

  json report;
  report["command"] = "synthesize";
  report["images"] = images.size();
  report["accepted"] = accepted;
  report["dedup_rejections"] = stats.dedup_rejections;
  json skipped = json::array();
  for (const auto& s : skips)
    if (!s.empty()) skipped.push_back(s);
  report["skipped"] = std::move(skipped);
  json hist = json::object();
  for (const auto& [k, v] : stats.factor_count_histogram)
    hist[std::to_string(k)] = v;
  report["factor_count_histogram"] = std::move(hist);
  report["dataset_path"] = out_dataset;

  CmdResult result;
  result.exit_code = accepted > 0 ? 0 : 1;
  result.report_json = report.dump(2);
  return result;
}

CmdResult cmd_score(const std::string& rollouts_path, const std::string& dataset_path,
                    const PipelineConfig& config) {
  DatasetStore store = DatasetStore::load(dataset_path);
  std::ifstream in(rollouts_path);
  if (!in) throw PipelineError("InputNotFound", "cannot read rollouts " + rollouts_path);
  std::vector<std::string> rollouts;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    json j = json::parse(line);
    rollouts.push_back(j.at("rollout").get<std::string>());
  }
  if (rollouts.empty())
    throw PipelineError("EmptyInput", "no rollouts in " + rollouts_path);
  if (rollouts.size() > store.records().size())
    throw PipelineError("InputMismatch", "more rollouts than dataset records");

  std::shared_ptr<Gateway> gateway;
  if (config.judge == JudgeMode::LLMJudge) gateway = make_gateway(config);

  std::vector<RewardRequest> requests;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const auto& rec = store.records()[i];
    RewardRequest req;
    req.rollout_text = rollouts[i];
    req.ground_truth_final = rec.final_answer;
    for (const auto& item : rec.sub_items)
      req.sub_items.push_back({item.subquestion, item.subanswer});
    req.lambda = config.lambda;
    req.model_kind = config.reward_model;
    req.judge_mode = config.judge;
    requests.push_back(std::move(req));
  }
  auto results = score_batch(requests, gateway.get());

  json items = json::array();
  double total = 0;
  int scored = 0;
  for (const auto& r : results) {
    if (r.score) {
      items.push_back({{"r_final", r.score->r_final},
                       {"c", r.score->c},
                       {"r_sub", r.score->r_sub},
                       {"reward", r.score->reward}});
      total += r.score->reward;
      ++scored;
    } else {
      items.push_back({{"error", r.error}});
    }
  }
  json report = {{"command", "score"},
                 {"items", std::move(items)},
                 {"scored", scored},
                 {"mean_reward", scored ? total / scored : 0.0},
                 {"reward_model", reward_model_name(config.reward_model)},
                 {"lambda", config.lambda}};
  CmdResult result;
  result.exit_code = scored > 0 ? 0 : 1;
  result.report_json = report.dump(2);
  return result;
}

CmdResult cmd_simulate(const SimulateOptions& options) {
  SweepSummary sweep = sweep_order_preservation(options.lambdas, options.pairs,
                                                options.shared_fail_noise,
                                                options.seed);

  // Monte Carlo spot checks on a handful of random pairs per lambda.
  std::ofstream csv;
  if (!options.csv_path.empty()) {
    csv.open(options.csv_path);
    csv << "lambda,delta_vf,analytic_delta_max,empirical_delta_max,"
           "empirical_delta_max_stderr,analytic_delta_sum,empirical_delta_sum,"
           "empirical_delta_sum_stderr,max_order_preserved,sum_order_preserved\n";
  }
  long mc_checked = 0, mc_max_within_3se = 0, mc_sum_within_3se = 0;
  std::uint64_t state = options.seed ^ 0xabcdef1234567890ull;
  auto draw_unit = [&state]() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
  };
  for (double lambda : options.lambdas) {
    for (int i = 0; i < options.mc_pairs; ++i) {
      PolicySpec a, b;
      a.v_f = draw_unit();
      b.v_f = draw_unit();
      a.eps_mean_fail = draw_unit();
      b.eps_mean_fail =
          options.shared_fail_noise ? a.eps_mean_fail : draw_unit();
      a.alpha = b.alpha = 0.0;
      a.eps_mean_success = draw_unit();
      b.eps_mean_success = draw_unit();
      a.eps_family = b.eps_family = EpsFamily::UniformOnAdmissibleInterval;
      OrderingReport rep =
          simulate_pair(a, b, lambda, options.trials, options.seed + i);
      ++mc_checked;
      if (std::fabs(rep.empirical_delta_max - rep.analytic_delta_max) <=
          3 * rep.empirical_delta_max_stderr)
        ++mc_max_within_3se;
      if (std::fabs(rep.empirical_delta_sum - rep.analytic_delta_sum) <=
          3 * rep.empirical_delta_sum_stderr)
        ++mc_sum_within_3se;
      if (csv.is_open()) {
        csv << lambda << ',' << rep.delta_vf << ',' << rep.analytic_delta_max << ','
            << rep.empirical_delta_max << ',' << rep.empirical_delta_max_stderr << ','
            << rep.analytic_delta_sum << ',' << rep.empirical_delta_sum << ','
            << rep.empirical_delta_sum_stderr << ',' << rep.max_order_preserved << ','
            << rep.sum_order_preserved << "\n";
      }
    }
  }

  json report = {{"command", "simulate"},
                 {"lambdas", options.lambdas},
                 {"shared_fail_noise", options.shared_fail_noise},
                 {"pairs_tested", sweep.pairs_tested},
                 {"max_violations", sweep.max_violations},
                 {"sum_violations", sweep.sum_violations},
                 {"mc_pairs_checked", mc_checked},
                 {"mc_max_within_3se", mc_max_within_3se},
                 {"mc_sum_within_3se", mc_sum_within_3se},
                 {"trials", options.trials},
                 {"seed", options.seed}};
  CmdResult result;
  result.report_json = report.dump(2);
  return result;
}

CmdResult cmd_stats(const std::string& dataset_path) {
  DatasetStore store = DatasetStore::load(dataset_path);
  StoreStats stats = store.stats();
  json hist = json::object();
  for (const auto& [k, v] : stats.factor_count_histogram)
    hist[std::to_string(k)] = v;
  json report = {{"command", "stats"},
                 {"total", stats.total},
                 {"factor_count_histogram", std::move(hist)},
                 {"category_frequency", stats.category_frequency},
                 {"dedup_rejections", stats.dedup_rejections}};
  CmdResult result;
  result.report_json = report.dump(2);
  return result;
}

}  // namespace cogs
