#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogs {

struct AssumptionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EpsFamily { PointMass, UniformOnAdmissibleInterval };

// Abstract policy for the reward simulator: final-answer rate, shaping
// slope, and conditional noise means of the sub-reward
// r_sub = alpha * r_final + eps.
struct PolicySpec {
  double v_f = 0.5;               // E[r_final]
  double alpha = 0.0;             // shaping slope
  double eps_mean_fail = 0.0;     // E[eps | r_final = 0], in [0,1]
  double eps_mean_success = 0.0;  // E[eps | r_final = 1], in [-alpha, 1-alpha]
  EpsFamily eps_family = EpsFamily::PointMass;

  void check() const;
};

struct OrderingReport {
  double delta_vf = 0;
  double analytic_delta_max = 0;
  double analytic_delta_sum = 0;
  double empirical_delta_max = 0;
  double empirical_delta_max_stderr = 0;
  double empirical_delta_sum = 0;
  double empirical_delta_sum_stderr = 0;
  bool max_order_preserved = false;
  bool sum_order_preserved = false;
  long trials = 0;
  std::uint64_t seed = 0;
};

struct SweepSummary {
  long pairs_tested = 0;
  long max_violations = 0;
  long sum_violations = 0;
};

inline constexpr double kTieMargin = 1e-6;

// E[r_max | pi] = (1 - lambda*c) * V_f + lambda*c with c = E[eps | fail].
double expected_max_reward(const PolicySpec& policy, double lambda);

// E[r_sum | pi] = V_f + lambda * (alpha * V_f + E[eps]).
double expected_sum_reward(const PolicySpec& policy, double lambda);

// Per-draw outcome; also used by the identity property tests.
struct Draw {
  int r_final = 0;
  double r_sub = 0;
  double r_max = 0;
  double r_sum = 0;
};
Draw draw_once(const PolicySpec& policy, double lambda, std::uint64_t& state);

OrderingReport simulate_pair(const PolicySpec& a, const PolicySpec& b, double lambda,
                             long trials, std::uint64_t seed);

SweepSummary sweep_order_preservation(const std::vector<double>& lambda_grid,
                                      int policy_count, bool shared_fail_noise,
                                      std::uint64_t seed);

std::optional<std::pair<PolicySpec, PolicySpec>> find_sum_counterexample(
    double lambda);

}  // namespace cogs
