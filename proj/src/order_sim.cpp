#include "cogs/order_sim.hpp"

#include <algorithm>
#include <cmath>

namespace cogs {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw AssumptionViolated("lambda must be in (0,1)");
}

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace

void PolicySpec::check() const {
  if (v_f < 0 || v_f > 1) throw AssumptionViolated("v_f outside [0,1]");
  if (alpha < 0 || alpha > 1) throw AssumptionViolated("alpha outside [0,1]");
  if (eps_mean_fail < 0 || eps_mean_fail > 1)
    throw AssumptionViolated("eps_mean_fail outside [0,1]");
  if (eps_mean_success < -alpha || eps_mean_success > 1 - alpha)
    throw AssumptionViolated("eps_mean_success outside [-alpha, 1-alpha]");
}

double expected_max_reward(const PolicySpec& policy, double lambda) {
  check_lambda(lambda);
  policy.check();
  double c = policy.eps_mean_fail;
  if (!(lambda * c < 1.0)) throw AssumptionViolated("lambda * c must be < 1");
  return (1.0 - lambda * c) * policy.v_f + lambda * c;
}

double expected_sum_reward(const PolicySpec& policy, double lambda) {
  check_lambda(lambda);
  policy.check();
  double eps_mean = policy.eps_mean_success * policy.v_f +
                    policy.eps_mean_fail * (1.0 - policy.v_f);
  return policy.v_f + lambda * (policy.alpha * policy.v_f + eps_mean);
}

Draw draw_once(const PolicySpec& policy, double lambda, std::uint64_t& state) {
  Draw d;
  d.r_final = uniform01(state) < policy.v_f ? 1 : 0;
  double mean = d.r_final ? policy.eps_mean_success : policy.eps_mean_fail;
  double eps = mean;
  if (policy.eps_family == EpsFamily::UniformOnAdmissibleInterval) {
    double lo = d.r_final ? -policy.alpha : 0.0;
    double hi = d.r_final ? 1.0 - policy.alpha : 1.0;
    double halfwidth = std::min(mean - lo, hi - mean);
    eps = mean + (2.0 * uniform01(state) - 1.0) * halfwidth;
  }
  d.r_sub = policy.alpha * d.r_final + eps;
  d.r_max = std::max(static_cast<double>(d.r_final), lambda * d.r_sub);
  d.r_sum = static_cast<double>(d.r_final) + lambda * d.r_sub;
  return d;
}

namespace {

struct Moments {
  double mean_max = 0, var_max = 0, mean_sum = 0, var_sum = 0;
};

Moments run_trials(const PolicySpec& policy, double lambda, long trials,
                   std::uint64_t& state) {
  double sm = 0, sm2 = 0, ss = 0, ss2 = 0;
  for (long t = 0; t < trials; ++t) {
    Draw d = draw_once(policy, lambda, state);
    sm += d.r_max;
    sm2 += d.r_max * d.r_max;
    ss += d.r_sum;
    ss2 += d.r_sum * d.r_sum;
  }
  Moments m;
  double n = static_cast<double>(trials);
  m.mean_max = sm / n;
  m.mean_sum = ss / n;
  if (trials > 1) {
    m.var_max = std::max(0.0, (sm2 - sm * sm / n) / (n - 1));
    m.var_sum = std::max(0.0, (ss2 - ss * ss / n) / (n - 1));
  }
  return m;
}

}  // namespace

OrderingReport simulate_pair(const PolicySpec& a, const PolicySpec& b, double lambda,
                             long trials, std::uint64_t seed) {
  check_lambda(lambda);
  a.check();
  b.check();
  if (trials < 1) throw AssumptionViolated("trials must be >= 1");

  OrderingReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.delta_vf = a.v_f - b.v_f;
  rep.analytic_delta_max = expected_max_reward(a, lambda) - expected_max_reward(b, lambda);
  rep.analytic_delta_sum = expected_sum_reward(a, lambda) - expected_sum_reward(b, lambda);

  std::uint64_t state_a = seed * 0x9e3779b97f4a7c15ull + 1;
  std::uint64_t state_b = seed * 0xc2b2ae3d27d4eb4full + 2;
  Moments ma = run_trials(a, lambda, trials, state_a);
  Moments mb = run_trials(b, lambda, trials, state_b);
  double n = static_cast<double>(trials);
  rep.empirical_delta_max = ma.mean_max - mb.mean_max;
  rep.empirical_delta_max_stderr = std::sqrt(ma.var_max / n + mb.var_max / n);
  rep.empirical_delta_sum = ma.mean_sum - mb.mean_sum;
  rep.empirical_delta_sum_stderr = std::sqrt(ma.var_sum / n + mb.var_sum / n);

  if (std::fabs(rep.delta_vf) < kTieMargin) {
    rep.max_order_preserved = true;
    rep.sum_order_preserved = true;
  } else {
    rep.max_order_preserved =
        sign_of(rep.analytic_delta_max) == sign_of(rep.delta_vf);
    rep.sum_order_preserved =
        sign_of(rep.analytic_delta_sum) == sign_of(rep.delta_vf);
  }
  return rep;
}

namespace {

PolicySpec random_policy(std::uint64_t& state) {
  PolicySpec p;
  p.v_f = uniform01(state);
  p.alpha = uniform01(state);
  p.eps_mean_fail = uniform01(state);
  // admissible success-noise mean in [-alpha, 1-alpha]
  p.eps_mean_success = -p.alpha + uniform01(state);
  p.eps_family = (splitmix64(state) & 1) ? EpsFamily::UniformOnAdmissibleInterval
                                         : EpsFamily::PointMass;
  return p;
}

}  // namespace

SweepSummary sweep_order_preservation(const std::vector<double>& lambda_grid,
                                      int policy_count, bool shared_fail_noise,
                                      std::uint64_t seed) {
  for (double l : lambda_grid) check_lambda(l);
  SweepSummary summary;
  std::uint64_t state = seed;
  for (double lambda : lambda_grid) {
    for (int i = 0; i < policy_count; ++i) {
      PolicySpec a = random_policy(state);
      PolicySpec b = random_policy(state);
      if (shared_fail_noise) b.eps_mean_fail = a.eps_mean_fail;
      double delta_vf = a.v_f - b.v_f;
      if (std::fabs(delta_vf) < kTieMargin) continue;
      ++summary.pairs_tested;
      double dmax = expected_max_reward(a, lambda) - expected_max_reward(b, lambda);
      double dsum = expected_sum_reward(a, lambda) - expected_sum_reward(b, lambda);
      if (sign_of(dmax) != sign_of(delta_vf)) ++summary.max_violations;
      if (sign_of(dsum) != sign_of(delta_vf)) ++summary.sum_violations;
    }
  }
  return summary;
}

std::optional<std::pair<PolicySpec, PolicySpec>> find_sum_counterexample(
    double lambda) {
  check_lambda(lambda);
  // Grid over (V_f gap, failure/success noise gap), then keep the most
  // negative sum delta among pairs that still satisfy V_f(a) > V_f(b).
  std::optional<std::pair<PolicySpec, PolicySpec>> best;
  double best_delta = 0.0;
  for (double vf1 = 0.5; vf1 <= 0.9001; vf1 += 0.05) {
    for (double gap = 0.05; gap <= 0.2001; gap += 0.05) {
      double vf2 = vf1 - gap;
      if (vf2 < 0) continue;
      for (double noise = 0.1; noise <= 1.0001; noise += 0.05) {
        PolicySpec a, b;
        a.v_f = vf1;
        b.v_f = vf2;
        b.eps_mean_fail = std::min(1.0, noise);
        b.eps_mean_success = std::min(1.0, noise);  // alpha = 0
        double delta = expected_sum_reward(a, lambda) - expected_sum_reward(b, lambda);
        if (delta < 0 && delta < best_delta) {
          best_delta = delta;
          best = std::make_pair(a, b);
        }
      }
    }
  }
  return best;
}

}  // namespace cogs
