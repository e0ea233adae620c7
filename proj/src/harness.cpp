#include "lab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "lab/kernels.hpp"

namespace lab::harness {

SlotObservation make_observation(const std::vector<double>& gains,
                                 const env::SlotRecord* prev,
                                 const SystemConfig& cfg) {
  SlotObservation obs = SlotObservation::zeros(cfg.n_devices, cfg.n_levels);
  obs.gain = gains;
  if (prev != nullptr) {
    obs.prev_alpha = prev->alpha;
    obs.prev_share = prev->share;
    obs.prev_onehot = encode_one_hot(prev->action, cfg.n_levels);
    obs.prev_utility = prev->total_utility;
    for (int n = 0; n < cfg.n_devices; ++n)
      obs.prev_tau[n] =
          prev->tau_degrade[n] + prev->tau_tx[n] + prev->tau_edge[n];
  }
  return obs;
}

Aggregates aggregate(const std::vector<SlotResult>& slots) {
  Aggregates a;
  if (slots.empty()) return a;
  std::vector<double> decision;
  decision.reserve(slots.size());
  for (const SlotResult& s : slots) {
    for (std::size_t n = 0; n < s.rec.alpha.size(); ++n) {
      a.alpha_bar += s.rec.alpha[n];
      a.conf_bar += s.rec.conf[n];
      a.tau_bar += s.rec.tau_degrade[n] + s.rec.tau_tx[n] + s.rec.tau_edge[n];
    }
    a.utility_bar += s.rec.total_utility;
    a.k_mean += static_cast<double>(s.k_evaluated);
    decision.push_back(s.decision_seconds);
  }
  const double t = static_cast<double>(slots.size());
  a.alpha_bar /= t;
  a.conf_bar /= t;
  a.tau_bar /= t;
  a.utility_bar /= t;
  a.k_mean /= t;
  std::sort(decision.begin(), decision.end());
  const std::size_t m = decision.size();
  a.decision_seconds_median = (m % 2 == 1)
                                  ? decision[m / 2]
                                  : 0.5 * (decision[m / 2 - 1] + decision[m / 2]);
  return a;
}

RunResult run_policy(const SystemConfig& cfg, const std::string& token,
                     std::uint64_t seed) {
  env::Environment environment(cfg, seed);
  const SystemConfig& c = environment.config();  // finalized copy
  auto pol = policy::make_policy(token, c, seed, &environment);

  RunResult result;
  result.policy = token;
  result.seed = seed;
  result.slots.reserve(c.horizon);

  const env::SlotRecord* prev = nullptr;
  for (int t = 1; t <= c.horizon; ++t) {
    environment.begin_slot(t);
    const SlotObservation obs = make_observation(environment.gains(), prev, c);

    const auto t0 = std::chrono::steady_clock::now();
    const policy::Decision d = pol->decide(obs, t);
    const auto t1 = std::chrono::steady_clock::now();

    const std::vector<double> shares =
        policy::allocate_shares(c, environment.gains(), d.action);
    SlotResult slot;
    slot.rec = environment.evaluate(d.action, shares);
    slot.k_evaluated = d.k_evaluated;
    slot.chosen_rank = d.chosen_rank;
    slot.decision_seconds =
        std::chrono::duration<double>(t1 - t0).count();
    pol->observe(slot.rec, t);

    result.slots.push_back(std::move(slot));
    prev = &result.slots.back().rec;
  }
  result.agg = aggregate(result.slots);
  return result;
}

std::vector<RunResult> run_bench(const SystemConfig& cfg,
                                 const std::vector<std::string>& tokens,
                                 const std::vector<std::uint64_t>& seeds) {
  if (tokens.empty() || seeds.empty())
    throw std::invalid_argument("run_bench: need at least one policy and seed");
  const long long total =
      static_cast<long long>(tokens.size()) * static_cast<long long>(seeds.size());
  std::vector<RunResult> results(static_cast<std::size_t>(total));
  par::map_indices(total, [&](long long i) {
    const std::size_t p = static_cast<std::size_t>(i) / seeds.size();
    const std::size_t s = static_cast<std::size_t>(i) % seeds.size();
    results[static_cast<std::size_t>(i)] = run_policy(cfg, tokens[p], seeds[s]);
  });
  return results;
}

}  // namespace lab::harness
