#include "lab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lab/bandwidth.hpp"
#include "lab/env.hpp"

namespace lab::policy {

namespace {

std::vector<DegradationAction> enumerate_actions(const SystemConfig& cfg,
                                                 const char* who) {
  const long long total = cfg.action_space_size();
  if (total > cfg.enum_cap)
    throw std::invalid_argument(std::string(who) +
                                ": action space exceeds the enumeration cap");
  std::vector<DegradationAction> all;
  all.reserve(static_cast<std::size_t>(total));
  for (long long i = 0; i < total; ++i)
    all.push_back(action_from_index(i, cfg.n_devices, cfg.n_levels));
  return all;
}

}  // namespace

std::vector<double> gain_features(const std::vector<double>& gains) {
  std::vector<double> f(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i)
    f[i] = gains[i] > 0.0 ? std::log10(gains[i]) : 0.0;
  return f;
}

std::vector<double> allocate_shares(const SystemConfig& cfg,
                                    const std::vector<double>& gains,
                                    const DegradationAction& action) {
  bw::AllocationProblem prob;
  prob.bandwidth_hz = cfg.bandwidth_hz;
  prob.noise_psd_w = cfg.noise_psd_w;
  const int n = cfg.n_devices;
  prob.gain = gains;
  prob.power_w = cfg.tx_power_w;
  prob.weight.resize(n);
  prob.data_bits.resize(n);
  for (int i = 0; i < n; ++i) {
    const double w = cfg.latency_weight[i];
    prob.weight[i] = w > 0.0 ? w : 1.0;
    prob.data_bits[i] =
        env::data_size_bits(cfg.native_w[i], cfg.native_h[i], action[i]);
  }
  return bw::solve_allocation(prob).share;
}

// --- lab ----------------------------------------------------------------

LabPolicy::LabPolicy(const SystemConfig& cfg, std::uint64_t master_seed)
    : cfg_(cfg),
      k_init_(cfg.k_initial()),
      sample_(rng::stream_seed(master_seed, streams::kActorSample)),
      noise_(rng::stream_seed(master_seed, streams::kActorNoise)),
      net_([&] {
        rng::Stream init(rng::stream_seed(master_seed, streams::kActorInit));
        return actor::PreferenceNet(
            actor::feature_dim(cfg) * cfg.history_len, cfg.hidden,
            cfg.n_devices * cfg.n_levels, init);
      }()),
      state_(cfg.history_len),
      replay_(cfg.replay_capacity),
      cache_(cfg.bo_capacity),
      rolling_(cfg.bo_capacity),
      params_(gp::initial_params(cache_, cfg.n_devices)),
      k_(k_init_) {
  cfg_.validate();
}

Decision LabPolicy::decide(const SlotObservation& obs, int slot) {
  state_.push(obs);
  last_feats_ = actor::flatten_state(state_, cfg_);

  k_ = actor::update_k(ranks_, k_, k_init_, slot, cfg_.k_adapt_every);
  if (cfg_.k_adapt_every > 0 && slot % cfg_.k_adapt_every == 0) ranks_.clear();

  const std::vector<double> scores = net_.forward(last_feats_);
  actor::CandidateSet cands = actor::generate_candidates(
      scores, cfg_.n_devices, cfg_.n_levels, k_, sample_, noise_);

  const double best_y = cache_.empty() ? 0.0 : cache_.best_y();
  const gp::Selection sel =
      gp::select_action(rolling_.model(), gain_features(obs.gain),
                        cands.actions, slot, cfg_.acquisition, cfg_.ucb_beta,
                        best_y);
  ranks_.push_back(sel.index + 1);

  Decision d;
  d.action = cands.actions[sel.index];
  d.k_evaluated = k_;
  d.chosen_rank = sel.index + 1;
  return d;
}

void LabPolicy::observe(const env::SlotRecord& rec, int slot) {
  replay_.append(last_feats_, encode_one_hot(rec.action, cfg_.n_levels));
  cache_.append({gain_features(rec.gain), rec.action, slot, rec.total_utility});

  if (cfg_.refit_every > 0 && slot % cfg_.refit_every == 0 && cache_.size() >= 2)
    params_ = gp::refit(cache_, params_, cfg_.refit_max_iter).params;
  rolling_.update(cache_, params_);

  if (cfg_.train_every > 0 && slot % cfg_.train_every == 0 &&
      replay_.size() >= cfg_.replay_capacity / 2) {
    std::vector<std::vector<double>> xs, ts;
    replay_.sample(std::min(cfg_.batch_size, replay_.size()), sample_, xs, ts);
    net_.train_batch(xs, ts, cfg_.learning_rate, cfg_.grad_clip);
  }
}

// --- full_bo --------------------------------------------------------------

FullBoPolicy::FullBoPolicy(const SystemConfig& cfg)
    : cfg_(cfg),
      all_actions_(enumerate_actions(cfg, "full_bo")),
      cache_(cfg.bo_capacity),
      rolling_(cfg.bo_capacity),
      params_(gp::initial_params(cache_, cfg.n_devices)) {
  cfg_.validate();
}

Decision FullBoPolicy::decide(const SlotObservation& obs, int slot) {
  const double best_y = cache_.empty() ? 0.0 : cache_.best_y();
  const gp::Selection sel =
      gp::select_action(rolling_.model(), gain_features(obs.gain), all_actions_,
                        slot, cfg_.acquisition, cfg_.ucb_beta, best_y);
  Decision d;
  d.action = all_actions_[sel.index];
  d.k_evaluated = static_cast<long long>(all_actions_.size());
  d.chosen_rank = 0;
  return d;
}

void FullBoPolicy::observe(const env::SlotRecord& rec, int slot) {
  cache_.append({gain_features(rec.gain), rec.action, slot, rec.total_utility});
  if (cfg_.refit_every > 0 && slot % cfg_.refit_every == 0 && cache_.size() >= 2)
    params_ = gp::refit(cache_, params_, cfg_.refit_max_iter).params;
  rolling_.update(cache_, params_);
}

// --- ideal ----------------------------------------------------------------

IdealPolicy::IdealPolicy(const SystemConfig& cfg, const env::Environment* probe)
    : cfg_(cfg), env_(probe), all_actions_(enumerate_actions(cfg, "ideal")) {
  if (env_ == nullptr)
    throw std::invalid_argument("ideal: needs an environment to probe");
  cfg_.validate();
}

Decision IdealPolicy::decide(const SlotObservation& obs, int slot) {
  if (env_->slot() != slot)
    throw std::logic_error("ideal: environment is not at the decision slot");
  Decision d;
  d.k_evaluated = static_cast<long long>(all_actions_.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const DegradationAction& a : all_actions_) {
    const std::vector<double> shares = allocate_shares(cfg_, obs.gain, a);
    const env::SlotRecord rec = env_->evaluate(a, shares);
    if (rec.total_utility > best) {
      best = rec.total_utility;
      d.action = a;
    }
  }
  return d;
}

// --- fixed and random -------------------------------------------------------

FixedLevelPolicy::FixedLevelPolicy(const SystemConfig& cfg, int level,
                                   const char* token)
    : action_(cfg.n_devices, level), token_(token) {
  if (level < 0 || level >= cfg.n_levels)
    throw std::invalid_argument("fixed policy: level out of range");
}

Decision FixedLevelPolicy::decide(const SlotObservation&, int) {
  return {action_, 1, 0};
}

RandomPolicy::RandomPolicy(const SystemConfig& cfg, std::uint64_t master_seed)
    : n_devices_(cfg.n_devices),
      n_levels_(cfg.n_levels),
      draw_(rng::stream_seed(master_seed, streams::kPolicyRandom)) {}

Decision RandomPolicy::decide(const SlotObservation&, int) {
  DegradationAction a(n_devices_);
  for (int i = 0; i < n_devices_; ++i)
    a[i] = static_cast<int>(draw_.below(static_cast<std::uint64_t>(n_levels_)));
  return {a, 1, 0};
}

// --- factory ----------------------------------------------------------------

const std::vector<std::string>& policy_tokens() {
  static const std::vector<std::string> tokens{
      "lab", "ideal", "full_bo", "delay_obli", "delay_min", "random"};
  return tokens;
}

std::unique_ptr<Policy> make_policy(const std::string& token,
                                    const SystemConfig& cfg,
                                    std::uint64_t master_seed,
                                    const env::Environment* probe) {
  if (token == "lab") return std::make_unique<LabPolicy>(cfg, master_seed);
  if (token == "ideal") return std::make_unique<IdealPolicy>(cfg, probe);
  if (token == "full_bo") return std::make_unique<FullBoPolicy>(cfg);
  if (token == "delay_obli")
    return std::make_unique<FixedLevelPolicy>(cfg, 0, "delay_obli");
  if (token == "delay_min")
    return std::make_unique<FixedLevelPolicy>(cfg, cfg.n_levels - 1, "delay_min");
  if (token == "random") return std::make_unique<RandomPolicy>(cfg, master_seed);
  throw std::invalid_argument("unknown policy: " + token);
}

}  // namespace lab::policy
