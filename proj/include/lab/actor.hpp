#pragma once
// Learned preference actor: a small feed-forward network maps the recent
// slot history to per-device, per-level preference scores in (0, 1). The
// scores seed a candidate list for the critic: the greedy decode first,
// then samples around the scores, then samples around noise-perturbed
// scores, sorted by distance from the raw score vector.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lab/rng.hpp"
#include "lab/types.hpp"

namespace lab::actor {

// Feature layout per observation (all finite, no lookahead):
//   log10 of this slot's channel gains (0 for padded slots),
//   previous confidence sums, previous per-device total latency in seconds,
//   previous action one-hot, previous bandwidth shares, previous utility.
int feature_dim(const SystemConfig& cfg);
std::vector<double> observation_features(const SlotObservation& obs,
                                         const SystemConfig& cfg);
// Concatenates the last `history_len` observations, oldest first,
// zero-padding at the front until the window fills.
std::vector<double> flatten_state(const SlotState& state, const SystemConfig& cfg);

class PreferenceNet {
 public:
  PreferenceNet() = default;
  // tanh hidden layers, logistic outputs, Xavier-uniform init, zero biases
  PreferenceNet(int input_dim, const std::vector<int>& hidden, int output_dim,
                rng::Stream& init);

  std::vector<double> forward(const std::vector<double>& x) const;

  // Binary cross entropy, summed over outputs and averaged over the batch.
  double loss(const std::vector<std::vector<double>>& xs,
              const std::vector<std::vector<double>>& targets) const;
  // Gradient of loss() in the flat parameter layout. Exposed for tests.
  Eigen::VectorXd gradient(const std::vector<std::vector<double>>& xs,
                           const std::vector<std::vector<double>>& targets) const;

  // One Adam step on a minibatch with global-norm gradient clipping.
  // Returns the pre-step loss.
  double train_batch(const std::vector<std::vector<double>>& xs,
                     const std::vector<std::vector<double>>& targets, double lr,
                     double clip);

  Eigen::VectorXd params_flat() const;
  void set_params_flat(const Eigen::VectorXd& p);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }

  // Versioned plain-text checkpoint: header, shape manifest, then row-major
  // weights and biases per layer at full precision.
  void save(const std::string& path) const;
  static PreferenceNet load(const std::string& path);

 private:
  struct Layer {
    Eigen::MatrixXd w;  // rows = outputs, cols = inputs
    Eigen::VectorXd b;
  };
  void backward(const std::vector<std::vector<double>>& xs,
                const std::vector<std::vector<double>>& targets,
                std::vector<Layer>& grads) const;

  int input_dim_ = 0, output_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<Layer> layers_;
  // Adam state, lazily sized on first train_batch
  std::vector<Layer> m_, v_;
  long long adam_t_ = 0;
};

struct CandidateSet {
  std::vector<DegradationAction> actions;  // ascending by distance, stable
  std::vector<double> distance;            // ||onehot - scores||_2
};

// First candidate: per-device argmax (ties to the lowest level). Candidates
// 2..floor(k/2): per-device softmax samples of the scores. The rest: fresh
// standard-normal noise added to the scores before the softmax, redrawn per
// candidate. Duplicates are kept.
CandidateSet generate_candidates(const std::vector<double>& scores, int n_devices,
                                 int n_levels, int k, rng::Stream& sample,
                                 rng::Stream& noise);

// Candidate-count schedule: full width at t == 1; at every adaptation
// boundary shrink or grow to (worst chosen rank in the window) + 1, capped
// by k_init; otherwise keep the previous count. Ranks are 1-based. An
// empty window keeps the previous count.
int update_k(const std::vector<int>& recent_ranks, int k_prev, int k_init, int t,
             int every);

class ReplayMemory {
 public:
  explicit ReplayMemory(int capacity);
  void append(std::vector<double> features, std::vector<double> target);
  int size() const { return static_cast<int>(feat_.size()); }
  // Uniform minibatch without replacement (with replacement only when the
  // memory is smaller than the request).
  void sample(int count, rng::Stream& g, std::vector<std::vector<double>>& xs,
              std::vector<std::vector<double>>& targets) const;

 private:
  int cap_;
  std::deque<std::vector<double>> feat_, targ_;
};

}  // namespace lab::actor
