#include "lab/actor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lab::actor {

namespace {
constexpr double kClampLo = 1e-12;
constexpr double kClampHi = 1.0 - 1e-12;

double bce_term(double f, double t) {
  const double p = std::clamp(f, kClampLo, kClampHi);
  return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
}
}  // namespace

int feature_dim(const SystemConfig& cfg) {
  return 4 * cfg.n_devices + cfg.n_devices * cfg.n_levels + 1;
}

std::vector<double> observation_features(const SlotObservation& obs,
                                         const SystemConfig& cfg) {
  std::vector<double> f;
  f.reserve(feature_dim(cfg));
  for (double h : obs.gain) f.push_back(h > 0.0 ? std::log10(h) : 0.0);
  f.insert(f.end(), obs.prev_alpha.begin(), obs.prev_alpha.end());
  f.insert(f.end(), obs.prev_tau.begin(), obs.prev_tau.end());
  f.insert(f.end(), obs.prev_onehot.begin(), obs.prev_onehot.end());
  f.insert(f.end(), obs.prev_share.begin(), obs.prev_share.end());
  f.push_back(obs.prev_utility);
  if (static_cast<int>(f.size()) != feature_dim(cfg))
    throw std::logic_error("observation_features: dimension mismatch");
  return f;
}

std::vector<double> flatten_state(const SlotState& state, const SystemConfig& cfg) {
  const int d = feature_dim(cfg);
  std::vector<double> out(static_cast<std::size_t>(d) * state.capacity, 0.0);
  const int have = static_cast<int>(state.window.size());
  const int pad = state.capacity - have;
  for (int i = 0; i < have; ++i) {
    const auto f = observation_features(state.window[i], cfg);
    std::copy(f.begin(), f.end(), out.begin() + static_cast<std::size_t>(pad + i) * d);
  }
  return out;
}

PreferenceNet::PreferenceNet(int input_dim, const std::vector<int>& hidden,
                             int output_dim, rng::Stream& init)
    : input_dim_(input_dim), output_dim_(output_dim), hidden_(hidden) {
  if (input_dim < 1 || output_dim < 1)
    throw std::invalid_argument("PreferenceNet: dimensions must be >= 1");
  std::vector<int> widths;
  widths.push_back(input_dim);
  for (int h : hidden) widths.push_back(h);
  widths.push_back(output_dim);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    const int fan_in = widths[l], fan_out = widths[l + 1];
    const double r = std::sqrt(6.0 / (fan_in + fan_out));
    layer.w.resize(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) layer.w(i, j) = r * (2.0 * init.u01() - 1.0);
    layer.b = Eigen::VectorXd::Zero(fan_out);
    layers_.push_back(std::move(layer));
  }
}

std::vector<double> PreferenceNet::forward(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != input_dim_)
    throw std::invalid_argument("PreferenceNet::forward: input size mismatch");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    v = layers_[l].w * v + layers_[l].b;
    if (l + 1 < layers_.size())
      v = v.array().tanh();
    else
      v = 1.0 / (1.0 + (-v.array()).exp());
  }
  return std::vector<double>(v.data(), v.data() + v.size());
}

double PreferenceNet::loss(const std::vector<std::vector<double>>& xs,
                           const std::vector<std::vector<double>>& targets) const {
  if (xs.empty() || xs.size() != targets.size())
    throw std::invalid_argument("PreferenceNet::loss: bad batch");
  double total = 0.0;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    const auto f = forward(xs[b]);
    for (std::size_t o = 0; o < f.size(); ++o) total += bce_term(f[o], targets[b][o]);
  }
  return total / static_cast<double>(xs.size());
}

void PreferenceNet::backward(const std::vector<std::vector<double>>& xs,
                             const std::vector<std::vector<double>>& targets,
                             std::vector<Layer>& grads) const {
  grads.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    grads[l].w = Eigen::MatrixXd::Zero(layers_[l].w.rows(), layers_[l].w.cols());
    grads[l].b = Eigen::VectorXd::Zero(layers_[l].b.size());
  }
  const double inv_batch = 1.0 / static_cast<double>(xs.size());
  std::vector<Eigen::VectorXd> acts(layers_.size() + 1);
  for (std::size_t b = 0; b < xs.size(); ++b) {
    acts[0] = Eigen::Map<const Eigen::VectorXd>(xs[b].data(), xs[b].size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::VectorXd z = layers_[l].w * acts[l] + layers_[l].b;
      if (l + 1 < layers_.size())
        acts[l + 1] = z.array().tanh();
      else
        acts[l + 1] = 1.0 / (1.0 + (-z.array()).exp());
    }
    // logistic + BCE: delta at the output is (f - target), with the
    // gradient zeroed where the prediction sits inside the clamp band
    Eigen::VectorXd delta = acts.back();
    for (int o = 0; o < delta.size(); ++o) {
      const double f = delta(o);
      delta(o) = (f < kClampLo || f > kClampHi) ? 0.0 : f - targets[b][o];
    }
    delta *= inv_batch;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      grads[l].w.noalias() += delta * acts[l].transpose();
      grads[l].b += delta;
      if (l > 0) {
        Eigen::VectorXd up = layers_[l].w.transpose() * delta;
        delta = (up.array() * (1.0 - acts[l].array().square())).matrix();
      }
    }
  }
}

Eigen::VectorXd PreferenceNet::gradient(
    const std::vector<std::vector<double>>& xs,
    const std::vector<std::vector<double>>& targets) const {
  std::vector<Layer> grads;
  backward(xs, targets, grads);
  Eigen::VectorXd flat(params_flat().size());
  Eigen::Index at = 0;
  for (const Layer& gl : grads) {
    for (int i = 0; i < gl.w.rows(); ++i)
      for (int j = 0; j < gl.w.cols(); ++j) flat(at++) = gl.w(i, j);
    for (int i = 0; i < gl.b.size(); ++i) flat(at++) = gl.b(i);
  }
  return flat;
}

double PreferenceNet::train_batch(const std::vector<std::vector<double>>& xs,
                                  const std::vector<std::vector<double>>& targets,
                                  double lr, double clip) {
  const double before = loss(xs, targets);
  std::vector<Layer> grads;
  backward(xs, targets, grads);

  double sq = 0.0;
  for (const Layer& gl : grads) sq += gl.w.squaredNorm() + gl.b.squaredNorm();
  const double norm = std::sqrt(sq);
  if (clip > 0.0 && norm > clip) {
    const double s = clip / norm;
    for (Layer& gl : grads) {
      gl.w *= s;
      gl.b *= s;
    }
  }

  if (m_.empty()) {
    m_.resize(layers_.size());
    v_.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      m_[l].w = Eigen::MatrixXd::Zero(layers_[l].w.rows(), layers_[l].w.cols());
      m_[l].b = Eigen::VectorXd::Zero(layers_[l].b.size());
      v_[l] = m_[l];
    }
  }
  ++adam_t_;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    m_[l].w = b1 * m_[l].w + (1.0 - b1) * grads[l].w;
    m_[l].b = b1 * m_[l].b + (1.0 - b1) * grads[l].b;
    v_[l].w = b2 * v_[l].w.array().matrix() +
              (1.0 - b2) * grads[l].w.array().square().matrix();
    v_[l].b = b2 * v_[l].b.array().matrix() +
              (1.0 - b2) * grads[l].b.array().square().matrix();
    layers_[l].w.array() -=
        lr * (m_[l].w.array() / bc1) / ((v_[l].w.array() / bc2).sqrt() + eps);
    layers_[l].b.array() -=
        lr * (m_[l].b.array() / bc1) / ((v_[l].b.array() / bc2).sqrt() + eps);
  }
  return before;
}

Eigen::VectorXd PreferenceNet::params_flat() const {
  Eigen::Index total = 0;
  for (const Layer& l : layers_) total += l.w.size() + l.b.size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (const Layer& l : layers_) {
    for (int i = 0; i < l.w.rows(); ++i)
      for (int j = 0; j < l.w.cols(); ++j) flat(at++) = l.w(i, j);
    for (int i = 0; i < l.b.size(); ++i) flat(at++) = l.b(i);
  }
  return flat;
}

void PreferenceNet::set_params_flat(const Eigen::VectorXd& p) {
  Eigen::Index at = 0;
  for (Layer& l : layers_) {
    for (int i = 0; i < l.w.rows(); ++i)
      for (int j = 0; j < l.w.cols(); ++j) l.w(i, j) = p(at++);
    for (int i = 0; i < l.b.size(); ++i) l.b(i) = p(at++);
  }
  if (at != p.size())
    throw std::invalid_argument("set_params_flat: size mismatch");
}

void PreferenceNet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("PreferenceNet::save: cannot open " + path);
  out << "prefnet 1\n";
  out << "input " << input_dim_ << " output " << output_dim_ << " hidden "
      << hidden_.size();
  for (int h : hidden_) out << ' ' << h;
  out << '\n';
  out.precision(17);
  for (const Layer& l : layers_) {
    out << "layer " << l.w.rows() << ' ' << l.w.cols() << '\n';
    for (int i = 0; i < l.w.rows(); ++i) {
      for (int j = 0; j < l.w.cols(); ++j) out << l.w(i, j) << ' ';
      out << '\n';
    }
    for (int i = 0; i < l.b.size(); ++i) out << l.b(i) << ' ';
    out << '\n';
  }
  if (!out) throw std::runtime_error("PreferenceNet::save: write failed");
}

PreferenceNet PreferenceNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("PreferenceNet::load: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "prefnet" || version != 1)
    throw std::runtime_error("PreferenceNet::load: unrecognized format");
  PreferenceNet net;
  std::string tok;
  std::size_t nh = 0;
  in >> tok >> net.input_dim_ >> tok >> net.output_dim_ >> tok >> nh;
  net.hidden_.resize(nh);
  for (std::size_t i = 0; i < nh; ++i) in >> net.hidden_[i];
  for (std::size_t l = 0; l < nh + 1; ++l) {
    Layer layer;
    int rows = 0, cols = 0;
    in >> tok >> rows >> cols;
    if (tok != "layer" || rows < 1 || cols < 1)
      throw std::runtime_error("PreferenceNet::load: bad layer header");
    layer.w.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) in >> layer.w(i, j);
    layer.b.resize(rows);
    for (int i = 0; i < rows; ++i) in >> layer.b(i);
    net.layers_.push_back(std::move(layer));
  }
  if (!in) throw std::runtime_error("PreferenceNet::load: truncated file");
  return net;
}

CandidateSet generate_candidates(const std::vector<double>& scores, int n_devices,
                                 int n_levels, int k, rng::Stream& sample,
                                 rng::Stream& noise) {
  if (k < 1) throw std::invalid_argument("generate_candidates: k must be >= 1");
  if (static_cast<int>(scores.size()) != n_devices * n_levels)
    throw std::invalid_argument("generate_candidates: score size mismatch");

  auto softmax_pick = [&](const double* s) {
    double mx = s[0];
    for (int l = 1; l < n_levels; ++l) mx = std::max(mx, s[l]);
    double z = 0.0;
    std::vector<double> w(n_levels);
    for (int l = 0; l < n_levels; ++l) {
      w[l] = std::exp(s[l] - mx);
      z += w[l];
    }
    double u = sample.u01() * z;
    for (int l = 0; l < n_levels; ++l) {
      u -= w[l];
      if (u < 0.0) return l;
    }
    return n_levels - 1;
  };

  std::vector<DegradationAction> actions;
  actions.reserve(k);

  DegradationAction greedy(n_devices, 0);
  for (int n = 0; n < n_devices; ++n) {
    const double* s = scores.data() + static_cast<std::size_t>(n) * n_levels;
    int best = 0;
    for (int l = 1; l < n_levels; ++l)
      if (s[l] > s[best]) best = l;  // ties keep the lowest level
    greedy[n] = best;
  }
  actions.push_back(greedy);

  const int direct = k / 2;  // candidates 1..floor(k/2) follow the scores
  for (int c = 1; c < direct; ++c) {
    DegradationAction a(n_devices, 0);
    for (int n = 0; n < n_devices; ++n)
      a[n] = softmax_pick(scores.data() + static_cast<std::size_t>(n) * n_levels);
    actions.push_back(a);
  }
  std::vector<double> jittered(scores.size());
  while (static_cast<int>(actions.size()) < k) {
    for (std::size_t i = 0; i < scores.size(); ++i)
      jittered[i] = scores[i] + noise.normal();
    DegradationAction a(n_devices, 0);
    for (int n = 0; n < n_devices; ++n)
      a[n] = softmax_pick(jittered.data() + static_cast<std::size_t>(n) * n_levels);
    actions.push_back(a);
  }

  CandidateSet set;
  std::vector<double> dist(actions.size());
  for (std::size_t c = 0; c < actions.size(); ++c) {
    double sq = 0.0;
    for (int n = 0; n < n_devices; ++n)
      for (int l = 0; l < n_levels; ++l) {
        const double oh = (actions[c][n] == l) ? 1.0 : 0.0;
        const double d = oh - scores[static_cast<std::size_t>(n) * n_levels + l];
        sq += d * d;
      }
    dist[c] = std::sqrt(sq);
  }
  std::vector<int> order(actions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist[a] < dist[b]; });
  for (int idx : order) {
    set.actions.push_back(std::move(actions[idx]));
    set.distance.push_back(dist[idx]);
  }
  return set;
}

int update_k(const std::vector<int>& recent_ranks, int k_prev, int k_init, int t,
             int every) {
  if (t == 1) return k_init;
  if (every < 1 || t % every != 0 || recent_ranks.empty()) return k_prev;
  int worst = 1;
  for (int r : recent_ranks) worst = std::max(worst, r);
  return std::min(worst + 1, k_init);
}

ReplayMemory::ReplayMemory(int capacity) : cap_(capacity) {
  if (capacity < 1) throw std::invalid_argument("ReplayMemory: capacity >= 1");
}

void ReplayMemory::append(std::vector<double> features, std::vector<double> target) {
  feat_.push_back(std::move(features));
  targ_.push_back(std::move(target));
  while (static_cast<int>(feat_.size()) > cap_) {
    feat_.pop_front();
    targ_.pop_front();
  }
}

void ReplayMemory::sample(int count, rng::Stream& g,
                          std::vector<std::vector<double>>& xs,
                          std::vector<std::vector<double>>& targets) const {
  if (size() == 0) throw std::logic_error("ReplayMemory::sample: empty");
  xs.clear();
  targets.clear();
  xs.reserve(count);
  targets.reserve(count);
  const int n = size();
  if (count > n) {  // degenerate: draw with replacement
    for (int i = 0; i < count; ++i) {
      const int j = static_cast<int>(g.below(n));
      xs.push_back(feat_[j]);
      targets.push_back(targ_[j]);
    }
    return;
  }
  // partial Fisher-Yates for a uniform sample without replacement
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(g.below(n - i));
    std::swap(idx[i], idx[j]);
    xs.push_back(feat_[idx[i]]);
    targets.push_back(targ_[idx[i]]);
  }
}

}  // namespace lab::actor
