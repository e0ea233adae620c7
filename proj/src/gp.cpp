#include "lab/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lab/kernels.hpp"

namespace lab::gp {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

double phi_pdf(double z) { return std::exp(-0.5 * z * z) / 2.5066282746310002; }
double phi_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }
}  // namespace

void KernelParams::validate(int cont_dim) const {
  if (!(var_cont > 0.0)) throw std::invalid_argument("var_cont must be > 0");
  if (!(var_cat > 0.0)) throw std::invalid_argument("var_cat must be > 0");
  if (static_cast<int>(length.size()) != cont_dim)
    throw std::invalid_argument("length: one scale per continuous dimension");
  for (double l : length)
    if (!(l > 0.0)) throw std::invalid_argument("length scales must be > 0");
  if (!(recency >= 0.0) || recency >= 1.0)
    throw std::invalid_argument("recency must lie in [0, 1)");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
}

Cache::Cache(int capacity) : cap_(capacity) {
  if (capacity < 1) throw std::invalid_argument("Cache: capacity must be >= 1");
}

void Cache::append(Entry e) {
  buf_.push_back(std::move(e));
  while (static_cast<int>(buf_.size()) > cap_) buf_.pop_front();
}

double Cache::best_y() const {
  if (buf_.empty()) throw std::logic_error("Cache::best_y: empty cache");
  double b = buf_[0].y;
  for (const Entry& e : buf_) b = std::max(b, e.y);
  return b;
}

Standardizer Standardizer::fit(const Cache& cache, int dim) {
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.sd.assign(dim, 1.0);
  const int n = cache.size();
  if (n < 2) return s;
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < dim; ++m) s.mean[m] += cache[i].h[m];
  for (int m = 0; m < dim; ++m) s.mean[m] /= n;
  for (int m = 0; m < dim; ++m) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = cache[i].h[m] - s.mean[m];
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1));
    s.sd[m] = sd > 1e-300 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(const std::vector<double>& h) const {
  if (mean.empty()) return h;
  std::vector<double> out(h.size());
  for (std::size_t m = 0; m < h.size(); ++m) out[m] = (h[m] - mean[m]) / sd[m];
  return out;
}

double kernel(const std::vector<double>& hz1, const DegradationAction& a1, int t1,
              const std::vector<double>& hz2, const DegradationAction& a2, int t2,
              const KernelParams& p) {
  double q = 0.0;
  for (std::size_t m = 0; m < hz1.size(); ++m) {
    const double d = (hz1[m] - hz2[m]) / p.length[m];
    q += d * d;
  }
  const double rbf = p.var_cont * std::exp(-0.5 * q);
  int match = 0;
  for (std::size_t n = 0; n < a1.size(); ++n) match += (a1[n] == a2[n]);
  const double cat = p.var_cat * match / static_cast<double>(a1.size());
  const double lag = std::abs(t1 - t2);
  const double tmp = std::pow(1.0 - p.recency, 0.5 * lag);
  return tmp * (rbf + cat + rbf * cat);
}

void Model::factorize(const Cache& cache, Eigen::MatrixXd K) {
  const int n = cache.size();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = cache[i].y;

  const double noise2 = params_.noise_sd * params_.noise_sd;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale += K(i, i) + noise2;
  scale /= n;

  Eigen::LLT<Eigen::MatrixXd> llt;
  jitter_ = 0.0;
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd Kn = K;
    Kn.diagonal().array() += noise2 + jitter_;
    llt.compute(Kn);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 5)
      throw std::runtime_error("gp::Model: Gram matrix not factorizable");
    jitter_ = (jitter_ == 0.0) ? 1e-10 * scale : jitter_ * 10.0;
  }
  L_ = llt.matrixL();
  alpha_ = llt.solve(y);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(L_(i, i));
  lml_ = -0.5 * y.dot(alpha_) - logdet - 0.5 * n * kLog2Pi;
}

Model Model::fit(const Cache& cache, const KernelParams& p,
                 const Standardizer* st) {
  Model m;
  m.params_ = p;
  m.n_ = cache.size();
  if (cache.empty()) return m;
  const int dim = static_cast<int>(cache[0].h.size());
  p.validate(dim);
  m.std_ = st ? *st : Standardizer::fit(cache, dim);
  m.hz_.resize(m.n_);
  m.act_.resize(m.n_);
  m.slot_.resize(m.n_);
  for (int i = 0; i < m.n_; ++i) {
    m.hz_[i] = m.std_.apply(cache[i].h);
    m.act_[i] = cache[i].a;
    m.slot_[i] = cache[i].t;
  }
  Eigen::MatrixXd K;
  par::build_gram(m.hz_, m.act_, m.slot_, p, K);
  m.factorize(cache, std::move(K));
  return m;
}

Posterior Model::posterior(const std::vector<double>& h_raw,
                           const DegradationAction& a, int t) const {
  std::vector<Posterior> out;
  posterior_batch(h_raw, {a}, t, out);
  return out[0];
}

void Model::posterior_batch(const std::vector<double>& h_raw,
                            const std::vector<DegradationAction>& cands, int t,
                            std::vector<Posterior>& out) const {
  const double kss =
      params_.var_cont + params_.var_cat + params_.var_cont * params_.var_cat;
  if (n_ == 0) {
    out.assign(cands.size(), Posterior{0.0, kss});
    return;
  }
  const std::vector<double> hz = std_.apply(h_raw);
  const int N = static_cast<int>(act_[0].size());
  std::vector<double> coef_a(n_), coef_b(n_);
  for (int j = 0; j < n_; ++j) {
    double q = 0.0;
    for (std::size_t m = 0; m < hz.size(); ++m) {
      const double d = (hz[m] - hz_[j][m]) / params_.length[m];
      q += d * d;
    }
    const double rbf = params_.var_cont * std::exp(-0.5 * q);
    const double tmp = std::pow(1.0 - params_.recency, 0.5 * std::abs(t - slot_[j]));
    coef_a[j] = tmp * rbf;
    coef_b[j] = tmp * (1.0 + rbf);
  }
  par::batch_posterior(L_, alpha_, coef_a, coef_b, act_, cands,
                       params_.var_cat / N, kss, out);
}

void RollingModel::update(const Cache& cache, const KernelParams& p) {
  const int n = cache.size();
  if (n == 0) {
    model_ = Model();
    model_.params_ = p;
    return;
  }
  const int dim = static_cast<int>(cache[0].h.size());

  const bool params_changed =
      !gram_valid_ || p.var_cont != last_params_.var_cont ||
      p.var_cat != last_params_.var_cat || p.recency != last_params_.recency ||
      p.noise_sd != last_params_.noise_sd || p.length != last_params_.length;

  Model m;
  m.params_ = p;
  m.n_ = n;

  if (params_changed) {
    // refresh the feature standardization together with the parameters;
    // length scales are only meaningful against fixed statistics
    model_.std_ = Standardizer::fit(cache, dim);
    m.std_ = model_.std_;
    m.hz_.resize(n);
    m.act_.resize(n);
    m.slot_.resize(n);
    for (int i = 0; i < n; ++i) {
      m.hz_[i] = m.std_.apply(cache[i].h);
      m.act_[i] = cache[i].a;
      m.slot_[i] = cache[i].t;
    }
    if (gram_.rows() < cap_) gram_.resize(cap_, cap_);
    Eigen::MatrixXd K;
    par::build_gram(m.hz_, m.act_, m.slot_, p, K);
    gram_.topLeftCorner(n, n) = K;
    gram_valid_ = true;
    last_params_ = p;
    m.factorize(cache, std::move(K));
    model_ = std::move(m);
    return;
  }

  // window slid by one: reuse the overlapping block
  m.std_ = model_.std_;
  const int prev = model_.n_;
  m.hz_ = model_.hz_;
  m.act_ = model_.act_;
  m.slot_ = model_.slot_;
  if (prev == n) {
    // cache at capacity: drop the oldest row/column, shift up-left
    m.hz_.erase(m.hz_.begin());
    m.act_.erase(m.act_.begin());
    m.slot_.erase(m.slot_.begin());
    gram_.topLeftCorner(n - 1, n - 1) =
        gram_.block(1, 1, n - 1, n - 1).eval();
  } else if (prev + 1 != n) {
    throw std::logic_error("RollingModel::update: cache changed by more than one");
  }
  const Entry& e = cache[n - 1];
  m.hz_.push_back(m.std_.apply(e.h));
  m.act_.push_back(e.a);
  m.slot_.push_back(e.t);
  for (int j = 0; j < n; ++j) {
    const double v = kernel(m.hz_[n - 1], m.act_[n - 1], m.slot_[n - 1], m.hz_[j],
                            m.act_[j], m.slot_[j], p);
    gram_(n - 1, j) = v;
    gram_(j, n - 1) = v;
  }
  m.factorize(cache, gram_.topLeftCorner(n, n));
  model_ = std::move(m);
}

double log_marginal(const Cache& cache, const KernelParams& p) {
  return Model::fit(cache, p).log_marginal();
}

namespace {

struct Components {
  Eigen::MatrixXd R, C, Tm, Lag, K;
  std::vector<std::vector<double>> hz;
};

Components build_components(const Cache& cache, const KernelParams& p) {
  const int n = cache.size();
  const int dim = static_cast<int>(cache[0].h.size());
  Components c;
  const Standardizer st = Standardizer::fit(cache, dim);
  c.hz.resize(n);
  for (int i = 0; i < n; ++i) c.hz[i] = st.apply(cache[i].h);
  c.R.resize(n, n);
  c.C.resize(n, n);
  c.Tm.resize(n, n);
  c.Lag.resize(n, n);
  const int N = static_cast<int>(cache[0].a.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double q = 0.0;
      for (int m = 0; m < dim; ++m) {
        const double d = (c.hz[i][m] - c.hz[j][m]) / p.length[m];
        q += d * d;
      }
      const double rbf = p.var_cont * std::exp(-0.5 * q);
      int match = 0;
      for (int v = 0; v < N; ++v) match += (cache[i].a[v] == cache[j].a[v]);
      const double cat = p.var_cat * match / static_cast<double>(N);
      const double lag = std::abs(cache[i].t - cache[j].t);
      const double tmp = std::pow(1.0 - p.recency, 0.5 * lag);
      c.R(i, j) = c.R(j, i) = rbf;
      c.C(i, j) = c.C(j, i) = cat;
      c.Tm(i, j) = c.Tm(j, i) = tmp;
      c.Lag(i, j) = c.Lag(j, i) = lag;
    }
  c.K = c.Tm.array() * (c.R.array() + c.C.array() + c.R.array() * c.C.array());
  return c;
}

}  // namespace

LmlGrad log_marginal_with_grad(const Cache& cache, const KernelParams& p) {
  const int n = cache.size();
  if (n == 0) throw std::logic_error("log_marginal_with_grad: empty cache");
  const int dim = static_cast<int>(cache[0].h.size());
  p.validate(dim);

  Components c = build_components(cache, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = cache[i].y;

  Eigen::MatrixXd Kn = c.K;
  const double noise2 = p.noise_sd * p.noise_sd;
  Kn.diagonal().array() += noise2;
  Eigen::LLT<Eigen::MatrixXd> llt(Kn);
  double jitter = 0.0;
  while (llt.info() != Eigen::Success) {
    jitter = (jitter == 0.0) ? 1e-10 * Kn.diagonal().mean() : jitter * 10.0;
    if (jitter > 1e-5 * Kn.diagonal().mean())
      throw std::runtime_error("log_marginal_with_grad: not factorizable");
    Eigen::MatrixXd Kj = Kn;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
  }

  const Eigen::VectorXd beta = llt.solve(y);
  const Eigen::MatrixXd A = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd& Lm = llt.matrixLLT();
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(Lm(i, i));

  LmlGrad out;
  out.value = -0.5 * y.dot(beta) - logdet - 0.5 * n * kLog2Pi;

  // M = beta beta^T - A; each gradient is 1/2 sum(M .* dK/dtheta)
  const Eigen::MatrixXd M = beta * beta.transpose() - A;
  const int n_par = 1 + dim + 1 + 1 + 1;
  out.grad.resize(n_par);

  // d/d log var_cont
  {
    const Eigen::MatrixXd D =
        c.Tm.array() * c.R.array() * (1.0 + c.C.array());
    out.grad(0) = 0.5 * (M.array() * D.array()).sum();
  }
  // d/d log length_m
  for (int m = 0; m < dim; ++m) {
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double d = (c.hz[i][m] - c.hz[j][m]) / p.length[m];
        const double v = c.Tm(i, j) * c.R(i, j) * (1.0 + c.C(i, j)) * d * d;
        D(i, j) = D(j, i) = v;
      }
    out.grad(1 + m) = 0.5 * (M.array() * D.array()).sum();
  }
  // d/d log var_cat
  {
    const Eigen::MatrixXd D =
        c.Tm.array() * c.C.array() * (1.0 + c.R.array());
    out.grad(1 + dim) = 0.5 * (M.array() * D.array()).sum();
  }
  // d/d logit recency: dK/drho = -(lag/2)(1-rho)^(lag/2 - 1)(base sum);
  // times rho(1-rho) collapses to -(lag/2) rho K
  {
    const Eigen::MatrixXd D =
        (-0.5 * p.recency) * (c.Lag.array() * c.K.array()).matrix();
    out.grad(2 + dim) = 0.5 * (M.array() * D.array()).sum();
  }
  // d/d log noise_sd: dK/d = 2 noise2 I
  out.grad(3 + dim) = noise2 * (beta.squaredNorm() - A.trace());
  return out;
}

Eigen::VectorXd params_to_theta(const KernelParams& p) {
  const int dim = static_cast<int>(p.length.size());
  Eigen::VectorXd t(dim + 4);
  auto slog = [](double x) { return std::log(std::max(x, 1e-12)); };
  t(0) = slog(p.var_cont);
  for (int m = 0; m < dim; ++m) t(1 + m) = slog(p.length[m]);
  t(1 + dim) = slog(p.var_cat);
  const double r = std::clamp(p.recency, 1e-6, 1.0 - 1e-6);
  t(2 + dim) = std::log(r / (1.0 - r));
  t(3 + dim) = slog(p.noise_sd);
  return t;
}

KernelParams theta_to_params(const Eigen::VectorXd& t, int cont_dim) {
  auto sexp = [](double x) { return std::exp(std::clamp(x, -25.0, 25.0)); };
  KernelParams p;
  p.var_cont = sexp(t(0));
  p.length.resize(cont_dim);
  for (int m = 0; m < cont_dim; ++m) p.length[m] = sexp(t(1 + m));
  p.var_cat = sexp(t(1 + cont_dim));
  const double r = std::clamp(t(2 + cont_dim), -13.8, 13.8);
  p.recency = 1.0 / (1.0 + std::exp(-r));
  p.noise_sd = sexp(t(3 + cont_dim));
  return p;
}

KernelParams initial_params(const Cache& cache, int cont_dim) {
  (void)cache;  // features are standardized, so unit scales are the natural start
  KernelParams p;
  p.var_cont = 1.0;
  p.length.assign(cont_dim, 1.0);
  p.var_cat = 1.0;
  p.recency = 0.01;
  p.noise_sd = 0.1;
  return p;
}

RefitResult refit(const Cache& cache, const KernelParams& start, int max_iter) {
  RefitResult res;
  res.params = start;
  if (cache.size() < 2) {
    res.lml_before = res.lml_after = cache.empty() ? 0.0 : log_marginal(cache, start);
    return res;
  }
  const int dim = static_cast<int>(cache[0].h.size());
  const int n_par = dim + 4;

  auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const KernelParams p = theta_to_params(th, dim);
    const LmlGrad g = log_marginal_with_grad(cache, p);
    grad = -g.grad;
    return -g.value;
  };

  Eigen::VectorXd theta = params_to_theta(start);
  Eigen::VectorXd grad(n_par);
  double f = eval(theta, grad);
  res.lml_before = -f;

  Eigen::VectorXd best_theta = theta;
  double best_f = f;

  const int mem = 8;
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    // two-loop recursion
    Eigen::VectorXd d = -grad;
    const int k = static_cast<int>(s_hist.size());
    std::vector<double> a(k);
    for (int i = k - 1; i >= 0; --i) {
      a[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= a[i] * y_hist[i];
    }
    if (k > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      d *= gamma;
    }
    for (int i = 0; i < k; ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(d);
      d += (a[i] - b) * s_hist[i];
    }
    if (d.dot(grad) >= 0.0) {  // not a descent direction: reset
      d = -grad;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    const double slope = d.dot(grad);
    double step = (k == 0) ? std::min(1.0, 1.0 / std::max(1e-12, grad.norm())) : 1.0;
    Eigen::VectorXd theta_new;
    Eigen::VectorXd grad_new(n_par);
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      theta_new = theta + step * d;
      f_new = eval(theta_new, grad_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = theta_new - theta;
    const Eigen::VectorXd yv = grad_new - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-10 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > mem) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }

    theta = theta_new;
    const double f_prev = f;
    f = f_new;
    grad = grad_new;
    if (f < best_f) {
      best_f = f;
      best_theta = theta;
    }
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-5) break;
    if (std::abs(f_prev - f) <= 1e-10 * (1.0 + std::abs(f))) break;
  }

  res.params = theta_to_params(best_theta, dim);
  res.lml_after = -best_f;
  if (res.lml_after < res.lml_before) {  // never hand back a regression
    res.params = start;
    res.lml_after = res.lml_before;
  }
  return res;
}

double acquisition(double mean, double sd, Acquisition kind, double beta,
                   double best_y) {
  switch (kind) {
    case Acquisition::kUcb:
      return mean + beta * sd;
    case Acquisition::kEi: {
      if (sd <= 0.0) return std::max(mean - best_y, 0.0);
      const double z = (mean - best_y) / sd;
      return (mean - best_y) * phi_cdf(z) + sd * phi_pdf(z);
    }
    case Acquisition::kPi:
      if (sd <= 0.0) return mean >= best_y ? 1.0 : 0.0;
      return phi_cdf((mean - best_y) / sd);
  }
  return 0.0;
}

Selection select_action(const Model& m, const std::vector<double>& h_raw,
                        const std::vector<DegradationAction>& cands, int t,
                        Acquisition kind, double beta, double best_y) {
  if (cands.empty()) throw std::invalid_argument("select_action: no candidates");
  std::vector<Posterior> post;
  m.posterior_batch(h_raw, cands, t, post);
  Selection sel;
  sel.values.resize(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) {
    sel.values[k] = acquisition(post[k].mean, std::sqrt(post[k].var), kind, beta,
                                best_y);
    if (k == 0 || sel.values[k] > sel.acq) {
      sel.acq = sel.values[k];
      sel.index = static_cast<int>(k);
    }
  }
  return sel;
}

}  // namespace lab::gp
