#include <atomic>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lab/gp.hpp"
#include "lab/kernels.hpp"
#include "lab/rng.hpp"

using namespace lab;

namespace {

struct GramInputs {
  std::vector<std::vector<double>> hz;
  std::vector<DegradationAction> acts;
  std::vector<int> slots;
  gp::KernelParams p;
};

GramInputs random_gram_inputs(int n, int cont_dim, int devices,
                              std::uint64_t seed) {
  rng::Stream g(seed);
  GramInputs in;
  for (int i = 0; i < n; ++i) {
    std::vector<double> h(cont_dim);
    for (double& v : h) v = g.normal();
    in.hz.push_back(h);
    DegradationAction a(devices);
    for (int& lvl : a) lvl = static_cast<int>(g.below(4));
    in.acts.push_back(a);
    in.slots.push_back(i + 1);
  }
  in.p.var_cont = 0.8;
  in.p.noise_sd = 0.22;
  in.p.var_cat = 0.6;
  in.p.recency = 0.02;
  in.p.length.assign(cont_dim, 0.0);
  for (int d = 0; d < cont_dim; ++d) in.p.length[d] = 0.5 + 0.3 * d;
  return in;
}

}  // namespace

TEST_CASE("gram: OpenMP variant is bit-identical to the serial reference") {
  for (int n : {1, 7, 33, 64}) {
    const GramInputs in = random_gram_inputs(n, 3, 4, 1000 + n);
    Eigen::MatrixXd a, b;
    par::build_gram_serial(in.hz, in.acts, in.slots, in.p, a);
    par::build_gram_omp(in.hz, in.acts, in.slots, in.p, b);
    REQUIRE(a.rows() == n);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gram: dispatcher honors the runtime switch") {
  const GramInputs in = random_gram_inputs(12, 2, 3, 7);
  Eigen::MatrixXd with_omp, without;
  const bool was = par::enabled();
  par::set_enabled(true);
  par::build_gram(in.hz, in.acts, in.slots, in.p, with_omp);
  par::set_enabled(false);
  par::build_gram(in.hz, in.acts, in.slots, in.p, without);
  par::set_enabled(was);
  CHECK((with_omp - without).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batch posterior: OpenMP variant matches serial bit for bit") {
  rng::Stream g(42);
  const int n = 24, devices = 3;
  const GramInputs in = random_gram_inputs(n, 2, devices, 99);
  Eigen::MatrixXd K;
  par::build_gram_serial(in.hz, in.acts, in.slots, in.p, K);
  K.diagonal().array() += in.p.noise_sd * in.p.noise_sd;
  const Eigen::MatrixXd L = K.llt().matrixL();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = g.normal();
  const Eigen::VectorXd alpha = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(y));

  std::vector<double> coef_a(n), coef_b(n);
  for (int i = 0; i < n; ++i) {
    coef_a[i] = 0.1 * g.normal();
    coef_b[i] = std::abs(g.normal());
  }
  std::vector<DegradationAction> cands;
  for (int c = 0; c < 17; ++c) {
    DegradationAction a(devices);
    for (int& lvl : a) lvl = static_cast<int>(g.below(4));
    cands.push_back(a);
  }
  std::vector<gp::Posterior> ser, omp;
  par::batch_posterior_serial(L, alpha, coef_a, coef_b, in.acts, cands, 0.55,
                              1.4, ser);
  par::batch_posterior_omp(L, alpha, coef_a, coef_b, in.acts, cands, 0.55, 1.4,
                           omp);
  REQUIRE(ser.size() == cands.size());
  REQUIRE(omp.size() == cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    CHECK(ser[c].mean == omp[c].mean);
    CHECK(ser[c].var == omp[c].var);
  }
}

TEST_CASE("map_indices: covers every index exactly once in both variants") {
  for (long long count : {0LL, 1LL, 5LL, 1000LL}) {
    std::vector<std::atomic<int>> hits(static_cast<std::size_t>(count) + 1);
    for (auto& h : hits) h.store(0);
    par::map_indices_omp(count, [&](long long i) { hits[i].fetch_add(1); });
    for (long long i = 0; i < count; ++i) CHECK(hits[i].load() == 1);

    std::vector<int> serial_hits(static_cast<std::size_t>(count) + 1, 0);
    par::map_indices_serial(count, [&](long long i) { serial_hits[i] += 1; });
    for (long long i = 0; i < count; ++i) CHECK(serial_hits[i] == 1);
  }
}

TEST_CASE("map_indices: results independent of scheduling") {
  std::vector<double> a(300), b(300);
  auto fill = [](std::vector<double>& v) {
    return [&v](long long i) {
      rng::Stream g(static_cast<std::uint64_t>(i) * 2654435761u + 1);
      v[i] = g.normal() + g.u01();
    };
  };
  par::map_indices_omp(300, fill(a));
  par::map_indices_serial(300, fill(b));
  CHECK(a == b);
}
