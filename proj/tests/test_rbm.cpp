#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "dfw/common.hpp"
#include "dfw/rbm.hpp"

using namespace dfw;
using namespace dfw::rbm;

namespace {

// Test-local enumeration oracle. Computes the Boltzmann distribution with its
// own arithmetic so it stays independent of the library's energy/expectation
// code paths.
struct OracleDist {
  int nv, nh;
  std::vector<double> p;  // indexed by (h_bits << nv) | v_bits

  double& at(unsigned v_bits, unsigned h_bits) { return p[(h_bits << nv) | v_bits]; }
  double at(unsigned v_bits, unsigned h_bits) const { return p[(h_bits << nv) | v_bits]; }
};

double oracle_energy(const RbmParams& m, unsigned v_bits, unsigned h_bits) {
  double e = 0.0;
  for (int i = 0; i < m.n_visible; ++i)
    if ((v_bits >> i) & 1) e += m.b[i];
  for (int j = 0; j < m.n_hidden; ++j)
    if ((h_bits >> j) & 1) e += m.c[j];
  for (int j = 0; j < m.n_hidden; ++j)
    for (int i = 0; i < m.n_visible; ++i)
      if (((v_bits >> i) & 1) && ((h_bits >> j) & 1)) e += m.w(j, i);
  return e;
}

OracleDist oracle_distribution(const RbmParams& m) {
  OracleDist d{m.n_visible, m.n_hidden, {}};
  d.p.resize(1u << (m.n_visible + m.n_hidden));
  double z = 0.0;
  for (unsigned h = 0; h < (1u << m.n_hidden); ++h)
    for (unsigned v = 0; v < (1u << m.n_visible); ++v) {
      const double w = std::exp(-oracle_energy(m, v, h));
      d.at(v, h) = w;
      z += w;
    }
  for (auto& x : d.p) x /= z;
  return d;
}

double oracle_p_visible(const RbmParams& m, unsigned v_bits) {
  const auto d = oracle_distribution(m);
  double p = 0.0;
  for (unsigned h = 0; h < (1u << m.n_hidden); ++h) p += d.at(v_bits, h);
  return p;
}

RbmParams random_params(int nv, int nh, std::uint64_t seed, double scale) {
  RbmParams m;
  m.n_visible = nv;
  m.n_hidden = nh;
  m.w.resize(nh, nv);
  m.b.resize(nv);
  m.c.resize(nh);
  Rng rng(seed);
  for (int j = 0; j < nh; ++j)
    for (int i = 0; i < nv; ++i) m.w(j, i) = scale * (2.0 * rng.uniform01() - 1.0);
  for (int i = 0; i < nv; ++i) m.b[i] = scale * (2.0 * rng.uniform01() - 1.0);
  for (int j = 0; j < nh; ++j) m.c[j] = scale * (2.0 * rng.uniform01() - 1.0);
  return m;
}

Eigen::VectorXd bits_to_vec(unsigned bits, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = (bits >> i) & 1;
  return v;
}

}  // namespace

TEST_SUITE("rbm") {

TEST_CASE("energy sums biases and pairwise terms") {
  RbmParams zero = init_params(3, 2, 1);
  zero.w.setZero();
  CHECK(energy(zero, bits_to_vec(0b101, 3), bits_to_vec(0b10, 2)) == 0.0);

  RbmParams m;
  m.n_visible = 1;
  m.n_hidden = 1;
  m.w = Eigen::MatrixXd::Constant(1, 1, 0.1);
  m.b = Eigen::VectorXd::Constant(1, 0.5);
  m.c = Eigen::VectorXd::Constant(1, -0.25);
  CHECK(energy(m, bits_to_vec(1, 1), bits_to_vec(1, 1)) == doctest::Approx(0.35));
  CHECK(energy(m, bits_to_vec(0, 1), bits_to_vec(0, 1)) == 0.0);
}

TEST_CASE("energy checks dimensions") {
  const RbmParams m = init_params(3, 2, 1);
  CHECK_THROWS_AS(energy(m, bits_to_vec(0, 2), bits_to_vec(0, 2)), DimensionMismatch);
  CHECK_THROWS_AS(energy(m, bits_to_vec(0, 3), bits_to_vec(0, 3)), DimensionMismatch);
}

TEST_CASE("conditionals follow the negated-argument sigmoid") {
  RbmParams m = init_params(2, 2, 1);
  m.w.setZero();
  auto h = p_h_given_v(m, Eigen::VectorXd::Zero(2));
  CHECK(h[0] == doctest::Approx(0.5));
  CHECK(h[1] == doctest::Approx(0.5));

  m.c[0] = -5.0;
  m.c[1] = 5.0;
  h = p_h_given_v(m, Eigen::VectorXd::Zero(2));
  CHECK(h[0] == doctest::Approx(0.993307).epsilon(1e-6));
  CHECK(h[1] == doctest::Approx(0.006693).epsilon(1e-4));

  RbmParams mv = init_params(2, 2, 1);
  mv.w.setZero();
  mv.b[0] = -5.0;
  const auto v = p_v_given_h(mv, Eigen::VectorXd::Zero(2));
  CHECK(v[0] == doctest::Approx(0.993307).epsilon(1e-6));
  CHECK(v[1] == doctest::Approx(0.5));
}

TEST_CASE("p_v_given_h mirrors p_h_given_v under transposition") {
  const RbmParams m = random_params(3, 4, 42, 1.0);
  RbmParams t;
  t.n_visible = m.n_hidden;
  t.n_hidden = m.n_visible;
  t.w = m.w.transpose();
  t.b = m.c;
  t.c = m.b;
  Eigen::VectorXd x(4);
  x << 0.2, 0.8, 0.5, 1.0;
  const auto a = p_v_given_h(m, x);
  const auto b = p_h_given_v(t, x);
  REQUIRE(a.size() == b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));
}

TEST_CASE("sample_bernoulli respects degenerate probabilities") {
  Rng rng(3);
  CHECK(sample_bernoulli(Eigen::VectorXd::Zero(100), rng).sum() == 0.0);
  CHECK(sample_bernoulli(Eigen::VectorXd::Ones(100), rng).sum() == 100.0);
}

TEST_CASE("sample_bernoulli hits the target rate") {
  Rng rng(12345);
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(10000, 0.5);
  const double mean = sample_bernoulli(half, rng).mean();
  CHECK(mean > 0.48);
  CHECK(mean < 0.52);
}

TEST_CASE("cd_iterations grows one step every ten epochs") {
  CHECK(cd_iterations(0) == 1);
  CHECK(cd_iterations(9) == 1);
  CHECK(cd_iterations(10) == 2);
  CHECK(cd_iterations(25) == 3);
  int prev = cd_iterations(0);
  for (int ep = 1; ep <= 200; ++ep) {
    const int k = cd_iterations(ep);
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("pretrain_rate matches the logistic schedule") {
  CHECK(pretrain_rate(0, 1) == doctest::Approx(0.993307).epsilon(1e-6));
  CHECK(pretrain_rate(50, 1) == doctest::Approx(0.5));
  CHECK(pretrain_rate(100, 2) == doctest::Approx(0.5));
  // strictly decreasing in epoch, strictly increasing in layer
  for (int ep = 0; ep < 100; ++ep)
    CHECK(pretrain_rate(ep + 1, 1) < pretrain_rate(ep, 1));
  for (int l = 1; l < 5; ++l) CHECK(pretrain_rate(30, l + 1) > pretrain_rate(30, l));
}

TEST_CASE("exact expectations are uniform for zero parameters") {
  RbmParams m = init_params(3, 2, 7);
  m.w.setZero();
  const auto stats = exact_model_expectations(m);
  for (int j = 0; j < 2; ++j) {
    CHECK(stats.h[j] == doctest::Approx(0.5));
    for (int i = 0; i < 3; ++i) CHECK(stats.vh(j, i) == doctest::Approx(0.25));
  }
  for (int i = 0; i < 3; ++i) CHECK(stats.v[i] == doctest::Approx(0.5));
}

TEST_CASE("exact expectations match an independent hand enumeration") {
  // 2 visible, 1 hidden; values frozen from a separate enumeration
  RbmParams m;
  m.n_visible = 2;
  m.n_hidden = 1;
  m.w.resize(1, 2);
  m.w << 0.5, -0.4;
  m.b.resize(2);
  m.b << 0.3, -0.2;
  m.c.resize(1);
  m.c << 0.1;
  const auto stats = exact_model_expectations(m);
  CHECK(stats.vh(0, 0) == doctest::Approx(0.15161034983084348).epsilon(1e-12));
  CHECK(stats.vh(0, 1) == doctest::Approx(0.3157423260298637).epsilon(1e-12));
  CHECK(stats.v[0] == doctest::Approx(0.3690594194473491).epsilon(1e-12));
  CHECK(stats.v[1] == doctest::Approx(0.5966935391617637).epsilon(1e-12));
  CHECK(stats.h[0] == doctest::Approx(0.48902538856244665).epsilon(1e-12));
}

TEST_CASE("exact expectations survive extreme parameters") {
  RbmParams m = random_params(3, 2, 4, 400.0);  // exp(-E) alone would overflow
  const auto stats = exact_model_expectations(m);
  CHECK(stats.vh.allFinite());
  CHECK(stats.v.allFinite());
  CHECK(stats.h.allFinite());
  CHECK(stats.v.minCoeff() >= 0.0);
  CHECK(stats.v.maxCoeff() <= 1.0);
}

TEST_CASE("exact expectations refuse oversized models") {
  CHECK_THROWS_AS(exact_model_expectations(init_params(12, 9, 1)), TooLarge);
}

TEST_CASE("configuration probabilities are normalized and obey the ratio law") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const RbmParams m = random_params(4, 3, seed, 1.5);
    const auto dist = oracle_distribution(m);
    double total = 0.0;
    for (double p : dist.p) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // p(v,h)/p(v',h') = exp(E' - E), checkable without the partition function
    Rng rng(seed + 100);
    for (int pair = 0; pair < 50; ++pair) {
      const unsigned v1 = static_cast<unsigned>(rng.below(1u << 4));
      const unsigned h1 = static_cast<unsigned>(rng.below(1u << 3));
      const unsigned v2 = static_cast<unsigned>(rng.below(1u << 4));
      const unsigned h2 = static_cast<unsigned>(rng.below(1u << 3));
      const double lhs = dist.at(v1, h1) / dist.at(v2, h2);
      const double rhs =
          std::exp(energy(m, bits_to_vec(v2, 4), bits_to_vec(h2, 3)) -
                   energy(m, bits_to_vec(v1, 4), bits_to_vec(h1, 3)));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("gibbs sampling converges to the exact distribution") {
  const RbmParams m = random_params(2, 2, 5, 1.0);
  const auto dist = oracle_distribution(m);

  Rng rng(99);
  Eigen::VectorXd v = sample_bernoulli(Eigen::VectorXd::Constant(2, 0.5), rng);
  Eigen::VectorXd h = sample_bernoulli(p_h_given_v(m, v), rng);
  std::vector<double> counts(16, 0.0);
  const int sweeps = 30000;
  for (int s = 0; s < sweeps; ++s) {
    v = sample_bernoulli(p_v_given_h(m, h), rng);
    h = sample_bernoulli(p_h_given_v(m, v), rng);
    unsigned v_bits = 0, h_bits = 0;
    for (int i = 0; i < 2; ++i) v_bits |= static_cast<unsigned>(v[i]) << i;
    for (int j = 0; j < 2; ++j) h_bits |= static_cast<unsigned>(h[j]) << j;
    counts[(h_bits << 2) | v_bits] += 1.0;
  }
  double tv = 0.0;
  for (unsigned idx = 0; idx < 16; ++idx)
    tv += std::abs(counts[idx] / sweeps - dist.p[idx]);
  tv /= 2.0;
  CHECK(tv < 0.05);
}

TEST_CASE("cd update raises the probability of the training data") {
  // zero-initialised 4x2 model, all-ones batch, single update
  RbmParams m = init_params(4, 2, 3);
  m.w.setZero();
  const unsigned ones = 0b1111;
  const double before = oracle_p_visible(m, ones);

  CdConfig cfg;
  cfg.epoch = 0;
  cfg.layer_index = 1;
  cfg.rng_seed = 17;
  const std::vector<Eigen::VectorXd> batch(10, Eigen::VectorXd::Ones(4));
  const RbmParams after_params = cd_k_update(m, batch, cfg);
  const double after = oracle_p_visible(after_params, ones);
  CHECK(after > before);
}

TEST_CASE("cd update is a no-op when the learning rate underflows to zero") {
  const RbmParams m = random_params(2, 1, 9, 0.5);
  CdConfig cfg;
  cfg.epoch = 7200;  // rate = 1/(1+e^715) == 0 in double precision
  cfg.layer_index = 1;
  cfg.rng_seed = 4;
  REQUIRE(pretrain_rate(cfg.epoch, cfg.layer_index) == 0.0);
  const auto out = cd_k_update(m, {Eigen::VectorXd::Ones(2)}, cfg);
  CHECK(out.w == m.w);
  CHECK(out.b == m.b);
  CHECK(out.c == m.c);
}

TEST_CASE("cd update is bit-reproducible per seed") {
  const RbmParams m = random_params(5, 3, 21, 0.3);
  std::vector<Eigen::VectorXd> batch;
  Rng rng(2);
  for (int s = 0; s < 6; ++s) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = rng.uniform01();
    batch.push_back(x);
  }
  CdConfig cfg;
  cfg.epoch = 12;
  cfg.layer_index = 2;
  cfg.rng_seed = 77;
  const auto a = cd_k_update(m, batch, cfg);
  const auto b = cd_k_update(m, batch, cfg);
  CHECK(a.w == b.w);
  CHECK(a.b == b.b);
  CHECK(a.c == b.c);
}

TEST_CASE("cd update validates its batch") {
  const RbmParams m = init_params(3, 2, 1);
  CdConfig cfg;
  CHECK_THROWS_AS(cd_k_update(m, {}, cfg), EmptyBatch);
  CHECK_THROWS_AS(cd_k_update(m, {Eigen::VectorXd::Ones(2)}, cfg), DimensionMismatch);
}

TEST_CASE("long-chain reconstruction statistics approach the exact expectations") {
  const RbmParams m = random_params(4, 2, 31, 0.8);
  const auto exact = exact_model_expectations(m);

  // many independent chains, generous burn-in per chain
  Rng rng(404);
  Eigen::MatrixXd vh = Eigen::MatrixXd::Zero(2, 4);
  const int chains = 4000;
  const int burn = 40;
  for (int cchain = 0; cchain < chains; ++cchain) {
    Eigen::VectorXd v = sample_bernoulli(Eigen::VectorXd::Constant(4, 0.5), rng);
    Eigen::VectorXd h = sample_bernoulli(p_h_given_v(m, v), rng);
    for (int s = 0; s < burn; ++s) {
      v = sample_bernoulli(p_v_given_h(m, h), rng);
      h = sample_bernoulli(p_h_given_v(m, v), rng);
    }
    const Eigen::VectorXd v_probs = p_v_given_h(m, h);
    const Eigen::VectorXd h_probs = p_h_given_v(m, v_probs);
    vh += h_probs * v_probs.transpose();
  }
  vh /= chains;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(vh(j, i) - exact.vh(j, i)) < 0.05);
}

}  // TEST_SUITE
