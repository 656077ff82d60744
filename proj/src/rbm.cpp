#include "dfw/rbm.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dfw::rbm {

namespace {

inline double sigm(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Eigen::VectorXd sigm_vec(Eigen::VectorXd z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sigm(z[i]);
  return z;
}

void check_visible(const RbmParams& p, const Eigen::VectorXd& v, const char* op) {
  if (v.size() != p.n_visible)
    throw DimensionMismatch(std::string(op) + ": visible vector has " +
                            std::to_string(v.size()) + " entries, expected " +
                            std::to_string(p.n_visible));
}

void check_hidden(const RbmParams& p, const Eigen::VectorXd& h, const char* op) {
  if (h.size() != p.n_hidden)
    throw DimensionMismatch(std::string(op) + ": hidden vector has " +
                            std::to_string(h.size()) + " entries, expected " +
                            std::to_string(p.n_hidden));
}

}  // namespace

RbmParams init_params(int n_visible, int n_hidden, std::uint64_t seed) {
  RbmParams p;
  p.n_visible = n_visible;
  p.n_hidden = n_hidden;
  p.w.resize(n_hidden, n_visible);
  p.b = Eigen::VectorXd::Zero(n_visible);
  p.c = Eigen::VectorXd::Zero(n_hidden);
  Rng rng(seed);
  for (int j = 0; j < n_hidden; ++j)
    for (int i = 0; i < n_visible; ++i) p.w(j, i) = rng.normal(0.0, 0.01);
  return p;
}

double energy(const RbmParams& p, const Eigen::VectorXd& v,
              const Eigen::VectorXd& h) {
  check_visible(p, v, "energy");
  check_hidden(p, h, "energy");
  return v.dot(p.b) + h.dot(p.c) + h.dot(p.w * v);
}

Eigen::VectorXd p_h_given_v(const RbmParams& p, const Eigen::VectorXd& v) {
  check_visible(p, v, "p_h_given_v");
  return sigm_vec(-(p.c + p.w * v));
}

Eigen::VectorXd p_v_given_h(const RbmParams& p, const Eigen::VectorXd& h) {
  check_hidden(p, h, "p_v_given_h");
  return sigm_vec(-(p.b + p.w.transpose() * h));
}

Eigen::VectorXd sample_bernoulli(const Eigen::VectorXd& probs, Rng& rng) {
  Eigen::VectorXd out(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    out[i] = rng.uniform01() < probs[i] ? 1.0 : 0.0;
  return out;
}

int cd_iterations(int epoch) { return epoch / 10 + 1; }

double pretrain_rate(int epoch, int layer_index) {
  return 1.0 / (1.0 + std::exp(epoch / 10.0 - 5.0 * layer_index));
}

RbmParams cd_k_update(const RbmParams& p,
                      const std::vector<Eigen::VectorXd>& batch,
                      const CdConfig& cfg) {
  if (batch.empty()) throw EmptyBatch("cd_k_update: empty batch");
  for (const auto& v : batch) check_visible(p, v, "cd_k_update");

  const int k = cd_iterations(cfg.epoch);
  const double eps = pretrain_rate(cfg.epoch, cfg.layer_index);
  Rng rng(cfg.rng_seed);

  Eigen::MatrixXd pos_w = Eigen::MatrixXd::Zero(p.n_hidden, p.n_visible);
  Eigen::MatrixXd neg_w = Eigen::MatrixXd::Zero(p.n_hidden, p.n_visible);
  Eigen::VectorXd pos_b = Eigen::VectorXd::Zero(p.n_visible);
  Eigen::VectorXd neg_b = Eigen::VectorXd::Zero(p.n_visible);
  Eigen::VectorXd pos_c = Eigen::VectorXd::Zero(p.n_hidden);
  Eigen::VectorXd neg_c = Eigen::VectorXd::Zero(p.n_hidden);

  for (const auto& v0 : batch) {
    // data statistics: real-valued visible, hidden probabilities
    const Eigen::VectorXd h0_probs = p_h_given_v(p, v0);
    pos_w.noalias() += h0_probs * v0.transpose();
    pos_b += v0;
    pos_c += h0_probs;

    // k alternating Gibbs steps; binary hidden states drive the chain,
    // the final step keeps probabilities
    Eigen::VectorXd h_state = sample_bernoulli(h0_probs, rng);
    Eigen::VectorXd v_probs;
    Eigen::VectorXd h_probs;
    for (int step = 0; step < k; ++step) {
      v_probs = p_v_given_h(p, h_state);
      h_probs = p_h_given_v(p, v_probs);
      if (step + 1 < k) h_state = sample_bernoulli(h_probs, rng);
    }
    neg_w.noalias() += h_probs * v_probs.transpose();
    neg_b += v_probs;
    neg_c += h_probs;
  }

  const double scale = eps / static_cast<double>(batch.size());
  RbmParams out = p;
  // Under E(v,h) = +v.b + h.c + h'Wv with p = e^(-E)/Z, the log-likelihood
  // gradient is the negative of the familiar (data - reconstruction) form,
  // so the ascent step adds (reconstruction - data).
  out.w += scale * (neg_w - pos_w);
  out.b += scale * (neg_b - pos_b);
  out.c += scale * (neg_c - pos_c);
  return out;
}

ExactStats exact_model_expectations(const RbmParams& p) {
  const int n = p.n_visible + p.n_hidden;
  if (n > 20)
    throw TooLarge("exact_model_expectations: " + std::to_string(n) +
                   " units exceeds the enumeration bound of 20");

  ExactStats stats;
  stats.vh = Eigen::MatrixXd::Zero(p.n_hidden, p.n_visible);
  stats.v = Eigen::VectorXd::Zero(p.n_visible);
  stats.h = Eigen::VectorXd::Zero(p.n_hidden);

  const std::uint64_t total = 1ULL << n;
  Eigen::VectorXd v(p.n_visible), h(p.n_hidden);

  // shift energies so exp cannot overflow for large parameters
  std::vector<double> energies(total);
  double e_min = std::numeric_limits<double>::infinity();
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    for (int i = 0; i < p.n_visible; ++i) v[i] = (bits >> i) & 1;
    for (int j = 0; j < p.n_hidden; ++j) h[j] = (bits >> (p.n_visible + j)) & 1;
    energies[bits] = energy(p, v, h);
    e_min = std::min(e_min, energies[bits]);
  }

  double z = 0.0;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    for (int i = 0; i < p.n_visible; ++i) v[i] = (bits >> i) & 1;
    for (int j = 0; j < p.n_hidden; ++j) h[j] = (bits >> (p.n_visible + j)) & 1;
    const double weight = std::exp(e_min - energies[bits]);
    z += weight;
    stats.vh.noalias() += weight * (h * v.transpose());
    stats.v += weight * v;
    stats.h += weight * h;
  }
  stats.vh /= z;
  stats.v /= z;
  stats.h /= z;
  return stats;
}

}  // namespace dfw::rbm
