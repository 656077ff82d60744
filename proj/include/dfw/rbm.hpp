#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dfw/common.hpp"

// One Restricted Boltzmann Machine under the energy convention
//   E(v,h) = sum_i v_i b_i + sum_k h_k c_k + sum_{i,k} v_i h_k w_ki
// with p(v,h) = exp(-E)/Z. The conditionals carry the matching negated
// arguments:
//   p(h_j=1|v) = sigm(-c_j - sum_i w_ji v_i)
//   p(v_i=1|h) = sigm(-b_i - sum_j w_ij h_j)

namespace dfw::rbm {

struct RbmParams {
  int n_visible = 0;
  int n_hidden = 0;
  Eigen::MatrixXd w;  // [hidden][visible]
  Eigen::VectorXd b;  // visible biases
  Eigen::VectorXd c;  // hidden biases
};

struct CdConfig {
  int epoch = 0;         // 0-based
  int layer_index = 1;   // 1-based depth of the RBM in its stack
  int batch_size = 10;
  std::uint64_t rng_seed = 0;
};

// Gaussian(0, 0.01) weights, zero biases, seeded.
RbmParams init_params(int n_visible, int n_hidden, std::uint64_t seed);

double energy(const RbmParams& p, const Eigen::VectorXd& v,
              const Eigen::VectorXd& h);

// Mean-field conditionals; accept real-valued inputs in [0,1].
Eigen::VectorXd p_h_given_v(const RbmParams& p, const Eigen::VectorXd& v);
Eigen::VectorXd p_v_given_h(const RbmParams& p, const Eigen::VectorXd& h);

Eigen::VectorXd sample_bernoulli(const Eigen::VectorXd& probs, Rng& rng);

// CD-k schedule: k = floor(epoch/10) + 1
int cd_iterations(int epoch);

// pretraining learning rate: 1 / (1 + e^(epoch/10 - 5*layer))
double pretrain_rate(int epoch, int layer_index);

// One CD-k parameter update over a mini-batch. k and the learning rate come
// from cfg via cd_iterations / pretrain_rate; sampling is seeded by
// cfg.rng_seed, so identical inputs give bit-identical results. The update
// direction raises the probability of the batch under the energy convention
// above (see exact_model_expectations tests).
RbmParams cd_k_update(const RbmParams& p,
                      const std::vector<Eigen::VectorXd>& batch,
                      const CdConfig& cfg);

struct ExactStats {
  Eigen::MatrixXd vh;  // <v_i h_j>, indexed [hidden][visible] like w
  Eigen::VectorXd v;   // <v_i>
  Eigen::VectorXd h;   // <h_j>
};

// Exact Boltzmann expectations by full enumeration; n_visible + n_hidden
// must be <= 20 (throws TooLarge).
ExactStats exact_model_expectations(const RbmParams& p);

}  // namespace dfw::rbm
