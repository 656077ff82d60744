#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfw/common.hpp"
#include "dfw/rbm.hpp"

// Deep Belief Network: greedy layer-wise RBM pretraining, a two-class softmax
// head, SGD fine-tuning with the depth-dependent rate schedule, and
// deterministic mean-field inference.

namespace dfw::dbn {

struct DbnArch {
  std::vector<int> layer_sizes = {4096, 3000, 3000};  // input + hidden sizes
  int n_classes = 2;
  int pretrain_epochs = 15;
  int finetune_epochs = 30;
  int batch_size = 10;
  std::uint64_t rng_seed = 0;
};

// throws on inconsistent sizes / class count
void validate(const DbnArch& arch);

struct TrainingFingerprint {
  std::uint64_t seed = 0;
  std::uint64_t data_digest = 0;  // provenance only; not serialized
};

struct DbnModel {
  std::vector<rbm::RbmParams> rbms;
  Eigen::MatrixXd softmax_w;  // [class][last hidden]
  Eigen::VectorXd softmax_b;
  DbnArch arch;
  TrainingFingerprint fingerprint;

  int input_size() const { return arch.layer_sizes.front(); }
  // byteplot side length; input layers are square images
  int input_side() const;
};

using LabeledVector = std::pair<Eigen::VectorXd, int>;  // label: 0 benign, 1 malicious

// Greedy bottom-up pretraining; RBM t trains on the mean-field activations of
// RBM t-1. Deterministic per (arch, data order, seed); the derived streams
// are mix_seed(seed, 0x100 + t) for layer init, mix_seed(seed, 0x200 +
// t*1000 + epoch) for the epoch shuffle and mix_seed(seed, 0x300 + (t<<40) +
// (epoch<<20) + batch) for each CD update.
std::vector<rbm::RbmParams> pretrain(const DbnArch& arch,
                                     const std::vector<Eigen::VectorXd>& data);

// Zero-initialised softmax head on top of pretrained RBMs.
DbnModel assemble(const DbnArch& arch, std::vector<rbm::RbmParams> rbms);

struct Forward {
  std::vector<Eigen::VectorXd> activations;  // one per RBM layer
  Eigen::VectorXd probs;                     // class probabilities, sum to 1
};

Forward forward(const DbnModel& model, const Eigen::VectorXd& x);

// Analytic cross-entropy gradients for a batch; layout mirrors the model.
// RBM visible biases do not enter the feed-forward path and have no gradient.
struct Gradients {
  std::vector<Eigen::MatrixXd> w;  // per RBM layer
  std::vector<Eigen::VectorXd> c;
  Eigen::MatrixXd softmax_w;
  Eigen::VectorXd softmax_b;
  double loss = 0.0;  // mean cross-entropy over the batch
};

Gradients loss_gradients(const DbnModel& model,
                         const std::vector<LabeledVector>& batch);

double batch_loss(const DbnModel& model, const std::vector<LabeledVector>& batch);

// Mini-batch SGD with the per-depth learning-rate schedule (RBM t uses depth
// t+1, the softmax head depth n_rbms+1). Deterministic per seed.
DbnModel finetune(const DbnModel& model, const std::vector<LabeledVector>& data);

double predict_malicious(const DbnModel& model, const Eigen::VectorXd& x);

// pretrain + finetune; fingerprint records the seed and a digest of the data.
DbnModel train_model(const DbnArch& arch, const std::vector<LabeledVector>& data);

// Binary model file: magic "DBN1", version, seed, layer sizes, parameters,
// trailing SHA-256. Little-endian f64 payload.
void save_model(const DbnModel& model, const std::string& path);
DbnModel load_model(const std::string& path);

ByteVec serialize_model(const DbnModel& model);
DbnModel deserialize_model(std::span<const std::uint8_t> bytes);

}  // namespace dfw::dbn
