#include "dfw/dbn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dfw/sha.hpp"
#include "dfw/wire.hpp"

namespace dfw::dbn {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

Eigen::VectorXd softmax(Eigen::VectorXd logits) {
  const double m = logits.maxCoeff();
  logits = (logits.array() - m).exp();
  return logits / logits.sum();
}

void check_input(const DbnModel& model, const Eigen::VectorXd& x, const char* op) {
  if (x.size() != model.input_size())
    throw DimensionMismatch(std::string(op) + ": input has " +
                            std::to_string(x.size()) + " entries, expected " +
                            std::to_string(model.input_size()));
}

std::uint64_t digest_data(const std::vector<LabeledVector>& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [x, label] : data) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(x[i]);
      const auto* p = reinterpret_cast<const std::uint8_t*>(&bits);
      h = fnv1a64(std::span<const std::uint8_t>(p, 8), h);
    }
    const std::uint8_t lb = static_cast<std::uint8_t>(label);
    h = fnv1a64(std::span<const std::uint8_t>(&lb, 1), h);
  }
  return h;
}

}  // namespace

void validate(const DbnArch& arch) {
  if (arch.layer_sizes.size() < 2)
    throw Error("arch: need an input layer and at least one hidden layer");
  for (int s : arch.layer_sizes)
    if (s < 1) throw Error("arch: layer sizes must be >= 1");
  if (arch.n_classes != 2) throw Error("arch: the detector is strictly two-class");
  if (arch.batch_size < 1) throw Error("arch: batch_size must be >= 1");
  if (arch.pretrain_epochs < 0 || arch.finetune_epochs < 0)
    throw Error("arch: epoch counts must be >= 0");
}

int DbnModel::input_side() const {
  const int n = input_size();
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (side * side != n)
    throw Error("model input size " + std::to_string(n) + " is not a square image");
  return side;
}

std::vector<rbm::RbmParams> pretrain(const DbnArch& arch,
                                     const std::vector<Eigen::VectorXd>& data) {
  validate(arch);
  if (data.empty()) throw EmptyData("pretrain: no training vectors");
  for (const auto& x : data)
    if (x.size() != arch.layer_sizes.front())
      throw DimensionMismatch("pretrain: vector size " + std::to_string(x.size()) +
                              " != input layer " +
                              std::to_string(arch.layer_sizes.front()));

  const int n_rbms = static_cast<int>(arch.layer_sizes.size()) - 1;
  std::vector<rbm::RbmParams> rbms;
  rbms.reserve(n_rbms);
  for (int t = 0; t < n_rbms; ++t)
    rbms.push_back(rbm::init_params(arch.layer_sizes[t], arch.layer_sizes[t + 1],
                                    mix_seed(arch.rng_seed, 0x100 + t)));

  // project a sample through the already-trained stack below layer t
  auto lift = [&rbms](const Eigen::VectorXd& x, int t) {
    Eigen::VectorXd a = x;
    for (int s = 0; s < t; ++s) a = rbm::p_h_given_v(rbms[s], a);
    return a;
  };

  for (int t = 0; t < n_rbms; ++t) {
    const int layer_index = t + 1;  // 1-based depth for the rate schedule
    for (int epoch = 0; epoch < arch.pretrain_epochs; ++epoch) {
      Rng shuffle_rng(mix_seed(arch.rng_seed, 0x200 + t * 1000 + epoch));
      const auto order = shuffled_indices(data.size(), shuffle_rng);
      std::size_t batch_counter = 0;
      for (std::size_t start = 0; start < order.size();
           start += arch.batch_size, ++batch_counter) {
        const std::size_t end = std::min(order.size(),
                                         start + static_cast<std::size_t>(arch.batch_size));
        std::vector<Eigen::VectorXd> batch;
        batch.reserve(end - start);
        for (std::size_t i = start; i < end; ++i)
          batch.push_back(lift(data[order[i]], t));
        rbm::CdConfig cfg;
        cfg.epoch = epoch;
        cfg.layer_index = layer_index;
        cfg.batch_size = arch.batch_size;
        cfg.rng_seed = mix_seed(arch.rng_seed,
                                0x300 + (static_cast<std::uint64_t>(t) << 40) +
                                    (static_cast<std::uint64_t>(epoch) << 20) +
                                    batch_counter);
        rbms[t] = rbm::cd_k_update(rbms[t], batch, cfg);
      }
    }
  }
  return rbms;
}

DbnModel assemble(const DbnArch& arch, std::vector<rbm::RbmParams> rbms) {
  validate(arch);
  DbnModel model;
  model.arch = arch;
  model.rbms = std::move(rbms);
  for (std::size_t t = 0; t + 1 < model.rbms.size(); ++t)
    if (model.rbms[t].n_hidden != model.rbms[t + 1].n_visible)
      throw DimensionMismatch("assemble: RBM stack dimensions do not chain");
  const int last_hidden = model.rbms.back().n_hidden;
  model.softmax_w = Eigen::MatrixXd::Zero(arch.n_classes, last_hidden);
  model.softmax_b = Eigen::VectorXd::Zero(arch.n_classes);
  model.fingerprint.seed = arch.rng_seed;
  return model;
}

Forward forward(const DbnModel& model, const Eigen::VectorXd& x) {
  check_input(model, x, "forward");
  Forward fw;
  fw.activations.reserve(model.rbms.size());
  Eigen::VectorXd a = x;
  for (const auto& layer : model.rbms) {
    a = rbm::p_h_given_v(layer, a);
    fw.activations.push_back(a);
  }
  fw.probs = softmax(model.softmax_w * a + model.softmax_b);
  return fw;
}

Gradients loss_gradients(const DbnModel& model,
                         const std::vector<LabeledVector>& batch) {
  if (batch.empty()) throw EmptyBatch("loss_gradients: empty batch");
  const int n_rbms = static_cast<int>(model.rbms.size());

  Gradients g;
  g.w.reserve(n_rbms);
  g.c.reserve(n_rbms);
  for (const auto& layer : model.rbms) {
    g.w.push_back(Eigen::MatrixXd::Zero(layer.n_hidden, layer.n_visible));
    g.c.push_back(Eigen::VectorXd::Zero(layer.n_hidden));
  }
  g.softmax_w = Eigen::MatrixXd::Zero(model.softmax_w.rows(), model.softmax_w.cols());
  g.softmax_b = Eigen::VectorXd::Zero(model.softmax_b.size());

  for (const auto& [x, label] : batch) {
    if (label != 0 && label != 1)
      throw UnknownLabel("loss_gradients: label must be 0 or 1");
    const Forward fw = forward(model, x);
    g.loss += -std::log(std::max(fw.probs[label], 1e-300));

    // softmax head: delta = probs - onehot
    Eigen::VectorXd delta = fw.probs;
    delta[label] -= 1.0;
    g.softmax_w.noalias() += delta * fw.activations.back().transpose();
    g.softmax_b += delta;

    // backpropagate; activation is a = sigm(-(c + W a_prev)), so
    // dz carries a factor a(1-a) and the parameter gradients are negated.
    Eigen::VectorXd da = model.softmax_w.transpose() * delta;
    for (int t = n_rbms - 1; t >= 0; --t) {
      const Eigen::VectorXd& a = fw.activations[t];
      const Eigen::VectorXd a_prev = t > 0 ? fw.activations[t - 1] : x;
      const Eigen::VectorXd dz =
          (da.array() * a.array() * (1.0 - a.array())).matrix();
      g.w[t].noalias() -= dz * a_prev.transpose();
      g.c[t] -= dz;
      if (t > 0) da = -(model.rbms[t].w.transpose() * dz);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto& m : g.w) m *= inv_n;
  for (auto& v : g.c) v *= inv_n;
  g.softmax_w *= inv_n;
  g.softmax_b *= inv_n;
  g.loss *= inv_n;
  return g;
}

double batch_loss(const DbnModel& model, const std::vector<LabeledVector>& batch) {
  if (batch.empty()) throw EmptyBatch("batch_loss: empty batch");
  double loss = 0.0;
  for (const auto& [x, label] : batch) {
    if (label != 0 && label != 1) throw UnknownLabel("batch_loss: label must be 0 or 1");
    loss += -std::log(std::max(forward(model, x).probs[label], 1e-300));
  }
  return loss / static_cast<double>(batch.size());
}

DbnModel finetune(const DbnModel& model, const std::vector<LabeledVector>& data) {
  if (data.empty()) throw EmptyData("finetune: no labeled data");
  for (const auto& [x, label] : data) {
    check_input(model, x, "finetune");
    if (label != 0 && label != 1) throw UnknownLabel("finetune: label must be 0 or 1");
  }

  DbnModel out = model;
  const int n_rbms = static_cast<int>(out.rbms.size());
  const int head_depth = n_rbms + 1;

  for (int epoch = 0; epoch < out.arch.finetune_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(out.arch.rng_seed, 0x400 + epoch));
    const auto order = shuffled_indices(data.size(), shuffle_rng);
    for (std::size_t start = 0; start < order.size();
         start += out.arch.batch_size) {
      const std::size_t end = std::min(order.size(),
                                       start + static_cast<std::size_t>(out.arch.batch_size));
      std::vector<LabeledVector> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);

      const Gradients g = loss_gradients(out, batch);
      for (int t = 0; t < n_rbms; ++t) {
        const double eps = rbm::pretrain_rate(epoch, t + 1);
        out.rbms[t].w -= eps * g.w[t];
        out.rbms[t].c -= eps * g.c[t];
      }
      const double head_eps = rbm::pretrain_rate(epoch, head_depth);
      out.softmax_w -= head_eps * g.softmax_w;
      out.softmax_b -= head_eps * g.softmax_b;
    }
  }
  return out;
}

double predict_malicious(const DbnModel& model, const Eigen::VectorXd& x) {
  return forward(model, x).probs[1];
}

DbnModel train_model(const DbnArch& arch, const std::vector<LabeledVector>& data) {
  if (data.empty()) throw EmptyData("train_model: no training data");
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(data.size());
  for (const auto& [x, label] : data) xs.push_back(x);
  DbnModel model = assemble(arch, pretrain(arch, xs));
  model = finetune(model, data);
  model.fingerprint.seed = arch.rng_seed;
  model.fingerprint.data_digest = digest_data(data);
  return model;
}

namespace {

void put_matrix(ByteVec& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) wire::put_f64(out, m(r, c));
}

void put_vector(ByteVec& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) wire::put_f64(out, v[i]);
}

Eigen::MatrixXd get_matrix(wire::Cursor& cur, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = cur.f64();
  return m;
}

Eigen::VectorXd get_vector(wire::Cursor& cur, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = cur.f64();
  return v;
}

}  // namespace

ByteVec serialize_model(const DbnModel& model) {
  ByteVec out;
  out.insert(out.end(), {'D', 'B', 'N', '1'});
  wire::put_u32(out, kFormatVersion);
  wire::put_u64(out, model.fingerprint.seed);
  wire::put_u32(out, static_cast<std::uint32_t>(model.arch.layer_sizes.size()));
  for (int s : model.arch.layer_sizes) wire::put_u32(out, static_cast<std::uint32_t>(s));
  wire::put_u32(out, static_cast<std::uint32_t>(model.arch.n_classes));
  for (const auto& layer : model.rbms) {
    put_matrix(out, layer.w);
    put_vector(out, layer.b);
    put_vector(out, layer.c);
  }
  put_matrix(out, model.softmax_w);
  put_vector(out, model.softmax_b);
  const Digest32 sum = sha256(out);
  out.insert(out.end(), sum.begin(), sum.end());
  return out;
}

DbnModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 'D' || bytes[1] != 'B' || bytes[2] != 'N' ||
      bytes[3] != '1')
    throw BadMagic("model file: bad magic");
  if (bytes.size() < 36) throw ParseError("model file: truncated");
  const auto payload = bytes.first(bytes.size() - 32);
  const auto stored = bytes.last(32);
  const Digest32 computed = sha256(payload);
  if (!std::equal(computed.begin(), computed.end(), stored.begin()))
    throw ChecksumMismatch("model file: checksum mismatch");

  wire::Cursor cur(payload.subspan(4));
  const std::uint32_t version = cur.u32();
  if (version != kFormatVersion)
    throw VersionUnsupported("model file: version " + std::to_string(version));

  DbnModel model;
  model.fingerprint.seed = cur.u64();
  const std::uint32_t n_layers = cur.u32();
  if (n_layers < 2 || n_layers > 64) throw ParseError("model file: bad layer count");
  model.arch.layer_sizes.resize(n_layers);
  for (auto& s : model.arch.layer_sizes) {
    s = static_cast<int>(cur.u32());
    if (s < 1) throw ParseError("model file: bad layer size");
  }
  model.arch.n_classes = static_cast<int>(cur.u32());
  if (model.arch.n_classes != 2) throw ParseError("model file: class count must be 2");
  model.arch.rng_seed = model.fingerprint.seed;
  model.arch.pretrain_epochs = 0;
  model.arch.finetune_epochs = 0;

  for (std::uint32_t t = 0; t + 1 < n_layers; ++t) {
    rbm::RbmParams layer;
    layer.n_visible = model.arch.layer_sizes[t];
    layer.n_hidden = model.arch.layer_sizes[t + 1];
    layer.w = get_matrix(cur, layer.n_hidden, layer.n_visible);
    layer.b = get_vector(cur, layer.n_visible);
    layer.c = get_vector(cur, layer.n_hidden);
    model.rbms.push_back(std::move(layer));
  }
  const int last_hidden = model.arch.layer_sizes.back();
  model.softmax_w = get_matrix(cur, model.arch.n_classes, last_hidden);
  model.softmax_b = get_vector(cur, model.arch.n_classes);
  if (!cur.done()) throw ParseError("model file: trailing bytes");
  return model;
}

void save_model(const DbnModel& model, const std::string& path) {
  const ByteVec bytes = serialize_model(model);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("save_model: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoFailure("save_model: write failed for " + path);
}

DbnModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("load_model: cannot open " + path);
  ByteVec bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace dfw::dbn
