// Python bindings for the decentralised-firewall toolkit.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "dfw/chain.hpp"
#include "dfw/common.hpp"
#include "dfw/consensus.hpp"
#include "dfw/dataset.hpp"
#include "dfw/dbn.hpp"
#include "dfw/imgcodec.hpp"
#include "dfw/netsim.hpp"
#include "dfw/rbm.hpp"
#include "dfw/sha.hpp"

namespace py = pybind11;
using namespace dfw;

namespace {

py::bytes digest_bytes(const Digest32& d) {
  return py::bytes(reinterpret_cast<const char*>(d.data()), d.size());
}

Digest32 digest_from(const py::bytes& b) {
  const std::string s = b;
  if (s.size() != 32) throw py::value_error("expected 32 bytes");
  Digest32 d{};
  std::copy(s.begin(), s.end(), d.begin());
  return d;
}

ByteVec to_byte_vec(const py::bytes& b) {
  const std::string s = b;
  return ByteVec(s.begin(), s.end());
}

py::bytes from_byte_vec(const ByteVec& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

}  // namespace

PYBIND11_MODULE(_dfw, m) {
  m.doc() = "byteplot DBN malware scoring over a PoW verdict chain";

  py::register_exception<Error>(m, "DfwError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform01", &Rng::uniform01)
      .def("normal", &Rng::normal, py::arg("mean"), py::arg("stddev"));

  m.def("mix_seed", &mix_seed, py::arg("base"), py::arg("salt"));
  m.def("sha256",
        [](const py::bytes& data) { return digest_bytes(sha256(to_byte_vec(data))); });

  // ---- imgcodec ----
  py::class_<imgcodec::GrayImage>(m, "GrayImage")
      .def(py::init([](int width, int height, const py::bytes& pixels) {
             imgcodec::GrayImage img;
             img.width = width;
             img.height = height;
             const std::string s = pixels;
             if (s.size() != static_cast<std::size_t>(width) * height)
               throw py::value_error("pixel buffer does not match dimensions");
             img.pixels.assign(s.begin(), s.end());
             return img;
           }),
           py::arg("width"), py::arg("height"), py::arg("pixels"))
      .def_readonly("width", &imgcodec::GrayImage::width)
      .def_readonly("height", &imgcodec::GrayImage::height)
      .def_property_readonly("pixels", [](const imgcodec::GrayImage& img) {
        return py::bytes(reinterpret_cast<const char*>(img.pixels.data()),
                         img.pixels.size());
      });

  m.def("byteplot_width", &imgcodec::byteplot_width, py::arg("n_bytes"));
  m.def("bytes_to_image",
        [](const py::bytes& data) { return imgcodec::bytes_to_image(to_byte_vec(data)); },
        py::arg("data"));
  m.def("downscale", &imgcodec::downscale, py::arg("image"), py::arg("target_w"),
        py::arg("target_h"));
  m.def("to_input_vector", &imgcodec::to_input_vector, py::arg("image"),
        py::arg("expected_w"), py::arg("expected_h"));
  m.def("write_pgm", &imgcodec::write_pgm, py::arg("image"), py::arg("path"));
  m.def("read_pgm", &imgcodec::read_pgm, py::arg("path"));

  // ---- rbm ----
  py::class_<rbm::RbmParams>(m, "RbmParams")
      .def(py::init<>())
      .def_readwrite("n_visible", &rbm::RbmParams::n_visible)
      .def_readwrite("n_hidden", &rbm::RbmParams::n_hidden)
      .def_readwrite("w", &rbm::RbmParams::w)
      .def_readwrite("b", &rbm::RbmParams::b)
      .def_readwrite("c", &rbm::RbmParams::c);

  py::class_<rbm::CdConfig>(m, "CdConfig")
      .def(py::init<>())
      .def_readwrite("epoch", &rbm::CdConfig::epoch)
      .def_readwrite("layer_index", &rbm::CdConfig::layer_index)
      .def_readwrite("batch_size", &rbm::CdConfig::batch_size)
      .def_readwrite("rng_seed", &rbm::CdConfig::rng_seed);

  m.def("init_rbm", &rbm::init_params, py::arg("n_visible"), py::arg("n_hidden"),
        py::arg("seed"));
  m.def("energy", &rbm::energy, py::arg("params"), py::arg("v"), py::arg("h"));
  m.def("p_h_given_v", &rbm::p_h_given_v, py::arg("params"), py::arg("v"));
  m.def("p_v_given_h", &rbm::p_v_given_h, py::arg("params"), py::arg("h"));
  m.def("sample_bernoulli",
        [](const Eigen::VectorXd& probs, std::uint64_t seed) {
          Rng rng(seed);
          return rbm::sample_bernoulli(probs, rng);
        },
        py::arg("probs"), py::arg("seed"));
  m.def("cd_iterations", &rbm::cd_iterations, py::arg("epoch"));
  m.def("pretrain_rate", &rbm::pretrain_rate, py::arg("epoch"), py::arg("layer_index"));
  m.def("cd_k_update", &rbm::cd_k_update, py::arg("params"), py::arg("batch"),
        py::arg("config"));
  m.def("exact_model_expectations",
        [](const rbm::RbmParams& p) {
          const auto stats = rbm::exact_model_expectations(p);
          return py::make_tuple(stats.vh, stats.v, stats.h);
        },
        py::arg("params"));

  // ---- dbn ----
  py::class_<dbn::DbnArch>(m, "DbnArch")
      .def(py::init<>())
      .def_readwrite("layer_sizes", &dbn::DbnArch::layer_sizes)
      .def_readwrite("n_classes", &dbn::DbnArch::n_classes)
      .def_readwrite("pretrain_epochs", &dbn::DbnArch::pretrain_epochs)
      .def_readwrite("finetune_epochs", &dbn::DbnArch::finetune_epochs)
      .def_readwrite("batch_size", &dbn::DbnArch::batch_size)
      .def_readwrite("rng_seed", &dbn::DbnArch::rng_seed);

  py::class_<dbn::DbnModel>(m, "DbnModel")
      .def_readonly("rbms", &dbn::DbnModel::rbms)
      .def_readonly("softmax_w", &dbn::DbnModel::softmax_w)
      .def_readonly("softmax_b", &dbn::DbnModel::softmax_b)
      .def_readonly("arch", &dbn::DbnModel::arch)
      .def_property_readonly("seed",
                             [](const dbn::DbnModel& m) { return m.fingerprint.seed; })
      .def_property_readonly("input_side", &dbn::DbnModel::input_side);

  m.def("pretrain", &dbn::pretrain, py::arg("arch"), py::arg("data"));
  m.def("forward",
        [](const dbn::DbnModel& model, const Eigen::VectorXd& x) {
          const auto fw = dbn::forward(model, x);
          return py::make_tuple(fw.activations, fw.probs);
        },
        py::arg("model"), py::arg("x"));
  m.def("finetune", &dbn::finetune, py::arg("model"), py::arg("data"));
  m.def("predict_malicious", &dbn::predict_malicious, py::arg("model"), py::arg("x"));
  m.def("train_model", &dbn::train_model, py::arg("arch"), py::arg("data"));
  m.def("save_model", &dbn::save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &dbn::load_model, py::arg("path"));

  // ---- dataset ----
  py::enum_<dataset::Label>(m, "Label")
      .value("BENIGN", dataset::Label::Benign)
      .value("MALICIOUS", dataset::Label::Malicious);

  py::class_<dataset::Manifest::Entry>(m, "ManifestEntry")
      .def_readwrite("path", &dataset::Manifest::Entry::path)
      .def_readwrite("label", &dataset::Manifest::Entry::label);

  py::class_<dataset::Manifest>(m, "Manifest")
      .def(py::init<>())
      .def_readwrite("entries", &dataset::Manifest::entries);

  py::class_<dataset::ConfusionCounts>(m, "ConfusionCounts")
      .def_readonly("tp", &dataset::ConfusionCounts::tp)
      .def_readonly("fp", &dataset::ConfusionCounts::fp)
      .def_readonly("tn", &dataset::ConfusionCounts::tn)
      .def_readonly("fn", &dataset::ConfusionCounts::fn)
      .def("total", &dataset::ConfusionCounts::total)
      .def("accuracy", &dataset::ConfusionCounts::accuracy)
      .def("tpr", &dataset::ConfusionCounts::tpr);

  py::class_<dataset::EvalReport>(m, "EvalReport")
      .def_readonly("counts", &dataset::EvalReport::counts)
      .def_readonly("accuracy", &dataset::EvalReport::accuracy)
      .def_readonly("tpr", &dataset::EvalReport::tpr)
      .def_readonly("unreadable", &dataset::EvalReport::unreadable);

  m.def("load_manifest", &dataset::load_manifest, py::arg("path"));
  m.def("save_manifest", &dataset::save_manifest, py::arg("manifest"), py::arg("path"));
  m.def("split_manifest", &dataset::split, py::arg("manifest"),
        py::arg("train_fraction"), py::arg("seed"));
  m.def("evaluate", &dataset::evaluate, py::arg("model"), py::arg("manifest"),
        py::arg("threshold") = 0.5, py::arg("base_dir") = "");
  m.def("score_bytes",
        [](const dbn::DbnModel& model, const py::bytes& data) {
          return dataset::score_bytes(model, to_byte_vec(data));
        },
        py::arg("model"), py::arg("data"));
  m.def("synth_sample_bytes",
        [](dataset::Label label, std::uint64_t seed) {
          return from_byte_vec(dataset::synth_sample_bytes(label, seed));
        },
        py::arg("label"), py::arg("seed"));
  m.def("make_synth_corpus",
        [](int per_class, std::uint64_t seed) {
          std::vector<std::pair<py::bytes, dataset::Label>> out;
          for (const auto& [bytes, label] : dataset::make_synth_corpus(per_class, seed))
            out.emplace_back(from_byte_vec(bytes), label);
          return out;
        },
        py::arg("per_class"), py::arg("seed"));
  m.def("write_synth_corpus", &dataset::write_synth_corpus, py::arg("out_dir"),
        py::arg("per_class"), py::arg("seed"));
  m.def("vectorize_corpus",
        [](const std::vector<std::pair<py::bytes, dataset::Label>>& corpus, int side) {
          std::vector<std::pair<ByteVec, dataset::Label>> native;
          for (const auto& [bytes, label] : corpus)
            native.emplace_back(to_byte_vec(bytes), label);
          return dataset::vectorize_corpus(native, side);
        },
        py::arg("corpus"), py::arg("side"));
  m.def("load_vectors", &dataset::load_vectors, py::arg("manifest"), py::arg("side"),
        py::arg("base_dir") = "");

  // ---- chain ----
  py::class_<chain::VerdictTx>(m, "VerdictTx")
      .def(py::init<>())
      .def_property("file_id",
                    [](const chain::VerdictTx& tx) { return digest_bytes(tx.file_id); },
                    [](chain::VerdictTx& tx, const py::bytes& b) {
                      tx.file_id = digest_from(b);
                    })
      .def_readwrite("node_id", &chain::VerdictTx::node_id)
      .def_readwrite("probability", &chain::VerdictTx::probability)
      .def_readwrite("round", &chain::VerdictTx::round)
      .def_property("auth_tag",
                    [](const chain::VerdictTx& tx) { return digest_bytes(tx.auth_tag); },
                    [](chain::VerdictTx& tx, const py::bytes& b) {
                      tx.auth_tag = digest_from(b);
                    });

  py::class_<chain::Block>(m, "Block")
      .def_readonly("index", &chain::Block::index)
      .def_property_readonly("prev_hash",
                             [](const chain::Block& b) { return digest_bytes(b.prev_hash); })
      .def_readonly("timestamp", &chain::Block::timestamp)
      .def_readonly("txs", &chain::Block::txs)
      .def_readonly("nonce", &chain::Block::nonce)
      .def_property_readonly("hash",
                             [](const chain::Block& b) { return digest_bytes(b.hash); });

  py::class_<chain::VerifyResult>(m, "VerifyResult")
      .def_readonly("ok", &chain::VerifyResult::ok)
      .def_readonly("first_bad_index", &chain::VerifyResult::first_bad_index)
      .def_readonly("reason", &chain::VerifyResult::reason);

  py::class_<chain::HashChain>(m, "HashChain")
      .def(py::init<int>(), py::arg("difficulty_bits"))
      .def("append",
           [](chain::HashChain& c, std::vector<chain::VerdictTx> txs,
              std::uint64_t timestamp, const std::map<std::string, py::bytes>& keys) {
             chain::KeyRegistry registry;
             for (const auto& [node, key] : keys) registry[node] = digest_from(key);
             return c.append(std::move(txs), timestamp, &registry);
           },
           py::arg("txs"), py::arg("timestamp"), py::arg("keys"))
      .def_property_readonly("blocks", &chain::HashChain::blocks)
      .def_property_readonly("difficulty", &chain::HashChain::difficulty);

  m.def("make_auth_tag",
        [](const chain::VerdictTx& tx, const py::bytes& key) {
          return digest_bytes(chain::make_auth_tag(tx, digest_from(key)));
        },
        py::arg("tx"), py::arg("key"));
  m.def("genesis", &chain::genesis, py::arg("difficulty_bits"));
  m.def("mine_block",
        [](const chain::Block& prev, std::vector<chain::VerdictTx> txs,
           int difficulty_bits, std::uint64_t timestamp) {
          const auto mined =
              chain::mine_block(prev, std::move(txs), difficulty_bits, timestamp, nullptr);
          return py::make_tuple(mined.block, mined.attempts);
        },
        py::arg("prev"), py::arg("txs"), py::arg("difficulty_bits"), py::arg("timestamp"));
  m.def("verify_chain",
        [](const std::vector<chain::Block>& blocks, int difficulty_bits,
           const std::map<std::string, py::bytes>& keys) {
          if (keys.empty()) return chain::verify_chain(blocks, difficulty_bits, nullptr);
          chain::KeyRegistry registry;
          for (const auto& [node, key] : keys) registry[node] = digest_from(key);
          return chain::verify_chain(blocks, difficulty_bits, &registry);
        },
        py::arg("blocks"), py::arg("difficulty_bits"),
        py::arg("keys") = std::map<std::string, py::bytes>{});
  m.def("query_verdicts",
        [](const std::vector<chain::Block>& blocks, const py::bytes& file_id) {
          return chain::query_verdicts(blocks, digest_from(file_id));
        },
        py::arg("blocks"), py::arg("file_id"));
  m.def("serialize_chain",
        [](const std::vector<chain::Block>& blocks) {
          return from_byte_vec(chain::serialize_chain(blocks));
        },
        py::arg("blocks"));
  m.def("deserialize_chain",
        [](const py::bytes& bytes) {
          const auto loaded = chain::deserialize_chain(to_byte_vec(bytes));
          return py::make_tuple(loaded.blocks, loaded.parse_error_index);
        },
        py::arg("bytes"));
  m.def("save_chain", &chain::save_chain, py::arg("blocks"), py::arg("path"));
  m.def("load_chain",
        [](const std::string& path) {
          const auto loaded = chain::load_chain(path);
          return py::make_tuple(loaded.blocks, loaded.parse_error_index);
        },
        py::arg("path"));

  // ---- consensus ----
  py::class_<consensus::TrustParams>(m, "TrustParams")
      .def(py::init<>())
      .def_readwrite("alpha", &consensus::TrustParams::alpha)
      .def_readwrite("t_min", &consensus::TrustParams::t_min);

  py::class_<consensus::TrustLedger>(m, "TrustLedger")
      .def(py::init<>())
      .def_readwrite("trust", &consensus::TrustLedger::trust)
      .def_readwrite("params", &consensus::TrustLedger::params);

  py::enum_<consensus::Decision>(m, "Decision")
      .value("ALLOW", consensus::Decision::Allow)
      .value("BLOCK", consensus::Decision::Block);

  m.def("weighted_verdict", &consensus::weighted_verdict, py::arg("ledger"),
        py::arg("verdicts"));
  m.def("update_trust", &consensus::update_trust, py::arg("ledger"), py::arg("verdicts"),
        py::arg("mean"));
  m.def("decide", &consensus::decide, py::arg("mean"), py::arg("threshold") = 0.5);

  // ---- netsim ----
  py::class_<netsim::FaultModel>(m, "FaultModel").def(py::init<>());
  m.def("parse_fault", &netsim::parse_fault, py::arg("spec"));

  py::class_<netsim::NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("n_nodes", &netsim::NetworkConfig::n_nodes)
      .def_readwrite("difficulty", &netsim::NetworkConfig::difficulty)
      .def_readwrite("threshold", &netsim::NetworkConfig::threshold)
      .def_readwrite("trust", &netsim::NetworkConfig::trust)
      .def_readwrite("seed", &netsim::NetworkConfig::seed)
      .def_readwrite("arch", &netsim::NetworkConfig::arch)
      .def_readwrite("faults", &netsim::NetworkConfig::faults);

  py::class_<netsim::RoundResult>(m, "RoundResult")
      .def_readonly("round", &netsim::RoundResult::round)
      .def_property_readonly("file_id",
                             [](const netsim::RoundResult& r) {
                               return digest_bytes(r.file_id);
                             })
      .def_readonly("reports", &netsim::RoundResult::reports)
      .def_readonly("mean", &netsim::RoundResult::mean)
      .def_readonly("decision", &netsim::RoundResult::decision)
      .def_readonly("trust_after", &netsim::RoundResult::trust_after);

  py::class_<netsim::ScenarioEvent>(m, "ScenarioEvent");

  py::class_<netsim::Transcript>(m, "Transcript")
      .def_readonly("rounds", &netsim::Transcript::rounds)
      .def_readonly("text", &netsim::Transcript::text);

  py::class_<netsim::Network>(m, "Network")
      .def_property_readonly("node_ids",
                             [](const netsim::Network& net) {
                               std::vector<std::string> ids;
                               for (const auto& n : net.nodes) ids.push_back(n.id);
                               return ids;
                             })
      .def_property_readonly("trust",
                             [](const netsim::Network& net) { return net.trust.trust; })
      .def_property_readonly("blocks",
                             [](const netsim::Network& net) {
                               return net.chain.blocks();
                             })
      .def_property_readonly(
          "keys",
          [](const netsim::Network& net) {
            std::map<std::string, py::bytes> keys;
            for (const auto& [node, key] : net.keys) keys[node] = digest_bytes(key);
            return keys;
          })
      .def_readonly("round", &netsim::Network::round);

  m.def("provision", &netsim::provision, py::arg("config"), py::arg("training_data"));
  m.def("broadcast_file",
        [](netsim::Network& net, const py::bytes& data) {
          return netsim::broadcast_file(net, to_byte_vec(data));
        },
        py::arg("network"), py::arg("data"));
  m.def("parse_scenario_text", &netsim::parse_scenario_text, py::arg("text"));
  m.def("run_scenario", &netsim::run_scenario, py::arg("network"), py::arg("events"));
  m.def("audit_chain",
        [](const std::vector<chain::Block>& blocks, const consensus::TrustParams& params,
           const std::vector<std::string>& node_ids) {
          const auto result = netsim::audit_chain(blocks, params, node_ids);
          return py::make_tuple(result.ok, result.reason);
        },
        py::arg("blocks"), py::arg("params"), py::arg("node_ids"));

  m.def("trust_snapshot_id", [](std::uint64_t round) {
    return digest_bytes(netsim::trust_snapshot_id(round));
  });
}
