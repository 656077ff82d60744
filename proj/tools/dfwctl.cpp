// dfwctl: command-line front end for the decentralised-firewall toolkit.
// Subcommands: convert, synth-data, train, eval, classify, provision,
// simulate, chain-verify. Exit codes: 0 ok, 1 operational failure,
// 2 invariant violation, 64 usage/config error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "dfw/chain.hpp"
#include "dfw/config.hpp"
#include "dfw/consensus.hpp"
#include "dfw/dataset.hpp"
#include "dfw/dbn.hpp"
#include "dfw/imgcodec.hpp"
#include "dfw/netsim.hpp"
#include "dfw/sha.hpp"

namespace fs = std::filesystem;
using namespace dfw;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitUsage = 64;

std::string manifest_dir(const std::string& manifest_path) {
  return fs::path(manifest_path).parent_path().string();
}

chain::KeyRegistry load_keys(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("keys: cannot open " + path);
  chain::KeyRegistry keys;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("keys: expected <node>\\t<hex>");
    const ByteVec raw = from_hex(line.substr(tab + 1));
    if (raw.size() != 32) throw ParseError("keys: key must be 32 bytes");
    Digest32 key{};
    std::copy(raw.begin(), raw.end(), key.begin());
    keys[line.substr(0, tab)] = key;
  }
  return keys;
}

void save_keys(const chain::KeyRegistry& keys, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoFailure("keys: cannot open " + path);
  for (const auto& [node, key] : keys) f << node << '\t' << to_hex(key) << '\n';
}

// config file (if any) first, then explicit flags on top
struct TrainingOpts {
  std::string config_path;
  std::string arch_csv;
  int pretrain_epochs = -1;
  int finetune_epochs = -1;
  int batch_size = -1;
  std::int64_t seed = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key value lines)");
    cmd->add_option("--arch", arch_csv, "layer sizes, e.g. 4096,3000,3000");
    cmd->add_option("--pretrain-epochs", pretrain_epochs, "per-RBM pretraining epochs");
    cmd->add_option("--finetune-epochs", finetune_epochs, "fine-tuning epochs");
    cmd->add_option("--batch-size", batch_size, "mini-batch size");
    cmd->add_option("--seed", seed, "base RNG seed");
  }

  cli::AppConfig resolve() const {
    cli::AppConfig cfg;
    if (!config_path.empty()) cfg = cli::load_config_file(config_path, cfg);
    if (!arch_csv.empty()) cfg.arch = cli::parse_arch(arch_csv);
    if (pretrain_epochs >= 0) cfg.pretrain_epochs = pretrain_epochs;
    if (finetune_epochs >= 0) cfg.finetune_epochs = finetune_epochs;
    if (batch_size >= 0) cfg.batch_size = batch_size;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    return cfg;
  }
};

dbn::DbnArch to_arch(const cli::AppConfig& cfg) {
  dbn::DbnArch arch;
  arch.layer_sizes = cfg.arch;
  arch.pretrain_epochs = cfg.pretrain_epochs;
  arch.finetune_epochs = cfg.finetune_epochs;
  arch.batch_size = cfg.batch_size;
  arch.rng_seed = cfg.seed;
  return arch;
}

int arch_side(const std::vector<int>& arch) {
  const int side = static_cast<int>(std::lround(std::sqrt(double(arch.front()))));
  if (side * side != arch.front())
    throw ConfigError("arch: input layer must be a square pixel count");
  return side;
}

netsim::Network build_network(const cli::AppConfig& cfg) {
  cli::validate(cfg);
  const netsim::NetworkConfig netcfg = cli::to_network_config(cfg);

  if (!cfg.provision_dir.empty()) {
    // reuse a provisioned directory: models + keys + genesis
    netsim::Network net{netcfg, {}, {}, chain::HashChain(cfg.difficulty), {}, 0};
    net.trust.params = netcfg.trust;
    const auto keys = load_keys((fs::path(cfg.provision_dir) / "keys.tsv").string());
    for (int i = 0; i < cfg.n_nodes; ++i) {
      netsim::Node node;
      node.id = "node-" + std::to_string(i);
      const auto key_it = keys.find(node.id);
      if (key_it == keys.end())
        throw ConfigError("provision_dir: no key for " + node.id);
      node.secret_key = key_it->second;
      node.model = dbn::load_model(
          (fs::path(cfg.provision_dir) / (node.id + ".dbn")).string());
      const auto fault_it = netcfg.faults.find(i);
      if (fault_it != netcfg.faults.end()) node.fault = fault_it->second;
      net.keys[node.id] = node.secret_key;
      net.trust.trust[node.id] = 1.0;
      net.nodes.push_back(std::move(node));
    }
    return net;
  }

  std::vector<dbn::LabeledVector> data;
  if (cfg.synth_train_per_class > 0) {
    data = dataset::vectorize_corpus(
        dataset::make_synth_corpus(cfg.synth_train_per_class, cfg.seed),
        arch_side(cfg.arch));
  } else if (!cfg.manifest.empty()) {
    const auto manifest = dataset::load_manifest(cfg.manifest);
    data = dataset::load_vectors(manifest, arch_side(cfg.arch),
                                 manifest_dir(cfg.manifest));
  } else {
    throw ConfigError(
        "manifest: provisioning needs 'manifest', 'synth_train_per_class' or "
        "'provision_dir'");
  }
  return netsim::provision(netcfg, data);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralised firewall: byteplot DBN detection over a PoW verdict chain"};
  app.require_subcommand(1);
  std::function<int()> run;

  // ---- convert ----
  auto* convert = app.add_subcommand("convert", "render a file as a grayscale byteplot (PGM)");
  {
    static std::string input, out;
    static int size = 64;
    convert->add_option("input", input, "file to convert")->required();
    convert->add_option("--out", out, "output PGM path")->required();
    convert->add_option("--size", size, "downscale to size x size; 0 keeps the raw byteplot");
    convert->callback([&] {
      run = [] {
        const auto bytes = dataset::read_file_bytes(input);
        auto img = imgcodec::bytes_to_image(bytes);
        if (size > 0) img = imgcodec::downscale(img, size, size);
        imgcodec::write_pgm(img, out);
        std::cout << "wrote " << out << " (" << img.width << "x" << img.height << ")\n";
        return kExitOk;
      };
    });
  }

  // ---- synth-data ----
  auto* synth = app.add_subcommand("synth-data", "emit the synthetic two-texture corpus");
  {
    static std::string out_dir;
    static int per_class = 100;
    static std::uint64_t seed = 1;
    synth->add_option("--out-dir", out_dir, "output directory")->required();
    synth->add_option("--per-class", per_class, "files per class");
    synth->add_option("--seed", seed, "corpus seed");
    synth->callback([&] {
      run = [] {
        if (per_class < 1) throw ConfigError("per-class: must be >= 1");
        const auto manifest = dataset::write_synth_corpus(out_dir, per_class, seed);
        std::cout << "wrote " << manifest << "\n";
        return kExitOk;
      };
    });
  }

  // ---- train ----
  auto* train = app.add_subcommand("train", "train a detection model from a manifest");
  {
    static TrainingOpts opts;
    static std::string manifest_path, out_path, holdout_path;
    static double train_fraction = -1.0;
    opts.attach(train);
    train->add_option("--manifest", manifest_path, "tsv of <path>\\t<label>")->required();
    train->add_option("--out", out_path, "model output path")->required();
    train->add_option("--train-fraction", train_fraction,
                      "train on this fraction, hold out the rest");
    train->add_option("--holdout-out", holdout_path, "write the holdout manifest here");
    train->callback([&] {
      run = [] {
        cli::AppConfig cfg = opts.resolve();
        if (train_fraction > 0.0) cfg.train_fraction = train_fraction;
        cli::validate(cfg);
        auto manifest = dataset::load_manifest(manifest_path);
        const std::string base = manifest_dir(manifest_path);
        if (cfg.train_fraction < 1.0) {
          auto [train_m, holdout_m] =
              dataset::split(manifest, cfg.train_fraction, cfg.seed);
          manifest = std::move(train_m);
          if (!holdout_path.empty()) {
            // keep holdout paths resolvable from the new manifest's directory
            for (auto& e : holdout_m.entries) {
              fs::path p(e.path);
              if (p.is_relative() && !base.empty()) e.path = (fs::path(base) / p).string();
            }
            dataset::save_manifest(holdout_m, holdout_path);
          }
        }
        if (manifest.entries.empty()) throw EmptyData("train: manifest is empty");
        const auto arch = to_arch(cfg);
        const auto data =
            dataset::load_vectors(manifest, arch_side(cfg.arch), base);
        const auto model = dbn::train_model(arch, data);
        dbn::save_model(model, out_path);
        std::cout << "wrote " << out_path << "\n";
        return kExitOk;
      };
    });
  }

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "accuracy and TPR of a model over a manifest");
  {
    static std::string model_path, manifest_path;
    static double threshold = 0.5;
    eval->add_option("--model", model_path, "model file")->required();
    eval->add_option("--manifest", manifest_path, "tsv of <path>\\t<label>")->required();
    eval->add_option("--threshold", threshold, "malicious decision threshold");
    eval->callback([&] {
      run = [] {
        const auto model = dbn::load_model(model_path);
        const auto manifest = dataset::load_manifest(manifest_path);
        const auto report = dataset::evaluate(model, manifest, threshold,
                                              manifest_dir(manifest_path));
        for (const auto& path : report.unreadable)
          std::cerr << "unreadable: " << path << "\n";
        std::printf("total %llu\n", static_cast<unsigned long long>(report.counts.total()));
        std::printf("tp %llu\n", static_cast<unsigned long long>(report.counts.tp));
        std::printf("fp %llu\n", static_cast<unsigned long long>(report.counts.fp));
        std::printf("tn %llu\n", static_cast<unsigned long long>(report.counts.tn));
        std::printf("fn %llu\n", static_cast<unsigned long long>(report.counts.fn));
        std::printf("accuracy %.4f\n", report.accuracy);
        std::printf("tpr %.4f\n", report.tpr);
        return kExitOk;
      };
    });
  }

  // ---- classify ----
  auto* classify = app.add_subcommand("classify", "malicious probability of one file");
  {
    static std::string model_path, input;
    static double threshold = 0.5;
    classify->add_option("--model", model_path, "model file")->required();
    classify->add_option("input", input, "file to score")->required();
    classify->add_option("--threshold", threshold, "block threshold");
    classify->callback([&] {
      run = [] {
        const auto model = dbn::load_model(model_path);
        const auto bytes = dataset::read_file_bytes(input);
        const double p = dataset::score_bytes(model, bytes);
        std::printf("%.6f\t%s\n", p,
                    consensus::decision_name(consensus::decide(p, threshold)));
        return kExitOk;
      };
    });
  }

  // ---- provision ----
  auto* provision = app.add_subcommand(
      "provision", "train unique per-node engines and write a network directory");
  {
    static TrainingOpts opts;
    static std::string manifest_path, out_dir;
    static int n_nodes = -1, difficulty = -1, synth_per_class = -1;
    opts.attach(provision);
    provision->add_option("--manifest", manifest_path, "training manifest");
    provision->add_option("--synth-train-per-class", synth_per_class,
                          "train on the synthetic corpus instead of a manifest");
    provision->add_option("--out-dir", out_dir, "network directory")->required();
    provision->add_option("--n-nodes", n_nodes, "number of nodes");
    provision->add_option("--difficulty", difficulty, "PoW difficulty bits");
    provision->callback([&] {
      run = [] {
        cli::AppConfig cfg = opts.resolve();
        if (!manifest_path.empty()) cfg.manifest = manifest_path;
        if (synth_per_class >= 0) cfg.synth_train_per_class = synth_per_class;
        if (n_nodes >= 0) cfg.n_nodes = n_nodes;
        if (difficulty >= 0) cfg.difficulty = difficulty;
        cfg.provision_dir.clear();  // always train fresh here
        const auto net = build_network(cfg);

        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoFailure("provision: cannot create " + out_dir);
        for (const auto& node : net.nodes)
          dbn::save_model(node.model, (fs::path(out_dir) / (node.id + ".dbn")).string());
        save_keys(net.keys, (fs::path(out_dir) / "keys.tsv").string());
        chain::save_chain(net.chain.blocks(), (fs::path(out_dir) / "chain.bin").string());
        std::cout << "provisioned " << net.nodes.size() << " nodes in " << out_dir << "\n";
        return kExitOk;
      };
    });
  }

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "run a broadcast scenario to consensus");
  {
    static std::string config_path, scenario_path, out_path;
    simulate->add_option("--config", config_path, "network config file")->required();
    simulate->add_option("--scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--out", out_path, "also write the transcript here");
    simulate->callback([&] {
      run = [] {
        const cli::AppConfig cfg = cli::load_config_file(config_path);
        auto net = build_network(cfg);
        const auto events = netsim::parse_scenario(scenario_path);
        const auto transcript = netsim::run_scenario(net, events);

        const auto audit = netsim::audit_chain(
            net.chain.blocks(), net.trust.params, [&net] {
              std::vector<std::string> ids;
              for (const auto& n : net.nodes) ids.push_back(n.id);
              return ids;
            }());
        if (!audit.ok)
          throw InvariantViolation("simulate: audit failed: " + audit.reason);

        if (!out_path.empty()) {
          std::ofstream f(out_path, std::ios::binary);
          if (!f) throw IoFailure("simulate: cannot open " + out_path);
          f << transcript.text;
        }
        std::cout << transcript.text;
        return kExitOk;
      };
    });
  }

  // ---- chain-verify ----
  auto* verify = app.add_subcommand("chain-verify", "verify a persisted chain log");
  {
    static std::string chain_path, keys_path;
    static int difficulty = 12;
    verify->add_option("chain", chain_path, "chain log file")->required();
    verify->add_option("--difficulty", difficulty, "PoW difficulty bits");
    verify->add_option("--keys", keys_path, "keys.tsv for HMAC verification");
    verify->callback([&] {
      run = [] {
        const auto loaded = chain::load_chain(chain_path);
        if (loaded.parse_error_index) {
          std::cout << "invalid at block " << *loaded.parse_error_index
                    << " (parse error)\n";
          return kExitFailure;
        }
        chain::KeyRegistry keys;
        const chain::KeyRegistry* keys_ptr = nullptr;
        if (!keys_path.empty()) {
          keys = load_keys(keys_path);
          keys_ptr = &keys;
        }
        const auto result = chain::verify_chain(loaded.blocks, difficulty, keys_ptr);
        if (!result.ok) {
          std::cout << "invalid at block " << result.first_bad_index << " ("
                    << result.reason << ")\n";
          return kExitFailure;
        }
        std::cout << "valid (" << loaded.blocks.size() << " blocks)\n";
        return kExitOk;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
