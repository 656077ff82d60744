#include "dfw/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace dfw::cli {

std::vector<int> parse_arch(const std::string& csv) {
  std::vector<int> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      sizes.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("arch: bad layer size '" + item + "'");
    }
  }
  if (sizes.size() < 2)
    throw ConfigError("arch: need input plus at least one hidden layer");
  return sizes;
}

AppConfig load_config_file(const std::string& path, AppConfig base) {
  std::ifstream f(path);
  if (!f) throw IoFailure("config: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto rest = [&ls]() {
      std::string v;
      std::getline(ls, v);
      const auto start = v.find_first_not_of(" \t");
      return start == std::string::npos ? std::string() : v.substr(start);
    };
    auto bad = [&](const std::string& what) {
      return ConfigError("config line " + std::to_string(line_no) + ": " + what);
    };
    try {
      if (key == "arch") {
        base.arch = parse_arch(rest());
      } else if (key == "pretrain_epochs") {
        ls >> base.pretrain_epochs;
      } else if (key == "finetune_epochs") {
        ls >> base.finetune_epochs;
      } else if (key == "batch_size") {
        ls >> base.batch_size;
      } else if (key == "seed") {
        ls >> base.seed;
      } else if (key == "difficulty") {
        ls >> base.difficulty;
      } else if (key == "threshold") {
        ls >> base.threshold;
      } else if (key == "trust_alpha") {
        ls >> base.trust_alpha;
      } else if (key == "trust_floor") {
        ls >> base.trust_floor;
      } else if (key == "n_nodes") {
        ls >> base.n_nodes;
      } else if (key == "train_fraction") {
        ls >> base.train_fraction;
      } else if (key == "manifest") {
        base.manifest = rest();
      } else if (key == "provision_dir") {
        base.provision_dir = rest();
      } else if (key == "synth_train_per_class") {
        ls >> base.synth_train_per_class;
      } else if (key == "fault") {
        int idx = -1;
        ls >> idx;
        if (idx < 0) throw bad("fault needs a node index");
        std::string spec;
        std::getline(ls, spec);
        base.faults[idx] = netsim::parse_fault(spec);
      } else {
        throw bad("unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw bad(e.what());
    }
    if (ls.fail() && key != "arch" && key != "manifest" && key != "provision_dir" &&
        key != "fault")
      throw bad("bad value for '" + key + "'");
  }
  return base;
}

void validate(const AppConfig& cfg) {
  if (cfg.arch.size() < 2) throw ConfigError("arch: need at least two layer sizes");
  for (int s : cfg.arch)
    if (s < 1) throw ConfigError("arch: layer sizes must be >= 1");
  const int side = static_cast<int>(std::lround(std::sqrt(double(cfg.arch.front()))));
  if (side * side != cfg.arch.front())
    throw ConfigError("arch: input layer must be a square pixel count");
  if (cfg.pretrain_epochs < 0) throw ConfigError("pretrain_epochs: must be >= 0");
  if (cfg.finetune_epochs < 0) throw ConfigError("finetune_epochs: must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size: must be >= 1");
  if (cfg.difficulty < 0 || cfg.difficulty > 64)
    throw ConfigError("difficulty: must be in [0, 64]");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
    throw ConfigError("threshold: must be in (0, 1)");
  if (!(cfg.trust_alpha > 0.0 && cfg.trust_alpha <= 1.0))
    throw ConfigError("trust_alpha: must be in (0, 1]");
  if (!(cfg.trust_floor > 0.0 && cfg.trust_floor < 1.0))
    throw ConfigError("trust_floor: must be in (0, 1)");
  if (cfg.n_nodes < 1) throw ConfigError("n_nodes: must be >= 1");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0))
    throw ConfigError("train_fraction: must be in (0, 1]");
  if (cfg.synth_train_per_class < 0)
    throw ConfigError("synth_train_per_class: must be >= 0");
  for (const auto& [idx, fault] : cfg.faults)
    if (idx < 0 || idx >= cfg.n_nodes)
      throw ConfigError("fault: node index " + std::to_string(idx) +
                        " outside [0, n_nodes)");
}

netsim::NetworkConfig to_network_config(const AppConfig& cfg) {
  netsim::NetworkConfig net;
  net.n_nodes = cfg.n_nodes;
  net.difficulty = cfg.difficulty;
  net.threshold = cfg.threshold;
  net.trust.alpha = cfg.trust_alpha;
  net.trust.t_min = cfg.trust_floor;
  net.seed = cfg.seed;
  net.arch.layer_sizes = cfg.arch;
  net.arch.pretrain_epochs = cfg.pretrain_epochs;
  net.arch.finetune_epochs = cfg.finetune_epochs;
  net.arch.batch_size = cfg.batch_size;
  net.arch.rng_seed = cfg.seed;
  net.faults = cfg.faults;
  return net;
}

}  // namespace dfw::cli
