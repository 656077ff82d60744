#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dfw/common.hpp"
#include "dfw/netsim.hpp"

// Shared CLI configuration: defaults < config file < flags. The config file
// is line-oriented "key value" pairs, '#' comments allowed.

namespace dfw::cli {

struct AppConfig {
  std::vector<int> arch = {4096, 3000, 3000};
  int pretrain_epochs = 15;
  int finetune_epochs = 30;
  int batch_size = 10;
  std::uint64_t seed = 1;
  int difficulty = 12;
  double threshold = 0.5;
  double trust_alpha = 0.1;
  double trust_floor = 0.01;
  int n_nodes = 10;
  double train_fraction = 1.0;
  std::string manifest;
  std::string provision_dir;
  int synth_train_per_class = 0;  // >0: provision from in-memory synthetic corpus
  std::map<int, netsim::FaultModel> faults;
};

std::vector<int> parse_arch(const std::string& csv);  // "4096,3000,3000"

AppConfig load_config_file(const std::string& path, AppConfig base = {});

// Throws ConfigError naming the offending field.
void validate(const AppConfig& cfg);

netsim::NetworkConfig to_network_config(const AppConfig& cfg);

}  // namespace dfw::cli
