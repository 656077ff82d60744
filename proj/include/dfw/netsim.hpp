#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfw/chain.hpp"
#include "dfw/common.hpp"
#include "dfw/consensus.hpp"
#include "dfw/dataset.hpp"
#include "dfw/dbn.hpp"

// In-process peer-to-peer network: uniquely seeded engines per node,
// broadcast rounds, chained verdicts, trust-weighted consensus. Each round
// mines a verdict block followed by a trust-snapshot block.

namespace dfw::netsim {

struct FaultModel {
  enum class Kind { Honest, Inverter, Constant, Random };
  Kind kind = Kind::Honest;
  double value = 0.5;  // Constant's report

  double apply(double honest_prob, Rng& rng) const;
};

FaultModel parse_fault(const std::string& spec);  // "honest" | "inverter" | "constant <c>" | "random"

struct Node {
  std::string id;
  Digest32 secret_key{};
  dbn::DbnModel model;
  FaultModel fault;
};

struct NetworkConfig {
  int n_nodes = 10;
  int difficulty = 12;
  double threshold = 0.5;
  consensus::TrustParams trust;
  std::uint64_t seed = 0;
  dbn::DbnArch arch;
  std::map<int, FaultModel> faults;  // node index -> fault model
};

struct Network {
  NetworkConfig cfg;
  std::vector<Node> nodes;
  chain::KeyRegistry keys;
  chain::HashChain chain;
  consensus::TrustLedger trust;
  std::uint64_t round = 0;
};

// Trains one uniquely seeded model per node (seed = base + node index),
// generates per-node keys and the genesis chain.
Network provision(const NetworkConfig& cfg,
                  const std::vector<dbn::LabeledVector>& training_data);

// file_id used by round r's trust-snapshot transactions
Digest32 trust_snapshot_id(std::uint64_t round);

struct RoundResult {
  std::uint64_t round = 0;
  Digest32 file_id{};
  // node id -> probability; abstentions carry no value
  std::vector<std::pair<std::string, std::optional<double>>> reports;
  double mean = 0.0;
  consensus::Decision decision = consensus::Decision::Allow;
  std::map<std::string, double> trust_after;
};

// One consensus round over the given file bytes: per-node scoring (faults
// applied), verdict block, weighted mean, decision, trust update, snapshot
// block. Engine failures become abstentions.
RoundResult broadcast_file(Network& net, std::span<const std::uint8_t> bytes);

struct ScenarioEvent {
  enum class Kind { File, Synthetic };
  Kind kind = Kind::File;
  std::string path;            // File
  dataset::Label label{};      // Synthetic
  std::uint64_t seed = 0;      // Synthetic
};

// Line grammar: "file <path>" or "synthetic <benign|malicious> <seed>".
std::vector<ScenarioEvent> parse_scenario(const std::string& path);
std::vector<ScenarioEvent> parse_scenario_text(const std::string& text);

struct Transcript {
  std::vector<RoundResult> rounds;
  std::string text;  // fixed-column rendering, byte-stable per seed
};

Transcript run_scenario(Network& net, const std::vector<ScenarioEvent>& events);

std::string render_round(const RoundResult& r);

// Replays the chain offline: recomputes every round's weighted mean from the
// verdict transactions and the pre-round trust snapshot, and checks the
// recorded snapshots match. Returns false with a reason on any mismatch.
struct AuditResult {
  bool ok = true;
  std::string reason;
};
AuditResult audit_chain(const std::vector<chain::Block>& blocks,
                        const consensus::TrustParams& params,
                        const std::vector<std::string>& node_ids);

}  // namespace dfw::netsim
