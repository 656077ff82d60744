#include "dfw/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dfw/wire.hpp"

namespace dfw::netsim {

double FaultModel::apply(double honest_prob, Rng& rng) const {
  switch (kind) {
    case Kind::Honest:
      return honest_prob;
    case Kind::Inverter:
      return 1.0 - honest_prob;
    case Kind::Constant:
      return value;
    case Kind::Random:
      return rng.uniform01();
  }
  return honest_prob;
}

FaultModel parse_fault(const std::string& spec) {
  std::istringstream is(spec);
  std::string kind;
  is >> kind;
  FaultModel f;
  if (kind == "honest") {
    f.kind = FaultModel::Kind::Honest;
  } else if (kind == "inverter") {
    f.kind = FaultModel::Kind::Inverter;
  } else if (kind == "random") {
    f.kind = FaultModel::Kind::Random;
  } else if (kind == "constant") {
    f.kind = FaultModel::Kind::Constant;
    if (!(is >> f.value) || !(f.value >= 0.0 && f.value <= 1.0))
      throw ConfigError("fault: constant needs a value in [0, 1]");
  } else {
    throw ConfigError("fault: unknown kind '" + kind + "'");
  }
  return f;
}

Network provision(const NetworkConfig& cfg,
                  const std::vector<dbn::LabeledVector>& training_data) {
  if (cfg.n_nodes < 1) throw ConfigError("provision: n_nodes must be >= 1");
  dbn::validate(cfg.arch);

  Network net{cfg, {}, {}, chain::HashChain(cfg.difficulty), {}, 0};
  net.trust.params = cfg.trust;

  Rng key_rng(mix_seed(cfg.seed, 0x6b657973ULL));  // "keys"
  for (int i = 0; i < cfg.n_nodes; ++i) {
    Node node;
    node.id = "node-" + std::to_string(i);
    for (auto& byte : node.secret_key)
      byte = static_cast<std::uint8_t>(key_rng.next_u64() & 0xff);

    dbn::DbnArch arch = cfg.arch;
    arch.rng_seed = cfg.seed + static_cast<std::uint64_t>(i);  // unique engine per node
    node.model = dbn::train_model(arch, training_data);

    const auto fault_it = cfg.faults.find(i);
    if (fault_it != cfg.faults.end()) node.fault = fault_it->second;

    net.keys[node.id] = node.secret_key;
    net.trust.trust[node.id] = 1.0;
    net.nodes.push_back(std::move(node));
  }
  return net;
}

Digest32 trust_snapshot_id(std::uint64_t round) {
  ByteVec bytes;
  const std::string tag = "trust-snapshot";
  bytes.insert(bytes.end(), tag.begin(), tag.end());
  wire::put_u64(bytes, round);
  return sha256(bytes);
}

RoundResult broadcast_file(Network& net, std::span<const std::uint8_t> bytes) {
  RoundResult result;
  result.round = net.round;
  result.file_id = sha256(bytes);

  std::vector<chain::VerdictTx> txs;
  std::vector<consensus::NodeProb> verdicts;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    Node& node = net.nodes[i];
    std::optional<double> prob;
    try {
      double p = dataset::score_bytes(node.model, bytes);
      Rng fault_rng(mix_seed(net.cfg.seed,
                             0xfa000000ULL + (net.round << 16) + i));
      p = std::clamp(node.fault.apply(p, fault_rng), 0.0, 1.0);
      prob = p;
    } catch (const Error&) {
      prob = std::nullopt;  // abstain: engine failure this round
    }
    result.reports.emplace_back(node.id, prob);
    if (prob) {
      chain::VerdictTx tx;
      tx.file_id = result.file_id;
      tx.node_id = node.id;
      tx.probability = *prob;
      tx.round = net.round;
      tx.auth_tag = chain::make_auth_tag(tx, node.secret_key);
      txs.push_back(std::move(tx));
      verdicts.emplace_back(node.id, *prob);
    }
  }

  net.chain.append(std::move(txs), 2 * net.round + 1, &net.keys);

  result.mean = consensus::weighted_verdict(net.trust, verdicts);
  result.decision = consensus::decide(result.mean, net.cfg.threshold);
  net.trust = consensus::update_trust(net.trust, verdicts, result.mean);
  result.trust_after = net.trust.trust;

  std::vector<chain::VerdictTx> snapshot;
  for (const Node& node : net.nodes) {
    chain::VerdictTx tx;
    tx.file_id = trust_snapshot_id(net.round);
    tx.node_id = node.id;
    tx.probability = net.trust.trust.at(node.id);
    tx.round = net.round;
    tx.auth_tag = chain::make_auth_tag(tx, node.secret_key);
    snapshot.push_back(std::move(tx));
  }
  net.chain.append(std::move(snapshot), 2 * net.round + 2, &net.keys);

  ++net.round;
  return result;
}

std::vector<ScenarioEvent> parse_scenario_text(const std::string& text) {
  std::vector<ScenarioEvent> events;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    ScenarioEvent ev;
    if (kind == "file") {
      ev.kind = ScenarioEvent::Kind::File;
      if (!(ls >> ev.path))
        throw ConfigError("scenario line " + std::to_string(line_no) +
                          ": file needs a path");
    } else if (kind == "synthetic") {
      ev.kind = ScenarioEvent::Kind::Synthetic;
      std::string label;
      if (!(ls >> label >> ev.seed))
        throw ConfigError("scenario line " + std::to_string(line_no) +
                          ": synthetic needs <benign|malicious> <seed>");
      ev.label = dataset::parse_label(label);
    } else {
      throw ConfigError("scenario line " + std::to_string(line_no) +
                        ": unknown event '" + kind + "'");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<ScenarioEvent> parse_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("parse_scenario: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario_text(buf.str());
}

namespace {
std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}
}  // namespace

std::string render_round(const RoundResult& r) {
  std::string out;
  out += "round " + std::to_string(r.round) + " file " + to_hex(r.file_id) + "\n";
  for (const auto& [node, prob] : r.reports)
    out += "verdict " + node + " " + (prob ? fixed4(*prob) : "abstain") + "\n";
  out += "mean " + fixed4(r.mean) + "\n";
  out += std::string("decision ") + consensus::decision_name(r.decision) + "\n";
  for (const auto& [node, trust] : r.trust_after)
    out += "trust " + node + " " + fixed4(trust) + "\n";
  return out;
}

Transcript run_scenario(Network& net, const std::vector<ScenarioEvent>& events) {
  Transcript t;
  for (const auto& ev : events) {
    ByteVec bytes;
    if (ev.kind == ScenarioEvent::Kind::File)
      bytes = dataset::read_file_bytes(ev.path);
    else
      bytes = dataset::synth_sample_bytes(ev.label, ev.seed);
    t.rounds.push_back(broadcast_file(net, bytes));
    t.text += render_round(t.rounds.back());
  }
  const auto verdict = chain::verify_chain(net.chain.blocks(), net.cfg.difficulty,
                                           &net.keys);
  if (!verdict.ok)
    throw InvariantViolation("run_scenario: chain invalid at block " +
                             std::to_string(verdict.first_bad_index) + " (" +
                             verdict.reason + ")");
  t.text += "chain blocks " + std::to_string(net.chain.blocks().size()) + " head " +
            to_hex(net.chain.tip().hash) + "\n";
  return t;
}

AuditResult audit_chain(const std::vector<chain::Block>& blocks,
                        const consensus::TrustParams& params,
                        const std::vector<std::string>& node_ids) {
  AuditResult out;
  auto fail = [&out](std::string why) {
    out.ok = false;
    out.reason = std::move(why);
    return out;
  };

  consensus::TrustLedger ledger;
  ledger.params = params;
  for (const auto& id : node_ids) ledger.trust[id] = 1.0;

  if (blocks.empty()) return fail("empty chain");
  if ((blocks.size() - 1) % 2 != 0) return fail("dangling half round");

  for (std::size_t b = 1; b + 1 < blocks.size(); b += 2) {
    const auto& verdict_block = blocks[b];
    const auto& snapshot_block = blocks[b + 1];
    if (verdict_block.txs.empty()) return fail("verdict block without txs");
    const std::uint64_t round = verdict_block.txs.front().round;
    const Digest32 snap_id = trust_snapshot_id(round);

    std::vector<consensus::NodeProb> verdicts;
    for (const auto& tx : verdict_block.txs) {
      if (tx.round != round || tx.file_id == snap_id)
        return fail("mixed content in verdict block " + std::to_string(b));
      verdicts.emplace_back(tx.node_id, tx.probability);
    }
    const double mean = consensus::weighted_verdict(ledger, verdicts);
    ledger = consensus::update_trust(ledger, verdicts, mean);

    if (snapshot_block.txs.size() != node_ids.size())
      return fail("snapshot block " + std::to_string(b + 1) + " incomplete");
    for (const auto& tx : snapshot_block.txs) {
      if (tx.file_id != snap_id)
        return fail("snapshot block " + std::to_string(b + 1) + " has foreign tx");
      const auto it = ledger.trust.find(tx.node_id);
      if (it == ledger.trust.end())
        return fail("snapshot for unknown node " + tx.node_id);
      if (std::abs(it->second - tx.probability) > 1e-12)
        return fail("trust mismatch for " + tx.node_id + " in round " +
                    std::to_string(round));
    }
  }
  return out;
}

}  // namespace dfw::netsim
