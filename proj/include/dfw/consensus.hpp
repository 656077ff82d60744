#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dfw/common.hpp"

// Trust-weighted aggregation of per-node verdicts and the per-round trust
// update. Trust weights live in [t_min, 1]; a positive floor keeps the
// weighted average's denominator away from zero.

namespace dfw::consensus {

struct TrustParams {
  double alpha = 0.1;   // blend rate toward (1 - deviation)
  double t_min = 0.01;  // trust floor
};

struct TrustLedger {
  std::map<std::string, double> trust;
  TrustParams params;
};

using NodeProb = std::pair<std::string, double>;

// sum(trust_i * p_i) / sum(trust_i) with trusts as of before the round's
// update. Throws EmptyVerdicts / UnknownNode.
double weighted_verdict(const TrustLedger& ledger,
                        const std::vector<NodeProb>& verdicts);

// trust' = clamp((1-alpha)*trust + alpha*(1 - |p_i - mean|), t_min, 1);
// nodes absent from verdicts keep their trust.
TrustLedger update_trust(const TrustLedger& ledger,
                         const std::vector<NodeProb>& verdicts, double mean);

enum class Decision { Allow, Block };

// BLOCK iff mean >= threshold
Decision decide(double mean, double threshold);

const char* decision_name(Decision d);

}  // namespace dfw::consensus
