#include "dfw/consensus.hpp"

#include <algorithm>
#include <cmath>

namespace dfw::consensus {

double weighted_verdict(const TrustLedger& ledger,
                        const std::vector<NodeProb>& verdicts) {
  if (verdicts.empty()) throw EmptyVerdicts("weighted_verdict: no verdicts");
  double num = 0.0, den = 0.0;
  for (const auto& [node, p] : verdicts) {
    const auto it = ledger.trust.find(node);
    if (it == ledger.trust.end())
      throw UnknownNode("weighted_verdict: node '" + node + "' not in ledger");
    num += it->second * p;
    den += it->second;
  }
  return num / den;
}

TrustLedger update_trust(const TrustLedger& ledger,
                         const std::vector<NodeProb>& verdicts, double mean) {
  if (!(mean >= 0.0 && mean <= 1.0))
    throw Error("update_trust: mean must be in [0, 1]");
  TrustLedger out = ledger;
  const double alpha = ledger.params.alpha;
  for (const auto& [node, p] : verdicts) {
    const auto it = out.trust.find(node);
    if (it == out.trust.end())
      throw UnknownNode("update_trust: node '" + node + "' not in ledger");
    const double target = 1.0 - std::abs(p - mean);
    const double blended = (1.0 - alpha) * it->second + alpha * target;
    it->second = std::clamp(blended, ledger.params.t_min, 1.0);
  }
  return out;
}

Decision decide(double mean, double threshold) {
  return mean >= threshold ? Decision::Block : Decision::Allow;
}

const char* decision_name(Decision d) {
  return d == Decision::Block ? "BLOCK" : "ALLOW";
}

}  // namespace dfw::consensus
