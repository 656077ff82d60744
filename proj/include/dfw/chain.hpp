#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dfw/common.hpp"
#include "dfw/sha.hpp"

// Self-contained proof-of-work hash chain carrying HMAC-authenticated verdict
// transactions. Canonical serialisation is fixed-order little-endian with
// probabilities as raw IEEE-754 binary64 bits, so hashes are bit-exact.

namespace dfw::chain {

struct VerdictTx {
  Digest32 file_id{};        // SHA-256 of the broadcast file
  std::string node_id;
  double probability = 0.0;  // malicious probability in [0,1]
  std::uint64_t round = 0;
  Digest32 auth_tag{};       // HMAC-SHA-256 by the node's secret key
};

struct Block {
  std::uint64_t index = 0;
  Digest32 prev_hash{};
  std::uint64_t timestamp = 0;  // caller-supplied logical seconds
  std::vector<VerdictTx> txs;
  std::uint64_t nonce = 0;
  Digest32 hash{};
};

using KeyRegistry = std::map<std::string, Digest32>;  // node_id -> secret key

// canonical bytes of (file_id, node_id, probability, round); HMAC input
ByteVec tx_auth_bytes(const VerdictTx& tx);
// full canonical tx record including the tag
void append_tx(ByteVec& out, const VerdictTx& tx);

Digest32 make_auth_tag(const VerdictTx& tx, const Digest32& key);
bool verify_tag(const VerdictTx& tx, const Digest32& key);

// canonical bytes of (index, prev_hash, timestamp, txs, nonce)
ByteVec block_content_bytes(const Block& b);
Digest32 block_hash(const Block& b);

bool meets_difficulty(const Digest32& hash, int difficulty_bits);

struct MineResult {
  Block block;
  std::uint64_t attempts = 0;  // nonces tried (nonce + 1)
};

// Deterministic ascending nonce search from 0. Txs must authenticate against
// the registry (AuthFailure otherwise); pass nullptr to skip tag checks.
MineResult mine_block(const Block& prev, std::vector<VerdictTx> txs,
                      int difficulty_bits, std::uint64_t timestamp,
                      const KeyRegistry* keys);

// Mined empty block: index 0, zero prev_hash, timestamp 0.
Block genesis(int difficulty_bits);

struct VerifyResult {
  bool ok = true;
  std::size_t first_bad_index = 0;  // meaningful when !ok
  std::string reason;
};

// Recomputed hashes, difficulty, prev links and (when keys given) tx tags.
VerifyResult verify_chain(const std::vector<Block>& blocks, int difficulty_bits,
                          const KeyRegistry* keys);

// All transactions with the given file_id, in chain order.
std::vector<VerdictTx> query_verdicts(const std::vector<Block>& blocks,
                                      const Digest32& file_id);

// Append-only chain with the single-writer contract; rejects duplicate
// (node_id, round, file_id) verdicts at append time.
class HashChain {
 public:
  explicit HashChain(int difficulty_bits);
  HashChain(std::vector<Block> blocks, int difficulty_bits);  // adopts as-is

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }
  int difficulty() const { return difficulty_; }

  // Mines and appends; returns the new block. Throws DuplicateVerdict or
  // AuthFailure (when keys provided).
  const Block& append(std::vector<VerdictTx> txs, std::uint64_t timestamp,
                      const KeyRegistry* keys);

 private:
  void index_txs(const Block& b);

  std::vector<Block> blocks_;
  int difficulty_;
  std::set<std::string> seen_;  // "<node_id>/<round>/<file_id hex>"
};

// Binary log of canonical block records (content bytes + stored hash).
void save_chain(const std::vector<Block>& blocks, const std::string& path);

struct LoadResult {
  std::vector<Block> blocks;        // fully parsed prefix
  std::optional<std::size_t> parse_error_index;  // block where parsing failed
};

LoadResult load_chain(const std::string& path);
ByteVec serialize_chain(const std::vector<Block>& blocks);
LoadResult deserialize_chain(std::span<const std::uint8_t> bytes);

}  // namespace dfw::chain
