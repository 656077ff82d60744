#include "dfw/chain.hpp"

#include <fstream>

#include "dfw/wire.hpp"

namespace dfw::chain {

namespace {
constexpr std::uint32_t kMaxNodeId = 4096;
constexpr std::uint32_t kMaxTxCount = 1u << 20;
}  // namespace

ByteVec tx_auth_bytes(const VerdictTx& tx) {
  ByteVec out;
  wire::put_bytes(out, tx.file_id);
  wire::put_string(out, tx.node_id);
  wire::put_f64(out, tx.probability);
  wire::put_u64(out, tx.round);
  return out;
}

void append_tx(ByteVec& out, const VerdictTx& tx) {
  wire::put_bytes(out, tx.file_id);
  wire::put_string(out, tx.node_id);
  wire::put_f64(out, tx.probability);
  wire::put_u64(out, tx.round);
  wire::put_bytes(out, tx.auth_tag);
}

Digest32 make_auth_tag(const VerdictTx& tx, const Digest32& key) {
  return hmac_sha256(key, tx_auth_bytes(tx));
}

bool verify_tag(const VerdictTx& tx, const Digest32& key) {
  return make_auth_tag(tx, key) == tx.auth_tag;
}

ByteVec block_content_bytes(const Block& b) {
  ByteVec out;
  wire::put_u64(out, b.index);
  wire::put_bytes(out, b.prev_hash);
  wire::put_u64(out, b.timestamp);
  wire::put_u32(out, static_cast<std::uint32_t>(b.txs.size()));
  for (const auto& tx : b.txs) append_tx(out, tx);
  wire::put_u64(out, b.nonce);
  return out;
}

Digest32 block_hash(const Block& b) { return sha256(block_content_bytes(b)); }

bool meets_difficulty(const Digest32& hash, int difficulty_bits) {
  return leading_zero_bits(hash) >= difficulty_bits;
}

MineResult mine_block(const Block& prev, std::vector<VerdictTx> txs,
                      int difficulty_bits, std::uint64_t timestamp,
                      const KeyRegistry* keys) {
  if (difficulty_bits < 0 || difficulty_bits > 256)
    throw Error("mine_block: difficulty out of range");
  if (keys != nullptr) {
    for (const auto& tx : txs) {
      const auto it = keys->find(tx.node_id);
      if (it == keys->end() || !verify_tag(tx, it->second))
        throw AuthFailure("mine_block: bad auth tag for node '" + tx.node_id + "'");
    }
  }

  MineResult result;
  Block& b = result.block;
  b.index = prev.index + 1;
  b.prev_hash = prev.hash;
  b.timestamp = timestamp;
  b.txs = std::move(txs);
  b.nonce = 0;

  // re-hash with only the trailing nonce bytes patched per attempt
  ByteVec content = block_content_bytes(b);
  const std::size_t nonce_off = content.size() - 8;
  for (std::uint64_t nonce = 0;; ++nonce) {
    for (int i = 0; i < 8; ++i)
      content[nonce_off + i] = static_cast<std::uint8_t>(nonce >> (8 * i));
    const Digest32 h = sha256(content);
    ++result.attempts;
    if (meets_difficulty(h, difficulty_bits)) {
      b.nonce = nonce;
      b.hash = h;
      return result;
    }
  }
}

Block genesis(int difficulty_bits) {
  Block zero;  // stands in for "prev" of the genesis: index -1 semantics
  zero.index = static_cast<std::uint64_t>(-1);
  zero.hash = Digest32{};
  return mine_block(zero, {}, difficulty_bits, 0, nullptr).block;
}

VerifyResult verify_chain(const std::vector<Block>& blocks, int difficulty_bits,
                          const KeyRegistry* keys) {
  VerifyResult r;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    auto fail = [&](const std::string& why) {
      r.ok = false;
      r.first_bad_index = i;
      r.reason = why;
      return r;
    };
    if (b.index != i) return fail("index mismatch");
    if (i == 0) {
      if (b.prev_hash != Digest32{}) return fail("genesis prev_hash not zero");
    } else if (b.prev_hash != blocks[i - 1].hash) {
      return fail("prev_hash does not link");
    }
    if (block_hash(b) != b.hash) return fail("stored hash does not recompute");
    if (!meets_difficulty(b.hash, difficulty_bits)) return fail("difficulty not met");
    for (const auto& tx : b.txs) {
      if (!(tx.probability >= 0.0 && tx.probability <= 1.0))
        return fail("probability out of range");
      if (keys != nullptr) {
        const auto it = keys->find(tx.node_id);
        if (it == keys->end()) return fail("unknown node '" + tx.node_id + "'");
        if (!verify_tag(tx, it->second))
          return fail("auth tag invalid for node '" + tx.node_id + "'");
      }
    }
  }
  return r;
}

std::vector<VerdictTx> query_verdicts(const std::vector<Block>& blocks,
                                      const Digest32& file_id) {
  std::vector<VerdictTx> out;
  for (const auto& b : blocks)
    for (const auto& tx : b.txs)
      if (tx.file_id == file_id) out.push_back(tx);
  return out;
}

HashChain::HashChain(int difficulty_bits)
    : blocks_{genesis(difficulty_bits)}, difficulty_(difficulty_bits) {}

HashChain::HashChain(std::vector<Block> blocks, int difficulty_bits)
    : blocks_(std::move(blocks)), difficulty_(difficulty_bits) {
  if (blocks_.empty()) throw Error("HashChain: empty block list");
  for (const auto& b : blocks_) index_txs(b);
}

void HashChain::index_txs(const Block& b) {
  for (const auto& tx : b.txs) {
    const std::string key =
        tx.node_id + "/" + std::to_string(tx.round) + "/" + to_hex(tx.file_id);
    if (!seen_.insert(key).second)
      throw DuplicateVerdict("duplicate verdict: " + key);
  }
}

const Block& HashChain::append(std::vector<VerdictTx> txs, std::uint64_t timestamp,
                               const KeyRegistry* keys) {
  // check uniqueness before mining; also catches duplicates within the batch
  std::set<std::string> batch_keys;
  for (const auto& tx : txs) {
    const std::string key =
        tx.node_id + "/" + std::to_string(tx.round) + "/" + to_hex(tx.file_id);
    if (seen_.count(key) != 0 || !batch_keys.insert(key).second)
      throw DuplicateVerdict("duplicate verdict: " + key);
  }
  Block b = mine_block(blocks_.back(), std::move(txs), difficulty_, timestamp, keys).block;
  index_txs(b);
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

ByteVec serialize_chain(const std::vector<Block>& blocks) {
  ByteVec out;
  for (const auto& b : blocks) {
    const ByteVec content = block_content_bytes(b);
    wire::put_bytes(out, content);
    wire::put_bytes(out, b.hash);
  }
  return out;
}

LoadResult deserialize_chain(std::span<const std::uint8_t> bytes) {
  LoadResult result;
  wire::Cursor cur(bytes);
  while (!cur.done()) {
    try {
      Block b;
      b.index = cur.u64();
      auto prev = cur.bytes(32);
      std::copy(prev.begin(), prev.end(), b.prev_hash.begin());
      b.timestamp = cur.u64();
      const std::uint32_t n_txs = cur.u32();
      if (n_txs > kMaxTxCount) throw ParseError("chain log: absurd tx count");
      b.txs.reserve(n_txs);
      for (std::uint32_t t = 0; t < n_txs; ++t) {
        VerdictTx tx;
        auto fid = cur.bytes(32);
        std::copy(fid.begin(), fid.end(), tx.file_id.begin());
        const std::uint32_t id_len = cur.u32();
        if (id_len > kMaxNodeId) throw ParseError("chain log: absurd node id length");
        auto id = cur.bytes(id_len);
        tx.node_id.assign(id.begin(), id.end());
        tx.probability = cur.f64();
        tx.round = cur.u64();
        auto tag = cur.bytes(32);
        std::copy(tag.begin(), tag.end(), tx.auth_tag.begin());
        b.txs.push_back(std::move(tx));
      }
      b.nonce = cur.u64();
      auto h = cur.bytes(32);
      std::copy(h.begin(), h.end(), b.hash.begin());
      result.blocks.push_back(std::move(b));
    } catch (const ParseError&) {
      result.parse_error_index = result.blocks.size();
      return result;
    }
  }
  return result;
}

void save_chain(const std::vector<Block>& blocks, const std::string& path) {
  const ByteVec bytes = serialize_chain(blocks);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("save_chain: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoFailure("save_chain: write failed for " + path);
}

LoadResult load_chain(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("load_chain: cannot open " + path);
  const ByteVec bytes((std::istreambuf_iterator<char>(f)),
                      std::istreambuf_iterator<char>());
  return deserialize_chain(bytes);
}

}  // namespace dfw::chain
