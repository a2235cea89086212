#pragma once

// Round-based simulated chain: one block per round, no forks, adversarial
// inclusion delay, and per-party views at depth 0 or k.

#include "ark/script.hpp"

#include <functional>
#include <map>
#include <set>

namespace ark {

using TxId = crypto::Hash256;

struct OutPoint {
    TxId txid;
    std::uint32_t vout = 0;
    auto operator<=>(const OutPoint&) const = default;
    std::string str() const { return txid.hex() + ":" + std::to_string(vout); }
};

struct Output {
    Amount value = 0;
    script::LockScript lock;
};

struct Tx {
    std::vector<OutPoint> ins;
    std::vector<script::Witness> wits;
    std::vector<Output> outs;
    std::uint32_t locktime = 0;   // only distinguishes otherwise identical mints

    TxId txid() const;
    // SIGHASH_ALL digest for input i: commits to every input and output.
    crypto::Hash256 sighash(std::size_t input) const;
    Bytes sighash_bytes(std::size_t input) const;
    Amount out_value() const;
};

// Serialization without witnesses; txid is its hash.
Bytes serialize_unsigned(const Tx& tx);

enum class Reject { None, Duplicate, Malformed, MissingInput, DoubleSpend, InvalidWitness, ValueCreated };
const char* reject_name(Reject r);

struct SubmitResult {
    bool accepted = false;
    Reject reason = Reject::None;
    std::string detail;
};

struct MempoolEntry {
    Tx tx;
    TxId id;
    PartyId by;
    Height submitted = 0;   // tip at submission
    Height ready = 0;       // earliest block height
    std::uint64_t seq = 0;
};

// Adversary hooks. delay() is clamped to [0, 2k-1]; a tx submitted at tip h
// with delay d becomes includable in block h+1+d. prefer(a, b) orders
// conflicting candidates (true: a wins over b).
struct InclusionPolicy {
    std::function<int(const Tx&, const PartyId&, Height)> delay;
    std::function<bool(const MempoolEntry&, const MempoolEntry&)> prefer;
};

struct Block {
    Height height = 0;
    std::vector<Tx> txs;
};

struct OutputRecord {
    Output out;
    Height height = 0;
    std::optional<TxId> spent_by;
    Height spent_height = 0;
};

class Ledger;

// Ledger state as of a given height (tip minus depth).
class View {
public:
    View(const Ledger* l, Height at) : ledger_(l), at_(at) {}
    Height height() const { return at_; }
    bool contains(const TxId& id) const;
    std::optional<Height> tx_height(const TxId& id) const;
    bool exists(const OutPoint& op) const;     // created by height
    bool unspent(const OutPoint& op) const;    // created and not yet spent
    const Output* output(const OutPoint& op) const;
    std::optional<TxId> spender(const OutPoint& op) const;
    std::vector<std::pair<OutPoint, Output>> utxos() const;
    const Tx* tx(const TxId& id) const;

private:
    const Ledger* ledger_;
    Height at_;
};

class Ledger {
public:
    explicit Ledger(int k = 6);

    int k() const { return k_; }
    Height tip() const { return static_cast<Height>(blocks_.size()) - 1; }

    void register_party(const PartyId& p);
    bool has_party(const PartyId& p) const { return parties_.count(p) > 0; }
    void set_policy(InclusionPolicy p) { policy_ = std::move(p); }
    const InclusionPolicy& policy() const { return policy_; }

    // Creates funds in the genesis block; only allowed before the first round.
    OutPoint mint(Amount value, const script::LockScript& lock);

    SubmitResult submit(const Tx& tx, const PartyId& by);
    Height advance_round();

    View view(const PartyId& party, int depth) const;
    View at(Height h) const { return View(this, h); }
    View tip_view() const { return View(this, tip()); }
    View stable_view() const { return View(this, tip() - k_); }

    const std::vector<Block>& blocks() const { return blocks_; }
    const std::map<std::uint64_t, MempoolEntry>& mempool() const { return mempool_; }
    bool in_mempool(const TxId& id) const;
    const OutputRecord* record(const OutPoint& op) const;
    const Tx* find_tx(const TxId& id) const;
    std::optional<Height> tx_height(const TxId& id) const;
    Amount utxo_total(Height at) const;
    std::vector<TxId> evicted() const { return evicted_; }
    // Who submitted a confirmed tx (nullopt for genesis mints).
    std::optional<PartyId> submitter(const TxId& id) const;

    // One JSON object per line and block.
    std::string dump_jsonl() const;

private:
    friend class View;
    struct InputInfo {
        const Output* out;
        Height confirm;   // assumed confirmation height
        bool in_mempool;
    };
    bool find_input(const OutPoint& op, InputInfo& info, Reject& why) const;
    bool includable(const MempoolEntry& e, Height H) const;
    void include(const Tx& tx, const TxId& id, Height H, const PartyId& by);
    void evict_conflicts();

    int k_;
    std::vector<Block> blocks_;
    std::map<OutPoint, OutputRecord> outputs_;
    std::map<TxId, std::pair<Height, std::size_t>> txs_;
    std::map<std::uint64_t, MempoolEntry> mempool_;   // by submission sequence
    std::map<TxId, std::uint64_t> mempool_index_;
    std::vector<TxId> evicted_;
    std::map<TxId, PartyId> submitted_by_;
    std::set<PartyId> parties_;
    InclusionPolicy policy_;
    std::uint64_t seq_ = 0;
    std::uint32_t mints_ = 0;
};

} // namespace ark
