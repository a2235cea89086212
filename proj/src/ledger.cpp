#include "ark/ledger.hpp"

#include "ark/json_io.hpp"

#include <algorithm>

namespace ark {

// ---- Tx

Bytes serialize_unsigned(const Tx& tx)
{
    Bytes b;
    put_u32(b, static_cast<std::uint32_t>(tx.ins.size()));
    for (auto& i : tx.ins) {
        put_bytes(b, i.txid.b);
        put_u32(b, i.vout);
    }
    put_u32(b, static_cast<std::uint32_t>(tx.outs.size()));
    for (auto& o : tx.outs) {
        put_i64(b, o.value);
        put_bytes(b, o.lock.commitment.b);
    }
    put_u32(b, tx.locktime);
    return b;
}

TxId Tx::txid() const { return crypto::tagged_hash("ark/txid", serialize_unsigned(*this)); }

crypto::Hash256 Tx::sighash(std::size_t input) const
{
    Bytes b = serialize_unsigned(*this);
    put_u32(b, static_cast<std::uint32_t>(input));
    return crypto::tagged_hash("ark/sighash", b);
}

Bytes Tx::sighash_bytes(std::size_t input) const
{
    auto h = sighash(input);
    return Bytes(h.b.begin(), h.b.end());
}

Amount Tx::out_value() const
{
    Amount s = 0;
    for (auto& o : outs) s += o.value;
    return s;
}

const char* reject_name(Reject r)
{
    switch (r) {
    case Reject::None: return "None";
    case Reject::Duplicate: return "Duplicate";
    case Reject::Malformed: return "Malformed";
    case Reject::MissingInput: return "MissingInput";
    case Reject::DoubleSpend: return "DoubleSpend";
    case Reject::InvalidWitness: return "InvalidWitness";
    case Reject::ValueCreated: return "ValueCreated";
    }
    return "?";
}

// ---- View

bool View::contains(const TxId& id) const { return tx_height(id).has_value(); }

std::optional<Height> View::tx_height(const TxId& id) const
{
    auto it = ledger_->txs_.find(id);
    if (it == ledger_->txs_.end() || it->second.first > at_) return std::nullopt;
    return it->second.first;
}

bool View::exists(const OutPoint& op) const
{
    auto* r = ledger_->record(op);
    return r && r->height <= at_;
}

bool View::unspent(const OutPoint& op) const
{
    auto* r = ledger_->record(op);
    return r && r->height <= at_ && (!r->spent_by || r->spent_height > at_);
}

const Output* View::output(const OutPoint& op) const
{
    auto* r = ledger_->record(op);
    return r && r->height <= at_ ? &r->out : nullptr;
}

std::optional<TxId> View::spender(const OutPoint& op) const
{
    auto* r = ledger_->record(op);
    if (!r || !r->spent_by || r->spent_height > at_) return std::nullopt;
    return r->spent_by;
}

std::vector<std::pair<OutPoint, Output>> View::utxos() const
{
    std::vector<std::pair<OutPoint, Output>> out;
    for (auto& [op, r] : ledger_->outputs_)
        if (r.height <= at_ && (!r.spent_by || r.spent_height > at_)) out.emplace_back(op, r.out);
    return out;
}

const Tx* View::tx(const TxId& id) const
{
    auto it = ledger_->txs_.find(id);
    if (it == ledger_->txs_.end() || it->second.first > at_) return nullptr;
    return &ledger_->blocks_[it->second.first].txs[it->second.second];
}

// ---- Ledger

Ledger::Ledger(int k) : k_(k)
{
    if (k < 1) throw Error(Errc::InvalidArgument, "k must be positive");
    blocks_.push_back(Block{0, {}});
}

void Ledger::register_party(const PartyId& p) { parties_.insert(p); }

OutPoint Ledger::mint(Amount value, const script::LockScript& lock)
{
    if (blocks_.size() != 1) throw Error(Errc::Precondition, "mint only before the first round");
    if (value <= 0) throw Error(Errc::InvalidArgument, "mint value must be positive");
    Tx tx;
    tx.outs.push_back({value, lock});
    tx.locktime = mints_++;
    TxId id = tx.txid();
    blocks_[0].txs.push_back(tx);
    txs_[id] = {0, blocks_[0].txs.size() - 1};
    outputs_[{id, 0}] = OutputRecord{tx.outs[0], 0, std::nullopt, 0};
    return {id, 0};
}

const OutputRecord* Ledger::record(const OutPoint& op) const
{
    auto it = outputs_.find(op);
    return it == outputs_.end() ? nullptr : &it->second;
}

const Tx* Ledger::find_tx(const TxId& id) const { return tip_view().tx(id); }

std::optional<Height> Ledger::tx_height(const TxId& id) const { return tip_view().tx_height(id); }

bool Ledger::in_mempool(const TxId& id) const { return mempool_index_.count(id) > 0; }

Amount Ledger::utxo_total(Height at) const
{
    Amount s = 0;
    for (auto& [op, o] : View(this, at).utxos()) s += o.value;
    return s;
}

View Ledger::view(const PartyId& party, int depth) const
{
    if (!has_party(party)) throw Error(Errc::UnknownParty, "unknown party " + party);
    if (depth < 0) throw Error(Errc::InvalidArgument, "negative depth");
    return View(this, tip() - depth);
}

bool Ledger::find_input(const OutPoint& op, InputInfo& info, Reject& why) const
{
    if (auto* r = record(op)) {
        if (r->spent_by) {
            why = Reject::DoubleSpend;
            return false;
        }
        info = {&r->out, r->height, false};
        return true;
    }
    auto it = mempool_index_.find(op.txid);
    if (it != mempool_index_.end()) {
        const Tx& parent = mempool_.at(it->second).tx;
        if (op.vout < parent.outs.size()) {
            info = {&parent.outs[op.vout], tip() + 1, true};
            return true;
        }
    }
    why = Reject::MissingInput;
    return false;
}

SubmitResult Ledger::submit(const Tx& tx, const PartyId& by)
{
    if (!has_party(by)) throw Error(Errc::UnknownParty, "unknown party " + by);
    if (tx.ins.empty() || tx.wits.size() != tx.ins.size())
        return {false, Reject::Malformed, "inputs and witnesses must pair up"};
    {
        std::set<OutPoint> seen(tx.ins.begin(), tx.ins.end());
        if (seen.size() != tx.ins.size()) return {false, Reject::Malformed, "duplicate input"};
    }
    for (auto& o : tx.outs)
        if (o.value < 0) return {false, Reject::Malformed, "negative output"};

    TxId id = tx.txid();
    if (txs_.count(id) || in_mempool(id)) return {true, Reject::Duplicate, "already known"};

    Amount in_sum = 0;
    std::vector<InputInfo> infos(tx.ins.size());
    for (std::size_t i = 0; i < tx.ins.size(); ++i) {
        Reject why = Reject::None;
        if (!find_input(tx.ins[i], infos[i], why)) return {false, why, tx.ins[i].str()};
        in_sum += infos[i].out->value;
    }
    if (tx.out_value() > in_sum) return {false, Reject::ValueCreated, "outputs exceed inputs"};

    Height next = tip() + 1;
    for (std::size_t i = 0; i < tx.ins.size(); ++i) {
        const auto& lock = infos[i].out->lock;
        const auto& wit = tx.wits[i];
        if (!script::reveal_matches(lock, wit))
            return {false, Reject::InvalidWitness, "revealed script does not match input " + std::to_string(i)};
        if (!script::signatures_valid(wit, tx.sighash_bytes(i)))
            return {false, Reject::InvalidWitness, "bad signature on input " + std::to_string(i)};
        if (!script::timelocks_satisfied(wit, next, infos[i].confirm))
            return {false, Reject::InvalidWitness, "timelock not satisfied on input " + std::to_string(i)};
    }

    int d = policy_.delay ? policy_.delay(tx, by, tip()) : 0;
    d = std::clamp(d, 0, 2 * k_ - 1);
    MempoolEntry e{tx, id, by, tip(), tip() + 1 + d, seq_++};
    mempool_index_[id] = e.seq;
    mempool_.emplace(e.seq, std::move(e));
    return {true, Reject::None, ""};
}

bool Ledger::includable(const MempoolEntry& e, Height H) const
{
    for (std::size_t i = 0; i < e.tx.ins.size(); ++i) {
        auto* r = record(e.tx.ins[i]);
        if (!r || r->spent_by) return false;
        if (!script::timelocks_satisfied(e.tx.wits[i], H, r->height)) return false;
    }
    return true;
}

std::optional<PartyId> Ledger::submitter(const TxId& id) const
{
    auto it = submitted_by_.find(id);
    if (it == submitted_by_.end()) return std::nullopt;
    return it->second;
}

void Ledger::include(const Tx& tx, const TxId& id, Height H, const PartyId& by)
{
    submitted_by_[id] = by;
    for (auto& in : tx.ins) {
        auto& r = outputs_.at(in);
        r.spent_by = id;
        r.spent_height = H;
    }
    for (std::uint32_t i = 0; i < tx.outs.size(); ++i)
        outputs_[{id, i}] = OutputRecord{tx.outs[i], H, std::nullopt, 0};
    blocks_.back().txs.push_back(tx);
    txs_[id] = {H, blocks_.back().txs.size() - 1};
}

Height Ledger::advance_round()
{
    Height H = tip() + 1;
    blocks_.push_back(Block{H, {}});
    for (;;) {
        std::vector<const MempoolEntry*> cands;
        for (auto& [seq, e] : mempool_)
            if (e.ready <= H && includable(e, H)) cands.push_back(&e);
        if (cands.empty()) break;
        if (policy_.prefer)
            std::stable_sort(cands.begin(), cands.end(),
                             [&](const MempoolEntry* a, const MempoolEntry* b) { return policy_.prefer(*a, *b); });
        std::vector<std::uint64_t> done;
        for (auto* c : cands) {
            bool free = std::all_of(c->tx.ins.begin(), c->tx.ins.end(),
                                    [&](const OutPoint& op) { return !outputs_.at(op).spent_by; });
            if (!free) continue;
            include(c->tx, c->id, H, c->by);
            done.push_back(c->seq);
        }
        for (auto s : done) {
            mempool_index_.erase(mempool_.at(s).id);
            mempool_.erase(s);
        }
    }
    evict_conflicts();
    return H;
}

// Drops mempool txs that can never confirm: an input already spent onchain, or
// an input whose creating tx is neither onchain nor pending.
void Ledger::evict_conflicts()
{
    for (bool changed = true; changed;) {
        changed = false;
        for (auto it = mempool_.begin(); it != mempool_.end();) {
            bool dead = false;
            for (auto& in : it->second.tx.ins) {
                if (auto* r = record(in)) {
                    if (r->spent_by) dead = true;
                } else if (!mempool_index_.count(in.txid)) {
                    dead = true;
                }
                if (dead) break;
            }
            if (dead) {
                evicted_.push_back(it->second.id);
                mempool_index_.erase(it->second.id);
                it = mempool_.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
}

std::string Ledger::dump_jsonl() const
{
    std::string out;
    for (auto& b : blocks_) {
        io::json txs = io::json::array();
        for (auto& tx : b.txs) txs.push_back(io::to_json(tx));
        out += io::json{{"height", b.height}, {"txs", txs}}.dump();
        out += '\n';
    }
    return out;
}

} // namespace ark
