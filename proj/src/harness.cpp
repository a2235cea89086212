#include "ark/harness.hpp"

#include <algorithm>

namespace ark::harness {

static io::json points(const std::set<OutPoint>& s)
{
    io::json a = io::json::array();
    for (auto& p : s) a.push_back(p.str());
    return a;
}

io::json ArkState::to_json() const { return {{"C", points(C)}, {"F", points(F)}, {"S", points(S)}}; }

// vtxos an ark request consumed: reset inputs, or the ark inputs without resets
static std::vector<OutPoint> ark_spends(const op::ArkSigned& a)
{
    if (a.resets.empty()) return a.ark.ins;
    std::vector<OutPoint> out;
    for (auto& r : a.resets) out.push_back(r.ins.at(0));
    return out;
}

VtxoIndex index_vtxos(const Ledger& chain, const sim::TranscriptLog& log)
{
    VtxoIndex idx;
    View st = chain.stable_view();
    for (auto& b : log.commitments) {
        if (!b.batch) continue;
        bool stable = st.contains(b.txid());
        for (std::size_t l = 0; l < b.batch->vtxt.leaf_count(); ++l) {
            OutPoint pt = b.batch->vtxt.leaf_outpoint(l);
            idx.out[pt] = b.batch->vtxt.leaf_output(l);
            idx.expiry[pt] = b.expiry;
            if (stable) idx.leaves.insert(pt);
        }
    }
    for (auto& a : log.arks) {
        Height e = std::numeric_limits<Height>::max();
        for (auto& v : ark_spends(a))
            if (auto it = idx.expiry.find(v); it != idx.expiry.end()) e = std::min(e, it->second);
        TxId id = a.ark.txid();
        for (std::uint32_t j = 0; j < a.ark.outs.size(); ++j) {
            OutPoint pt{id, j};
            idx.out[pt] = a.ark.outs[j];
            idx.expiry[pt] = e;
            idx.ark_outs.insert(pt);
        }
    }
    return idx;
}

ArkState derive_state(const Ledger& chain, const sim::TranscriptLog& log)
{
    VtxoIndex idx = index_vtxos(chain, log);
    View st = chain.stable_view();
    Height tip = chain.tip();
    ArkState s;
    for (auto& a : log.arks)
        for (auto& v : ark_spends(a)) s.S.insert(v);
    for (auto& b : log.commitments)
        if (st.contains(b.txid()))
            for (auto& v : b.forfeited()) s.S.insert(v);
    auto live = [&](const OutPoint& v) { return !s.S.count(v) && idx.expiry.at(v) > tip; };
    for (auto& v : idx.leaves)
        if (live(v)) s.C.insert(v);
    for (auto& v : idx.ark_outs)
        if (live(v)) s.F.insert(v);
    return s;
}

ArkState book_state(const op::OperatorBook& book, Height tip)
{
    ArkState s;
    s.C = book.confirmedVTXO;
    s.F = book.preConfirmed;
    for (auto& [c, ps] : book.unconfirmedSpent)
        for (auto& [v, f] : ps) {
            auto o = book.origin.find(v);
            if (o != book.origin.end() && o->second == op::Origin::PreConfirmed)
                s.F.insert(v);
            else
                s.C.insert(v);
        }
    for (auto* set : {&s.C, &s.F})
        for (auto it = set->begin(); it != set->end();)
            it = book.info.at(*it).expiry <= tip ? set->erase(it) : std::next(it);
    for (auto& [v, t] : book.spent) s.S.insert(v);
    return s;
}

std::string diff(const ArkState& a, const ArkState& b)
{
    std::string out;
    auto cmp = [&](const char* name, const std::set<OutPoint>& x, const std::set<OutPoint>& y) {
        for (auto& v : x)
            if (!y.count(v)) out += std::string(name) + " oracle-only " + v.str() + "; ";
        for (auto& v : y)
            if (!x.count(v)) out += std::string(name) + " book-only " + v.str() + "; ";
    };
    cmp("C", a.C, b.C);
    cmp("F", a.F, b.F);
    cmp("S", a.S, b.S);
    return out;
}

// ---- monitor

Monitor::Monitor(sim::World& w)
{
    w.on_round = [this](sim::World& world) { check(world); };
}

void Monitor::check(sim::World& w)
{
    ++rounds_;
    Height tip = w.chain.tip();
    ArkState now = derive_state(w.chain, w.log);

    if (compare_book) {
        ArkState book = book_state(w.op.book(), tip);
        if (!(now == book)) {
            ++agreement_failures_;
            if (agreement_error_.empty()) agreement_error_ = "height " + std::to_string(tip) + ": " + diff(now, book);
        }
    }

    // every change must be a spend of a known vtxo, a new output, or an expiry
    VtxoIndex idx = index_vtxos(w.chain, w.log);
    auto flag = [&](const std::string& m) {
        ++transition_failures_;
        if (transition_error_.empty()) transition_error_ = "height " + std::to_string(tip) + ": " + m;
    };
    for (auto& v : last_.S)
        if (!now.S.count(v)) flag("left S: " + v.str());
    for (auto& v : now.S)
        if (!idx.out.count(v)) flag("spent vtxo never issued: " + v.str());
    for (auto* pair : {&last_.C, &last_.F})
        for (auto& v : *pair)
            if (!now.C.count(v) && !now.F.count(v) && !now.S.count(v) && idx.expiry.at(v) > tip)
                flag("vanished without spend or expiry: " + v.str());
    for (auto& v : now.C)
        if (now.F.count(v) || now.S.count(v)) flag("C overlaps F or S: " + v.str());
    for (auto& v : now.F)
        if (now.S.count(v)) flag("F overlaps S: " + v.str());

    for (auto& [v, info] : w.op.book().info) {
        auto l = w.op.book().lists_of(v);
        if (l.size() != 1) {
            ++list_failures_;
            if (list_error_.empty()) {
                list_error_ = "height " + std::to_string(tip) + ": " + v.str() + " in " + std::to_string(l.size()) + " lists";
                for (auto& n : l) list_error_ += " " + n;
            }
        }
    }
    last_ = std::move(now);
}

Verdict Monitor::oracle_agreement() const
{
    return {"oracle-agreement", agreement_failures_ == 0 && rounds_ > 0,
            agreement_failures_ ? agreement_error_ : std::to_string(rounds_) + " rounds"};
}

Verdict Monitor::transitions() const
{
    return {"transition-soundness", transition_failures_ == 0,
            transition_failures_ ? transition_error_ : std::to_string(rounds_) + " rounds"};
}

Verdict Monitor::list_machine() const
{
    return {"list-machine", list_failures_ == 0, list_failures_ ? list_error_ : "every vtxo in exactly one list"};
}

// ---- one-shot checks

Verdict check_single_spend(const op::Operator& o)
{
    for (auto& [v, txs] : o.cosigned())
        if (txs.size() > 1)
            return {"single-spend", false, v.str() + " co-signed in " + std::to_string(txs.size()) + " txs"};
    return {"single-spend", true, std::to_string(o.cosigned().size()) + " vtxos"};
}

static std::optional<crypto::PublicKey> owner_of(const script::LockScript& lock)
{
    if (lock.paths.size() != 2) return std::nullopt;
    auto& p = lock.paths[core::kUnilateralPath];
    if (p.kind != script::Kind::And || p.children.empty() || p.children[0].kind != script::Kind::CheckSig)
        return std::nullopt;
    return p.children[0].pk;
}

Verdict check_t1_safety(const sim::World& w)
{
    VtxoIndex idx = index_vtxos(w.chain, w.log);
    std::size_t checked = 0;
    for (auto& [v, o] : idx.out) {
        const OutputRecord* rec = w.chain.record(v);
        if (!rec || !rec->spent_by) continue;
        auto owner = owner_of(o.lock);
        if (!owner) continue;
        const wallet::Wallet* holder = nullptr;
        for (auto& wl : w.wallets())
            if (wl->pk() == *owner) holder = wl.get();
        if (!holder) continue;
        const Tx* t = w.chain.find_tx(*rec->spent_by);
        std::size_t i = std::find(t->ins.begin(), t->ins.end(), v) - t->ins.begin();
        if (!holder->signed_digests().count(t->sighash_bytes(i)))
            return {"T1-safety", false,
                    v.str() + " of " + holder->id() + " spent onchain by " + t->txid().hex() + " without the owner's consent"};
        ++checked;
    }
    return {"T1-safety", true, std::to_string(checked) + " onchain vtxo spends, all owner-signed"};
}

io::json Conservation::to_json() const
{
    return {{"height", at},          {"initial", initial},       {"final", final_balance}, {"fees", fees},
            {"unclaimed", unclaimed}, {"expected", expected()}, {"deficit", deficit()}};
}

Conservation conservation(const sim::World& w)
{
    Conservation c;
    c.at = w.chain.tip();
    View tipv = w.chain.tip_view();
    c.initial = w.operator_initial;
    c.final_balance = w.op.balance(tipv);
    VtxoIndex idx = index_vtxos(w.chain, w.log);
    ArkState s = derive_state(w.chain, w.log);
    auto value = [&](const std::vector<OutPoint>& vs) {
        Amount a = 0;
        for (auto& v : vs) a += idx.out.at(v).value;
        return a;
    };
    auto sum = [](const std::vector<Output>& os) {
        Amount a = 0;
        for (auto& o : os) a += o.value;
        return a;
    };
    for (auto& b : w.log.commitments) {
        if (!tipv.contains(b.txid())) continue;
        for (auto& r : b.boardings) c.fees += r.output.value - sum(r.vtxos);
        for (auto& r : b.swaps) c.fees += value(r.vtxos) - sum(r.outs);
        for (auto& r : b.exits) c.fees += value(r.vtxos) - sum(r.outs);
    }
    // an ark fee that went onchain went to the miner
    for (auto& a : w.log.arks)
        if (!tipv.contains(a.ark.txid())) c.fees += value(ark_spends(a)) - sum(a.ark.outs);
    for (auto* set : {&idx.leaves, &idx.ark_outs})
        for (auto& v : *set)
            if (!s.S.count(v) && !w.chain.record(v)) c.unclaimed += idx.out.at(v).value;
    return c;
}

Height settle_height(const sim::World& w)
{
    Height h = 0;
    for (auto& b : w.log.commitments) h = std::max(h, b.h_O);
    auto& p = w.params();
    return h + 4 * p.k + p.t_e;
}

} // namespace ark::harness
