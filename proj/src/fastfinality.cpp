#include "ark/fastfinality.hpp"

#include <algorithm>

namespace ark::ff {

using script::Predicate;

const char* phase_name(Phase p)
{
    switch (p) {
    case Phase::Waiting: return "waiting";
    case Phase::Accepted: return "accepted";
    case Phase::Rejected: return "rejected";
    }
    return "?";
}

script::LockScript collateral_lock(const crypto::AggregateKey& committee, const PublicKey& op, Height t_p)
{
    return script::taproot(std::nullopt,
                           {Predicate::all({Predicate::check_agg_sig(committee), Predicate::check_sig(op)}),
                            Predicate::all({Predicate::check_sig(op), Predicate::abs_timelock(t_p)})});
}

Collateral setup_collateral(op::Operator& o, const FfConfig& cfg, const std::string& label)
{
    if (cfg.c <= cfg.v) throw Error(Errc::Config, "collateral must exceed the opted-in value");
    if (cfg.committee < 1) throw Error(Errc::Config, "committee needs at least one member");
    Collateral col;
    col.t_p = cfg.t_p;
    // committee secrets live only inside this scope
    std::vector<SecretKey> secrets;
    std::vector<PublicKey> pks;
    for (int i = 0; i < cfg.committee; ++i) {
        auto kp = crypto::keygen_from_label(label + "/committee/" + std::to_string(i));
        secrets.push_back(kp.sk);
        pks.push_back(kp.pk);
    }
    auto agg = crypto::aggregate(pks);
    auto lock = collateral_lock(agg, o.pk(), cfg.t_p);
    auto funded = o.lock_funds(cfg.c, lock);
    if (!funded) throw Error(Errc::InsufficientLiquidity, "operator cannot fund the collateral");
    col.out = funded->first;
    col.output = funded->second;
    col.burn.ins = {col.out};
    col.burn.outs = {{cfg.c, script::burn_lock()}};
    col.committee_sig = crypto::cosign(col.burn.sighash_bytes(0), agg, secrets);
    std::fill(secrets.begin(), secrets.end(), SecretKey{});
    return col;
}

Tx complete_burn(const Collateral& col, const SecretKey& sk_op)
{
    Tx t = col.burn;
    auto d = t.sighash_bytes(0);
    t.wits = {script::script_path_witness(col.output.lock, 0, {col.committee_sig, crypto::sign(sk_op, d)})};
    return t;
}

Tx reclaim_collateral(op::Operator& o, const Collateral& col)
{
    Tx t;
    t.ins = {col.out};
    t.outs = {{col.output.value, script::key_lock(o.pk())}};
    o.sign_input(t, 0, col.output.lock, 1, op::kFunding);
    return t;
}

std::optional<SecretKey> extract_operator_key(const Tx& a, std::size_t ia, const Tx& b, std::size_t ib,
                                              const PublicKey& op)
{
    auto sa = core::fixed_nonce_sig(a, ia, op);
    auto sb = core::fixed_nonce_sig(b, ib, op);
    if (!sa || !sb || !(sa->R == sb->R)) return std::nullopt;
    auto ma = a.sighash_bytes(ia);
    auto mb = b.sighash_bytes(ib);
    if (ma == mb) return std::nullopt;
    try {
        SecretKey sk = crypto::extract_secret(op, ma, *sa, mb, *sb);
        if (crypto::mul_base(sk) != op) return std::nullopt;
        return sk;
    } catch (const Error&) {
        return std::nullopt;
    }
}

// ---- network

Network::Network(FfConfig cfg, const PublicKey& op, Ledger& chain, Collateral col)
    : cfg_(std::move(cfg)), op_(op), chain_(chain), col_(std::move(col))
{
    if (cfg_.delta < 1) throw Error(Errc::Config, "delta must be >= 1");
}

void Network::add_member(const PartyId& id, const PublicKey& pk, bool honest, wallet::Wallet* w)
{
    Node n;
    n.id = id;
    n.pk = pk;
    n.honest = honest;
    n.w = w;
    nodes_.push_back(std::move(n));
    chain_.register_party(id);
}

Network::Node* Network::node(const PartyId& id)
{
    for (auto& n : nodes_)
        if (n.id == id) return &n;
    return nullptr;
}

void Network::log(Height now, std::uint64_t pay, const PartyId& who, const std::string& phase)
{
    events_.push_back({now, pay, who, phase, conflicts_, burned_ ? 1 : 0});
}

std::uint64_t Network::send(const PartyId& from, const PartyId& to, const wallet::Payment& p, Height at)
{
    std::uint64_t id = receipts_.size() + 1;
    Receipt r;
    r.payment = id;
    r.from = from;
    r.to = to;
    r.p = p;
    r.start = at;
    receipts_.push_back(r);
    queue_.push_back({at, to, {}, id, true});
    return id;
}

static bool nonce_bound_somewhere(const script::LockScript& lock, const PublicKey& op)
{
    return std::any_of(lock.paths.begin(), lock.paths.end(), [&](auto& p) { return p.has_nonce_bound(op); });
}

std::string Network::check_receipt(const Node& n, const Receipt& r) const
{
    auto member = [&](const PartyId& id) {
        return std::find(cfg_.members.begin(), cfg_.members.end(), id) != cfg_.members.end();
    };
    if (!member(r.from) || !member(r.to)) return "sender or recipient outside the fast-finality set";
    const auto& p = r.p;
    if (p.path.empty() || p.path.back().txid() != p.ark.txid()) return "history incomplete";
    bool pays = false;
    for (auto& o : p.ark.outs) {
        for (auto& path : o.lock.paths)
            if (path.has_nonce_bound(op_) && !pays) {
                auto want = o.lock;
                // owner key must be the recipient's
                if (o.lock.paths.size() == 2 && o.lock.paths[core::kUnilateralPath] ==
                                                    Predicate::all({Predicate::check_sig(n.pk), Predicate::rel_timelock(cfg_.t_u)}))
                    pays = true;
            }
    }
    if (!pays) return "incorrect output script";
    View tipv = chain_.tip_view();
    std::map<OutPoint, const Output*> pending;
    for (auto& tx : p.path) {
        TxId id = tx.txid();
        if (tipv.contains(id)) continue;
        for (auto& in : tx.ins) {
            const Output* o = nullptr;
            if (auto it = pending.find(in); it != pending.end())
                o = it->second;
            else
                o = tipv.output(in);
            if (!o) return "history input missing";
            if (!nonce_bound_somewhere(o->lock, op_)) return "history input without nonce binding";
        }
        for (std::uint32_t j = 0; j < tx.outs.size(); ++j) pending[{id, j}] = &tx.outs[j];
    }
    auto why = core::replay_check(p.path, tipv);
    if (!why.empty()) return "history does not replay: " + why;
    return "";
}

void Network::on_conflict(Node& n, const Tx& a, std::size_t ia, const Tx& b, std::size_t ib, Height now)
{
    ++conflicts_;
    n.conflict = true;
    OutPoint in = a.ins[ia];
    for (auto& r : receipts_) {
        if (r.to != n.id || r.phase != Phase::Waiting) continue;
        bool touches = false;
        for (auto& tx : r.p.path)
            touches |= std::find(tx.ins.begin(), tx.ins.end(), in) != tx.ins.end();
        if (touches) {
            r.phase = Phase::Rejected;
            r.why = "conflict";
            log(now, r.payment, n.id, "rejected");
        }
    }
    if (!extracted_) extracted_ = extract_operator_key(a, ia, b, ib, op_);
    if (extracted_ && !burned_) {
        auto res = chain_.submit(complete_burn(col_, *extracted_), n.id);
        if (res.accepted) {
            burned_ = true;
            log(now, 0, n.id, "burn");
        }
    }
}

void Network::learn(Node& n, const Tx& tx, Height now)
{
    TxId id = tx.txid();
    for (std::size_t i = 0; i < tx.ins.size(); ++i) {
        auto it = n.spends.find(tx.ins[i]);
        if (it == n.spends.end()) {
            n.spends[tx.ins[i]] = tx;
            continue;
        }
        if (it->second.txid() == id) continue;
        const Tx& other = it->second;
        std::size_t j = std::find(other.ins.begin(), other.ins.end(), tx.ins[i]) - other.ins.begin();
        on_conflict(n, other, j, tx, i, now);
    }
}

void Network::step(Height now)
{
    // deliveries due now, in queue order
    std::vector<Msg> due;
    std::vector<Msg> later;
    for (auto& m : queue_) (m.at <= now ? due : later).push_back(m);
    queue_ = std::move(later);
    for (auto& m : due) {
        Node* n = node(m.to);
        if (!n || !n->honest) continue;
        if (!m.direct) {
            for (auto& tx : m.txs) learn(*n, tx, now);
            continue;
        }
        Receipt& r = receipts_.at(m.payment - 1);
        r.start = now;
        if (auto why = check_receipt(*n, r); !why.empty()) {
            r.phase = Phase::Rejected;
            r.why = why;
            log(now, r.payment, n->id, "rejected");
            continue;
        }
        for (auto& o : r.p.ark.outs)
            if (o.lock.paths.size() == 2 &&
                o.lock.paths[core::kUnilateralPath] ==
                    Predicate::all({Predicate::check_sig(n->pk), Predicate::rel_timelock(cfg_.t_u)}))
                r.value += o.value;
        log(now, r.payment, n->id, "received");
        std::vector<Tx> txs;
        View tipv = chain_.tip_view();
        for (auto& tx : r.p.path)
            if (!tipv.contains(tx.txid())) txs.push_back(tx);
        for (auto& tx : txs) learn(*n, tx, now);
        for (auto& peer : nodes_) {
            if (peer.id == n->id) continue;
            int d = edge_delay ? edge_delay(n->id, peer.id, r.payment) : cfg_.delta;
            d = std::clamp(d, 1, cfg_.delta);
            queue_.push_back({now + d, peer.id, txs, r.payment, false});
        }
    }

    // chain side: a confirmed spend that differs from what we hold
    for (auto& n : nodes_) {
        if (!n.honest) continue;
        std::vector<std::pair<Tx, std::size_t>> seen;
        for (auto& [in, tx] : n.spends) {
            const OutputRecord* rec = chain_.record(in);
            if (!rec || !rec->spent_by || *rec->spent_by == tx.txid()) continue;
            const Tx* other = chain_.find_tx(*rec->spent_by);
            if (!other) continue;
            std::size_t i = std::find(tx.ins.begin(), tx.ins.end(), in) - tx.ins.begin();
            std::size_t j = std::find(other->ins.begin(), other->ins.end(), in) - other->ins.begin();
            bool known = false;
            for (auto& e : seen) known |= e.first.txid() == tx.txid();
            if (known) continue;
            seen.push_back({tx, i});
            on_conflict(n, tx, i, *other, j, now);
        }
    }

    for (auto& r : receipts_) {
        if (r.phase != Phase::Waiting || now < r.start + 2 * cfg_.delta) continue;
        Node* n = node(r.to);
        if (!n || !n->honest) continue;
        bool pending = false;
        for (auto& m : queue_) pending |= m.direct && m.payment == r.payment;
        if (pending) continue;
        r.phase = Phase::Accepted;
        log(now, r.payment, n->id, "accepted");
        if (n->w) n->w->receive_payment(r.p);
    }

    // someone unrolled an input under an accepted payment: push our history first
    for (auto& r : receipts_)
        if (r.phase == Phase::Accepted) push_history(r.to, r.payment);
}

std::size_t Network::push_history(const PartyId& id, std::uint64_t payment)
{
    Receipt& r = receipts_.at(payment - 1);
    if (r.to != id || r.phase != Phase::Accepted) return 0;
    View tipv = chain_.tip_view();
    // someone started unrolling: part of the path is already out there
    bool exposed = false;
    for (auto& tx : r.p.path)
        exposed |= tipv.contains(tx.txid()) || chain_.in_mempool(tx.txid());
    bool complete = std::all_of(r.p.path.begin(), r.p.path.end(), [&](const Tx& t) { return tipv.contains(t.txid()); });
    if (complete) exposed = false;
    if (!exposed) return 0;
    std::size_t n = 0;
    for (auto& tx : r.p.path) {
        if (tipv.contains(tx.txid()) || chain_.in_mempool(tx.txid())) continue;
        auto res = chain_.submit(tx, id);
        if (!res.accepted) break;
        ++n;
    }
    if (n) log(chain_.tip(), payment, id, "history_pushed");
    return n;
}

Amount Network::ff_balance(const PartyId& id) const
{
    Amount s = 0;
    Height tip = chain_.tip();
    for (auto& r : receipts_) {
        if (r.to != id || r.phase != Phase::Accepted || r.p.expiries.empty()) continue;
        Height expiry = *std::min_element(r.p.expiries.begin(), r.p.expiries.end());
        if (expiry - tip <= 2 * cfg_.k) continue;
        TxId a = r.p.ark.txid();
        bool moved = false;
        for (auto& n : nodes_)
            if (n.id == id && n.w)
                for (auto& [pt, rec] : n.w->vtxos())
                    if (pt.txid == a && rec.state != wallet::VState::PreConfirmed && rec.state != wallet::VState::Exiting)
                        moved = true;
        if (!moved) s += r.value;
    }
    return s;
}

} // namespace ark::ff
