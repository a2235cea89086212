#include "ark/wallet.hpp"

#include <algorithm>

namespace ark::wallet {

using op::CommitmentBundle;
using op::RequestKind;

const char* vstate_name(VState s)
{
    switch (s) {
    case VState::Pending: return "pending";
    case VState::Live: return "live";
    case VState::PreConfirmed: return "preconfirmed";
    case VState::Spent: return "spent";
    case VState::Forfeited: return "forfeited";
    case VState::Exiting: return "exiting";
    case VState::Claimed: return "claimed";
    case VState::Lost: return "lost";
    }
    return "?";
}

static std::optional<Point> nonce_of(const script::LockScript& lock, const PublicKey& op)
{
    if (lock.paths.empty()) return std::nullopt;
    std::function<std::optional<Point>(const script::Predicate&)> walk = [&](const script::Predicate& p) -> std::optional<Point> {
        if (p.kind == script::Kind::NonceBound && p.pk == op) return p.r_star;
        for (auto& c : p.children)
            if (auto r = walk(c)) return r;
        return std::nullopt;
    };
    return walk(lock.paths[core::kCollabPath]);
}

Wallet::Wallet(PartyId id, KeyPair keys, Params params, Ledger& chain, op::Operator& op)
    : id_(std::move(id)), keys_(keys), params_(params), chain_(chain), op_(op)
{
    chain_.register_party(id_);
    op_.attach(this, {keys_.pk});
}

Output Wallet::fresh_vtxo(Amount value, std::optional<Point>* r_out)
{
    std::optional<Point> r;
    if (ff) r = op_.fresh_nonce();
    if (r_out) *r_out = r;
    return {value, core::vtxo_lock(keys_.pk, op_.pk(), params_.t_u, r)};
}

// ---- requests

bool Wallet::board(Amount amount, int split)
{
    if (split < 1) {
        last_error_ = "split must be positive";
        return false;
    }
    View tipv = chain_.tip_view();
    std::set<OutPoint> busy;
    for (auto& [s, e] : chain_.mempool()) busy.insert(e.tx.ins.begin(), e.tx.ins.end());
    core::Funds funds;
    Amount have = 0;
    for (auto& [pt, o] : tipv.utxos()) {
        if (have >= amount) break;
        if (!o.lock.key_only() || *o.lock.internal_key != keys_.pk || busy.count(pt)) continue;
        funds.emplace_back(pt, o);
        have += o.value;
    }
    if (have < amount || amount <= fee()) {
        last_error_ = "insufficient onchain funds";
        return false;
    }
    Tx tx = core::boarding_tx(funds, keys_.pk, op_.pk(), params_.t_b, amount);
    for (std::size_t i = 0; i < funds.size(); ++i) core::sign_key_path(tx, i, funds[i].second.lock, keys_.sk);
    auto r = chain_.submit(tx, id_);
    if (!r.accepted) {
        last_error_ = std::string("boarding tx rejected: ") + reject_name(r.reason);
        return false;
    }
    BoardingRecord b;
    b.out = {tx.txid(), 0};
    b.output = tx.outs[0];
    if (ff) b.r_star = op_.fresh_nonce();
    b.split = split;
    boards_.push_back(b);
    return true;
}

bool Wallet::request_swap(const std::vector<OutPoint>& vs)
{
    Amount in = 0;
    for (auto& v : vs) in += vtxos_.at(v).out.value;
    if (in <= fee()) {
        last_error_ = "nothing left after the fee";
        return false;
    }
    op::SwapRequest r{0, id_, {keys_.pk}, vs, {fresh_vtxo(in - fee())}};
    try {
        op_.verify_batch_swap(r);
    } catch (const Error& e) {
        last_error_ = e.what();
        return false;
    }
    for (auto& v : vs) vtxos_.at(v).swap_pending = true;
    return true;
}

bool Wallet::request_exit(const std::vector<OutPoint>& vs)
{
    Amount in = 0;
    for (auto& v : vs) in += vtxos_.at(v).out.value;
    if (in <= fee()) {
        last_error_ = "nothing left after the fee";
        return false;
    }
    op::ExitRequest r{0, id_, vs, {Output{in - fee(), script::key_lock(keys_.pk)}}};
    try {
        op_.verify_exit(r);
    } catch (const Error& e) {
        last_error_ = e.what();
        return false;
    }
    for (auto& v : vs) vtxos_.at(v).swap_pending = true;
    return true;
}

static void append_unique(std::vector<Tx>& out, std::set<TxId>& seen, const std::vector<Tx>& txs)
{
    for (auto& t : txs)
        if (seen.insert(t.txid()).second) out.push_back(t);
}

std::optional<Payment> Wallet::pay(const PublicKey& to, Amount amount)
{
    Height tip = chain_.tip();
    std::vector<OutPoint> ins;
    Amount have = 0;
    for (auto& [pt, r] : vtxos_) {
        if (have >= amount + fee()) break;
        if ((r.state != VState::Live && r.state != VState::PreConfirmed) || r.swap_pending) continue;
        if (r.expiry - 2 * params_.k - 1 <= tip) continue;
        ins.push_back(pt);
        have += r.out.value;
    }
    if (amount <= 0 || have < amount + fee()) {
        last_error_ = "insufficient vtxo balance";
        return std::nullopt;
    }
    return pay_with(ins, to, amount);
}

std::optional<Payment> Wallet::pay_with(const std::vector<OutPoint>& ins, const PublicKey& to, Amount amount, bool force)
{
    Amount have = 0;
    for (auto& v : ins) {
        auto it = vtxos_.find(v);
        if (it == vtxos_.end()) {
            last_error_ = "unknown input";
            return std::nullopt;
        }
        auto st = it->second.state;
        if (!force && st != VState::Live && st != VState::PreConfirmed) {
            last_error_ = "input not spendable";
            return std::nullopt;
        }
        have += it->second.out.value;
    }
    if (ins.empty() || amount <= 0 || have < amount + fee()) {
        last_error_ = "insufficient vtxo balance";
        return std::nullopt;
    }

    Payment p;
    p.from = id_;
    core::Funds funds;
    for (auto& v : ins) {
        auto& r = vtxos_.at(v);
        if (params_.resets) {
            std::optional<Point> rs;
            if (r.r_star) rs = op_.fresh_nonce();
            Tx re = core::reset_tx(v, r.out, op_.pk(), r.expiry, rs);
            funds.emplace_back(OutPoint{re.txid(), 0}, re.outs[0]);
            p.resets.push_back(std::move(re));
        } else {
            funds.emplace_back(v, r.out);
        }
        p.expiries.push_back(r.expiry);
        p.chains.push_back(r.chain);
    }
    std::vector<Output> outs;
    std::optional<Point> rto;
    if (ff) rto = op_.fresh_nonce();
    outs.push_back({amount, core::vtxo_lock(to, op_.pk(), params_.t_u, rto)});
    std::optional<Point> rch;
    if (have - amount - fee() > 0) outs.push_back(fresh_vtxo(have - amount - fee(), &rch));
    Tx ark = core::ark_tx(funds, outs);
    for (std::size_t i = 0; i < ark.ins.size(); ++i) approve(ark.sighash_bytes(i));
    for (auto& re : p.resets) approve(re.sighash_bytes(0));

    op::ArkSigned s;
    try {
        s = op_.verify_ark_request({0, id_, p.resets, ark});
    } catch (const Error& e) {
        last_error_ = e.what();
        return std::nullopt;
    }
    p.resets = s.resets;
    p.ark = s.ark;
    std::set<TxId> seen;
    for (auto& v : ins) append_unique(p.path, seen, vtxos_.at(v).path);
    append_unique(p.path, seen, p.resets);
    append_unique(p.path, seen, {p.ark});

    Height expiry = *std::min_element(p.expiries.begin(), p.expiries.end());
    int chain = *std::max_element(p.chains.begin(), p.chains.end()) + 1;
    for (auto& v : ins) vtxos_.at(v).state = VState::Spent;
    if (outs.size() == 2) {
        VtxoRecord c;
        c.point = {p.ark.txid(), 1};
        c.out = p.ark.outs[1];
        c.expiry = expiry;
        c.path = p.path;
        c.chain = chain;
        c.r_star = rch;
        c.state = VState::PreConfirmed;
        vtxos_[c.point] = c;
    }
    return p;
}

bool Wallet::receive_payment(const Payment& p)
{
    if (p.path.empty() || p.path.back().txid() != p.ark.txid() || p.expiries.size() != p.ark.ins.size()) {
        last_error_ = "payment history incomplete";
        return false;
    }
    std::vector<std::uint32_t> mine;
    for (std::uint32_t j = 0; j < p.ark.outs.size(); ++j) {
        auto r = nonce_of(p.ark.outs[j].lock, op_.pk());
        if (ff && !r) continue;
        if (p.ark.outs[j].lock == core::vtxo_lock(keys_.pk, op_.pk(), params_.t_u, r)) mine.push_back(j);
    }
    if (mine.empty()) {
        last_error_ = "no output pays this wallet";
        return false;
    }
    // resets must be claimable by O no earlier than the expiry the sender claims
    for (std::size_t i = 0; i < p.resets.size(); ++i) {
        auto& lock = p.resets[i].outs.at(0).lock;
        if (lock.paths.size() != 2 || lock.paths[core::kResetSweepPath].abs_height() != p.expiries[i]) {
            last_error_ = "reset does not match the claimed expiry";
            return false;
        }
    }
    std::string why = core::replay_check(p.path, chain_.tip_view());
    if (!why.empty()) {
        last_error_ = "history does not replay: " + why;
        return false;
    }
    Height expiry = *std::min_element(p.expiries.begin(), p.expiries.end());
    int chain = p.chains.empty() ? 1 : *std::max_element(p.chains.begin(), p.chains.end()) + 1;
    std::vector<OutPoint> got;
    for (auto j : mine) {
        VtxoRecord r;
        r.point = {p.ark.txid(), j};
        r.out = p.ark.outs[j];
        r.expiry = expiry;
        r.path = p.path;
        r.chain = chain;
        r.r_star = nonce_of(r.out.lock, op_.pk());
        r.state = VState::PreConfirmed;
        vtxos_[r.point] = r;
        got.push_back(r.point);
    }
    if (auto_swap && !ff) request_swap(got);
    return true;
}

std::size_t Wallet::unilateral_exit(const OutPoint& v)
{
    auto& r = vtxos_.at(v);
    View tipv = chain_.tip_view();
    std::size_t n = 0;
    for (auto& tx : r.path) {
        TxId id = tx.txid();
        if (tipv.contains(id) || chain_.in_mempool(id)) continue;
        auto res = chain_.submit(tx, id_);
        if (!res.accepted) {
            last_error_ = std::string("exit tx rejected: ") + reject_name(res.reason) + " " + res.detail;
            break;
        }
        ++n;
    }
    if (r.state != VState::Exiting) {
        r.state = VState::Exiting;
        r.exit_height = chain_.tip();
    }
    return n;
}

// ---- rounds

void Wallet::materialize(const CommitmentBundle& b)
{
    TxId c = b.txid();
    std::set<std::uint64_t> my_boards, my_swaps;
    for (auto& r : b.boardings)
        if (r.party == id_) my_boards.insert(r.id);
    for (auto& r : b.swaps)
        if (r.party == id_) my_swaps.insert(r.id);
    if (b.batch)
        for (std::size_t l = 0; l < b.leaves.size(); ++l) {
            auto& o = b.leaves[l];
            bool mine = (o.kind == RequestKind::Boarding && my_boards.count(o.request)) ||
                        (o.kind == RequestKind::BatchSwap && my_swaps.count(o.request));
            if (!mine) continue;
            OutPoint pt = b.batch->vtxt.leaf_outpoint(l);
            auto& r = vtxos_[pt];
            r.point = pt;
            r.out = b.batch->vtxt.leaf_output(l);
            r.expiry = b.expiry;
            r.path = core::path(b.batch->vtxt, l);
            r.commitment = c;
            r.r_star = nonce_of(r.out.lock, op_.pk());
            if (r.state == VState::Pending) r.state = VState::Live;
        }
    for (auto& s : b.swaps)
        if (s.party == id_)
            for (auto& v : s.vtxos)
                if (auto it = vtxos_.find(v); it != vtxos_.end() && it->second.state != VState::Claimed)
                    it->second.state = VState::Forfeited;
    for (auto& e : b.exits)
        if (e.party == id_)
            for (auto& v : e.vtxos)
                if (auto it = vtxos_.find(v); it != vtxos_.end() && it->second.state != VState::Claimed)
                    it->second.state = VState::Forfeited;
    for (auto& br : boards_)
        for (auto& r : b.boardings)
            if (r.party == id_ && r.out == br.out) br.commitment = c;
    materialized_.insert(c);
}

void Wallet::step()
{
    View st = chain_.stable_view();
    View tipv = chain_.tip_view();
    Height tip = chain_.tip();

    for (auto& [c, b] : bundles_)
        if (!materialized_.count(c) && st.contains(c)) materialize(b);

    for (auto& br : boards_) {
        if (br.confirmed < 0)
            if (auto h = tipv.tx_height(br.out.txid)) br.confirmed = *h;
        if (br.requested || br.commitment || offline || !st.unspent(br.out)) continue;
        Amount total = br.output.value - fee();
        std::vector<Output> vs;
        for (int i = 0; i < br.split; ++i) {
            Amount part = total / br.split + (i == 0 ? total % br.split : 0);
            vs.push_back({part, core::vtxo_lock(keys_.pk, op_.pk(), params_.t_u, br.r_star)});
        }
        op::BoardingRequest r{0, id_, {keys_.pk}, br.out, br.output, vs};
        try {
            op_.verify_boarding(r);
            br.requested = true;
        } catch (const Error& e) {
            last_error_ = e.what();
        }
    }
    // a dropped request (abort, censorship) frees the boarding output for another try
    for (auto& br : boards_)
        if (br.requested && !br.commitment && !op_.book().preSpent.count(br.out)) br.requested = false;

    for (auto& [pt, r] : vtxos_) {
        if (r.swap_pending && (r.state == VState::Live || r.state == VState::PreConfirmed) &&
            !op_.book().preSpent.count(pt)) {
            bool in_flight = false;
            for (auto& [c, ps] : op_.book().unconfirmedSpent)
                for (auto& q : ps) in_flight |= q.first == pt;
            if (!in_flight) r.swap_pending = false;
        }
        if (r.state == VState::Exiting) {
            const OutputRecord* rec = chain_.record(pt);
            if (rec && rec->spent_by) {
                const Tx* by = chain_.find_tx(*rec->spent_by);
                bool ours = by && by->outs.size() == 1 && by->outs[0].lock == script::key_lock(keys_.pk);
                r.state = ours ? VState::Claimed : VState::Lost;
                continue;
            }
            if (!rec) {
                // path still incomplete: keep pushing, give up if an ancestor went elsewhere
                bool dead = false;
                for (auto& tx : r.path) {
                    if (tipv.contains(tx.txid())) continue;
                    for (auto& in : tx.ins) {
                        auto sp = tipv.spender(in);
                        if (sp && *sp != tx.txid()) dead = true;
                    }
                }
                if (dead)
                    r.state = VState::Lost;
                else
                    unilateral_exit(pt);
                continue;
            }
            if (claim && tip + 1 - rec->height >= params_.t_u) {
                Tx t = core::claim_tx(pt, r.out, keys_.pk);
                core::sign_single(t, 0, r.out.lock, core::kUnilateralPath, keys_.sk);
                signed_.insert(t.sighash_bytes(0));
                chain_.submit(t, id_);
            }
            continue;
        }
        if (r.state != VState::Live && r.state != VState::PreConfirmed) continue;
        if (offline || intent == Intent::Manual) continue;
        Height deadline = r.expiry - 2 * params_.k - 1;
        if (tip >= deadline) {
            unilateral_exit(pt);
            continue;
        }
        if (r.swap_pending) continue;
        if (intent == Intent::Refresh && tip >= deadline - refresh_window)
            request_swap({pt});
        else if (intent == Intent::Exit)
            request_exit({pt});
    }
}

Amount Wallet::balance(const View& v) const
{
    Amount s = 0;
    for (auto& [pt, r] : vtxos_) {
        bool held = r.state == VState::Live || r.state == VState::PreConfirmed || r.state == VState::Exiting;
        if (!held || r.expiry - v.height() <= 2 * params_.k) continue;
        if (v.exists(pt) && !v.unspent(pt)) continue;
        s += r.out.value;
    }
    for (auto& b : boards_)
        if (v.unspent(b.out)) s += b.output.value;
    return s;
}

Amount Wallet::onchain(const View& v) const
{
    Amount s = 0;
    for (auto& [pt, o] : v.utxos())
        if (o.lock.key_only() && *o.lock.internal_key == keys_.pk) s += o.value;
    return s;
}

std::vector<OutPoint> Wallet::live() const
{
    std::vector<OutPoint> out;
    for (auto& [pt, r] : vtxos_)
        if ((r.state == VState::Live || r.state == VState::PreConfirmed) && !r.swap_pending) out.push_back(pt);
    return out;
}

io::json Wallet::transcript() const
{
    io::json vs = io::json::array();
    for (auto& [pt, r] : vtxos_) {
        io::json path = io::json::array();
        for (auto& t : r.path) path.push_back(io::to_json(t));
        vs.push_back({{"outpoint", io::to_json(pt)},
                      {"output", io::to_json(r.out)},
                      {"expiry", r.expiry},
                      {"chain", r.chain},
                      {"state", vstate_name(r.state)},
                      {"path", path}});
    }
    return {{"party", id_}, {"pk", io::to_json(keys_.pk)}, {"vtxos", vs}};
}

// ---- signing

std::string Wallet::check_bundle(const CommitmentBundle& b) const
{
    const PublicKey& O = op_.pk();
    View tipv = chain_.tip_view();
    Height tip = chain_.tip();
    if (b.expiry < tip + 2 * params_.k + params_.t_e) return "batch expiry below the local bound";

    Amount in = 0;
    for (auto& i : b.tx.ins) {
        if (!tipv.unspent(i)) return "commitment input " + i.str() + " not available";
        in += tipv.output(i)->value;
    }
    if (b.tx.out_value() > in) return "commitment creates value";
    TxId c = b.txid();

    std::set<std::tuple<int, std::uint64_t, std::size_t>> expected;
    for (auto& r : b.boardings) {
        if (r.party != id_) continue;
        if (std::find(b.tx.ins.begin(), b.tx.ins.end(), r.out) == b.tx.ins.end()) return "boarding input missing";
        for (std::size_t j = 0; j < r.vtxos.size(); ++j) expected.insert({0, r.id, j});
    }
    for (auto& r : b.swaps)
        if (r.party == id_)
            for (std::size_t j = 0; j < r.outs.size(); ++j) expected.insert({1, r.id, j});

    if (!expected.empty()) {
        if (!b.batch) return "no batch output";
        auto& bo = *b.batch;
        if (b.batch_vout >= b.tx.outs.size() || b.tx.outs[b.batch_vout].value != bo.value ||
            !(b.tx.outs[b.batch_vout].lock == bo.lock))
            return "batch output mismatch";
        auto& v = bo.vtxt;
        if (v.nodes.empty()) return "batch has no tree";
        if (!(bo.lock == core::batch_lock(O, b.expiry, v.nodes[0].cosigners, v.nodes[0].r_star)))
            return "batch lock not sweepable at the stated expiry";
        if (!v.funding_point || *v.funding_point != OutPoint{c, b.batch_vout}) return "tree not bound to the batch";
        if (b.leaves.size() != v.leaf_count() || b.signers.per_node.size() != v.nodes.size())
            return "leaf or signer map size mismatch";

        std::set<std::tuple<int, std::uint64_t, std::size_t>> seen;
        for (std::size_t l = 0; l < b.leaves.size(); ++l) {
            auto& o = b.leaves[l];
            std::tuple<int, std::uint64_t, std::size_t> key{o.kind == RequestKind::Boarding ? 0 : 1, o.request, o.index};
            if (!expected.count(key)) continue;
            if (!seen.insert(key).second) return "two leaves claim one requested output";
            const Output* want = nullptr;
            for (auto& r : b.boardings)
                if (std::get<0>(key) == 0 && r.id == o.request && r.party == id_) want = &r.vtxos.at(o.index);
            for (auto& r : b.swaps)
                if (std::get<0>(key) == 1 && r.id == o.request && r.party == id_) want = &r.outs.at(o.index);
            if (auto e = core::check_path(v, l); !e.empty()) return "tree malformed: " + e;
            auto& got = v.leaf_output(l);
            if (!want || got.value != want->value || !(got.lock == want->lock)) return "leaf output differs from the request";
            for (int n : v.node_path(l)) {
                auto& node = v.nodes[n];
                if (std::find(node.cosigners.begin(), node.cosigners.end(), keys_.pk) == node.cosigners.end())
                    return "path node without our cosigner key";
                if (b.signers.per_node[n] != node.cosigners) return "signer map disagrees with the tree";
                if (!(v.input_lock(n) == core::batch_lock(O, b.expiry, node.cosigners, node.r_star)))
                    return "path node input is not batch-shaped";
                if (node.tx.out_value() > v.input_value(n)) return "path node creates value";
            }
        }
        if (seen.size() != expected.size()) return "requested output missing from the batch";
    }

    std::vector<OutPoint> forfeits;
    for (auto& r : b.swaps)
        if (r.party == id_) forfeits.insert(forfeits.end(), r.vtxos.begin(), r.vtxos.end());
    for (auto& r : b.exits)
        if (r.party == id_) forfeits.insert(forfeits.end(), r.vtxos.begin(), r.vtxos.end());
    if (!forfeits.empty()) {
        if (!b.connector) return "no connector output";
        auto& co = *b.connector;
        if (b.connector_vout >= b.tx.outs.size() || b.tx.outs[b.connector_vout].value != co.value ||
            !(b.tx.outs[b.connector_vout].lock == co.lock) || !(co.lock == core::connector_lock(O)))
            return "connector output mismatch";
        if (!co.vtxt.funding_point || *co.vtxt.funding_point != OutPoint{c, b.connector_vout})
            return "connector not bound to the commitment";
        if (auto e = core::check_vtxt(co.vtxt); !e.empty() && !co.vtxt.nodes.empty()) return "connector malformed: " + e;
        std::set<OutPoint> anchors;
        for (auto& [v, a] : b.gamma)
            if (!anchors.insert(a).second) return "two vtxos bound to one anchor";
        for (auto& v : forfeits) {
            auto it = b.gamma.find(v);
            if (it == b.gamma.end()) return "no anchor for vtxo " + v.str();
            try {
                Output a = b.anchor_output(it->second);
                if (a.value < params_.epsilon || !(a.lock == core::connector_lock(O))) return "anchor value or lock wrong";
                // connector txs must be O-signed and replayable
                std::string why;
                auto txs = b.anchor_path(it->second);
                for (std::size_t i = 0; i < txs.size(); ++i) {
                    const Tx& t = txs[i];
                    if (t.wits.size() != 1) return "connector tx unsigned";
                }
            } catch (const Error& e) {
                return std::string("anchor lookup failed: ") + e.what();
            }
        }
    }

    for (std::size_t i = 0; i < b.exits.size(); ++i) {
        auto& r = b.exits[i];
        if (r.party != id_) continue;
        if (i >= b.exit_vouts.size()) return "exit outputs missing";
        for (std::size_t j = 0; j < r.outs.size(); ++j) {
            std::size_t at = b.exit_vouts[i] + j;
            if (at >= b.tx.outs.size() || b.tx.outs[at].value != r.outs[j].value || !(b.tx.outs[at].lock == r.outs[j].lock))
                return "exit output missing";
        }
    }
    return "";
}

bool Wallet::verify_commitment(const CommitmentBundle& b)
{
    if (refuse(op::kVerify)) return false;
    std::string why = check_bundle(b);
    if (!why.empty()) {
        last_error_ = "commitment rejected: " + why;
        return false;
    }
    if (b.batch) {
        auto& v = b.batch->vtxt;
        for (auto& n : v.nodes)
            if (std::find(n.cosigners.begin(), n.cosigners.end(), keys_.pk) != n.cosigners.end())
                approve(n.tx.sighash_bytes(0));
    }
    for (std::size_t j = 0; j < b.boardings.size(); ++j)
        if (b.boardings[j].party == id_) approve(b.tx.sighash_bytes(b.funding_inputs + j));
    verified_.insert(b.txid());
    return true;
}

bool Wallet::musig_commit(crypto::SigningSession& s, const PublicKey& member, int step)
{
    if (refuse(step) || member != keys_.pk || !approved_.count(s.message())) return false;
    s.commit(keys_.sk);
    return true;
}

bool Wallet::musig_respond(crypto::SigningSession& s, const PublicKey& member, int step)
{
    if (refuse(step) || member != keys_.pk || !approved_.count(s.message())) return false;
    s.respond(keys_.sk);
    signed_.insert(s.message());
    return true;
}

std::optional<crypto::Signature> Wallet::sign_for(ByteView digest, const PublicKey& key, int step)
{
    Bytes d(digest.begin(), digest.end());
    if (refuse(step) || key != keys_.pk || !approved_.count(d)) return std::nullopt;
    signed_.insert(d);
    return crypto::sign(keys_.sk, digest);
}

std::optional<Tx> Wallet::make_forfeit(const CommitmentBundle& b, const OutPoint& v)
{
    if (refuse(op::kForfeit) || !verified_.count(b.txid())) return std::nullopt;
    auto it = vtxos_.find(v);
    auto g = b.gamma.find(v);
    if (it == vtxos_.end() || g == b.gamma.end()) return std::nullopt;
    if (it->second.state != VState::Live && it->second.state != VState::PreConfirmed) return std::nullopt;
    Tx f = core::forfeit_tx(v, it->second.out, g->second, b.anchor_output(g->second), op_.pk());
    approve(f.sighash_bytes(0));
    return f;
}

void Wallet::on_commitment(const CommitmentBundle& b)
{
    TxId c = b.txid();
    if (!verified_.count(c)) return;
    bundles_[c] = b;
    std::set<std::uint64_t> mine;
    for (auto& r : b.boardings)
        if (r.party == id_) mine.insert(r.id);
    for (auto& r : b.swaps)
        if (r.party == id_) mine.insert(r.id);
    if (b.batch)
        for (std::size_t l = 0; l < b.leaves.size(); ++l) {
            if (!mine.count(b.leaves[l].request) || b.leaves[l].kind == RequestKind::Exit) continue;
            OutPoint pt = b.batch->vtxt.leaf_outpoint(l);
            if (vtxos_.count(pt)) continue;
            VtxoRecord r;
            r.point = pt;
            r.out = b.batch->vtxt.leaf_output(l);
            r.expiry = b.expiry;
            r.path = core::path(b.batch->vtxt, l);
            r.commitment = c;
            r.r_star = nonce_of(r.out.lock, op_.pk());
            r.state = VState::Pending;
            vtxos_[pt] = r;
        }
}

io::json payment_to_json(const Payment& p)
{
    io::json resets = io::json::array();
    for (auto& t : p.resets) resets.push_back(io::to_json(t));
    io::json path = io::json::array();
    for (auto& t : p.path) path.push_back(io::to_json(t));
    return {{"from", p.from}, {"resets", resets}, {"ark", io::to_json(p.ark)}, {"path", path}, {"expiries", p.expiries}};
}

} // namespace ark::wallet
