#include "ark/arkcore.hpp"

#include "ark/json_io.hpp"

#include <algorithm>
#include <set>

namespace ark::core {

void Params::validate() const
{
    auto bad = [](const std::string& m) { throw Error(Errc::Config, m); };
    if (k < 1) bad("k must be >= 1");
    if (u < 0) bad("u must be >= 0");
    if (t_u < 1) bad("t_u must be >= 1");
    if (!unsafe && t_u <= 4 * k) bad("t_u must exceed 4k (pass --unsafe to override)");
    if (t_e < 1 || t_b < 1 || t_r < 1) bad("t_e, t_b and t_r must be >= 1");
    if (epsilon < 0) bad("epsilon must be >= 0");
    if (fee_rate < 0) bad("fee_rate must be >= 0");
    if (operator_fee < 0) bad("operator fee must be >= 0");
    if (arity < 2) bad("arity must be >= 2");
    if (max_chain < 1) bad("max_chain must be >= 1");
}

// ---- locks

LockScript vtxo_lock(const PublicKey& owner, const PublicKey& op, Height t_u, std::optional<Point> r_star)
{
    if (t_u <= 0) throw Error(Errc::InvalidArgument, "vtxo needs a positive unilateral delay");
    Predicate collab = r_star ? Predicate::all({Predicate::nonce_bound(op, *r_star), Predicate::check_sig(owner)})
                              : Predicate::check_agg_sig(crypto::aggregate({op, owner}));
    return script::taproot(std::nullopt,
                           {collab, Predicate::all({Predicate::check_sig(owner), Predicate::rel_timelock(t_u)})});
}

VtxoClass classify_vtxo(const LockScript& lock, const PublicKey& op, Height t_u)
{
    VtxoClass c;
    if (lock.burn) {
        c.reason = "burn output";
        return c;
    }
    if (lock.internal_key) {
        c.reason = "key path must be disabled";
        return c;
    }
    if (t_u < 1) {
        c.reason = "unilateral delay must be positive";
        return c;
    }
    Height collab_min = -1;
    Height uni_min = -1;
    for (auto& p : lock.paths) {
        if (p.requires_signer(op)) {
            ++c.collaborative;
            collab_min = collab_min < 0 ? p.rel_delay() : std::min(collab_min, p.rel_delay());
        } else {
            ++c.unilateral;
            if (p.abs_height() > 0) {
                c.reason = "unilateral path with an absolute timelock";
                return c;
            }
            if (p.signature_slots() == 0) {
                c.reason = "unilateral path needs no signature";
                return c;
            }
            uni_min = uni_min < 0 ? p.rel_delay() : std::min(uni_min, p.rel_delay());
        }
    }
    if (c.collaborative == 0) {
        c.reason = "no collaborative path";
        return c;
    }
    if (c.unilateral == 0) {
        c.reason = "no unilateral path";
        return c;
    }
    if (uni_min < collab_min + t_u) {
        c.reason = "unilateral path delayed by less than t_u";
        return c;
    }
    c.ok = true;
    return c;
}

static Predicate sweep_path(const PublicKey& op, Height expiry)
{
    return Predicate::all({Predicate::check_sig(op), Predicate::abs_timelock(expiry)});
}

LockScript batch_lock(const PublicKey& op, Height expiry, const std::vector<PublicKey>& cosigners,
                      std::optional<Point> r_star)
{
    std::vector<PublicKey> members = cosigners;
    if (std::find(members.begin(), members.end(), op) == members.end()) members.push_back(op);
    Predicate unroll = Predicate::check_agg_sig(crypto::aggregate(members));
    if (r_star) unroll = Predicate::all({unroll, Predicate::nonce_bound(op, *r_star)});
    return script::taproot(std::nullopt, {sweep_path(op, expiry), unroll});
}

LockScript connector_lock(const PublicKey& op) { return script::taproot(std::nullopt, {Predicate::check_sig(op)}); }

LockScript anchor_lock() { return script::taproot(std::nullopt, {Predicate::always_true()}); }

LockScript boarding_lock(const PublicKey& owner, const PublicKey& op, Height t_b)
{
    return script::taproot(std::nullopt, {Predicate::check_agg_sig(crypto::aggregate({op, owner})),
                                          Predicate::all({Predicate::check_sig(owner), Predicate::rel_timelock(t_b)})});
}

static Predicate rebind_nonce(Predicate p, const PublicKey& op, const Point& r_star)
{
    if (p.kind == script::Kind::NonceBound && p.pk == op) p.r_star = r_star;
    for (auto& c : p.children) c = rebind_nonce(c, op, r_star);
    return p;
}

LockScript reset_lock(const LockScript& vtxo, const PublicKey& op, Height expiry, std::optional<Point> r_star)
{
    if (vtxo.paths.empty() || !vtxo.paths[kCollabPath].requires_signer(op))
        throw Error(Errc::InvalidArgument, "input has no collaborative path");
    Predicate collab = vtxo.paths[kCollabPath];
    if (r_star) {
        if (!collab.has_nonce_bound(op)) throw Error(Errc::InvalidArgument, "collaborative path has no nonce binding");
        collab = rebind_nonce(collab, op, *r_star);
    }
    return script::taproot(std::nullopt, {collab, sweep_path(op, expiry)});
}

bool operator_owned(const LockScript& lock, const PublicKey& op)
{
    if (lock.burn) return false;
    if (lock.key_only()) return *lock.internal_key == op;
    return !lock.internal_key && lock.paths.size() == 1 && lock.paths[0] == Predicate::check_sig(op);
}

// ---- trees

void Vtxt::bind(const OutPoint& fp)
{
    funding_point = fp;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto& n = nodes[i];
        n.tx.wits.clear();
        if (n.parent < 0)
            n.tx.ins = {fp};
        else
            n.tx.ins = {OutPoint{nodes[n.parent].tx.txid(), n.parent_vout}};
    }
}

OutPoint Vtxt::leaf_outpoint(std::size_t leaf) const
{
    if (leaf >= leaf_at.size()) throw Error(Errc::NotALeaf, "leaf index out of range");
    auto [node, vout] = leaf_at[leaf];
    if (node < 0) {
        if (!funding_point) throw Error(Errc::Precondition, "tree not bound");
        return *funding_point;
    }
    return {nodes[node].tx.txid(), vout};
}

const Output& Vtxt::leaf_output(std::size_t leaf) const
{
    if (leaf >= leaf_at.size()) throw Error(Errc::NotALeaf, "leaf index out of range");
    auto [node, vout] = leaf_at[leaf];
    return node < 0 ? funding : nodes[node].tx.outs[vout];
}

const LockScript& Vtxt::input_lock(std::size_t i) const
{
    auto& n = nodes.at(i);
    return n.parent < 0 ? funding.lock : nodes[n.parent].tx.outs[n.parent_vout].lock;
}

Amount Vtxt::input_value(std::size_t i) const
{
    auto& n = nodes.at(i);
    return n.parent < 0 ? funding.value : nodes[n.parent].tx.outs[n.parent_vout].value;
}

std::vector<int> Vtxt::node_path(std::size_t leaf) const
{
    if (leaf >= leaf_at.size()) throw Error(Errc::NotALeaf, "leaf index out of range");
    std::vector<int> out;
    for (int n = leaf_at[leaf].first; n >= 0; n = nodes[n].parent) out.push_back(n);
    std::reverse(out.begin(), out.end());
    return out;
}

int Vtxt::depth() const
{
    int d = 0;
    for (std::size_t l = 0; l < leaf_at.size(); ++l) d = std::max(d, static_cast<int>(node_path(l).size()) - 1);
    return d;
}

std::string check_vtxt(const Vtxt& v)
{
    if (v.nodes.empty()) return v.leaf_at.size() <= 1 ? "" : "leaves without nodes";
    if (v.nodes[0].parent != -1) return "node 0 is not the root";
    for (std::size_t i = 0; i < v.nodes.size(); ++i) {
        auto& n = v.nodes[i];
        if (i > 0 && (n.parent < 0 || n.parent >= static_cast<int>(i))) return "node " + std::to_string(i) + " has no parent";
        if (n.tx.ins.size() != 1) return "node " + std::to_string(i) + " is not single-input";
        if (n.child.size() != n.tx.outs.size()) return "child map size mismatch";
        if (n.parent >= 0) {
            auto& p = v.nodes[n.parent];
            if (n.parent_vout >= p.child.size() || p.child[n.parent_vout] != static_cast<int>(i))
                return "edge condition violated at node " + std::to_string(i);
            if (v.funding_point && n.tx.ins[0] != OutPoint{p.tx.txid(), n.parent_vout})
                return "node " + std::to_string(i) + " does not spend its parent";
        } else if (v.funding_point && n.tx.ins[0] != *v.funding_point) {
            return "root does not spend the funding output";
        }
        for (std::size_t c = 0; c < n.child.size(); ++c) {
            int ch = n.child[c];
            if (ch >= 0 && (ch >= static_cast<int>(v.nodes.size()) || v.nodes[ch].parent != static_cast<int>(i)))
                return "child link broken at node " + std::to_string(i);
        }
        if (n.tx.out_value() > v.input_value(i)) return "node " + std::to_string(i) + " creates value";
    }
    std::set<int> leaf_nodes;
    for (auto& [node, vout] : v.leaf_at) {
        if (node < 0 || node >= static_cast<int>(v.nodes.size())) return "leaf outside the tree";
        if (!leaf_nodes.insert(node).second) return "two leaves in one node";
        auto& n = v.nodes[node];
        int spendable = 0;
        for (auto& o : n.tx.outs)
            if (!(o.value == 0 && o.lock == anchor_lock())) ++spendable;
        if (spendable != 1) return "leaf tx must carry exactly one output besides its anchor";
        if (n.child[vout] != -1) return "leaf output spent inside the tree";
    }
    return "";
}

std::string check_path(const Vtxt& v, std::size_t leaf)
{
    if (leaf >= v.leaf_at.size()) return "leaf outside the tree";
    auto [ln, lvout] = v.leaf_at[leaf];
    if (ln < 0 || ln >= static_cast<int>(v.nodes.size())) return "leaf outside the tree";
    if (v.nodes[0].parent != -1) return "node 0 is not the root";
    auto& lnode = v.nodes[ln];
    if (lvout >= lnode.child.size() || lnode.child[lvout] != -1) return "leaf output spent inside the tree";
    int spendable = 0;
    for (auto& o : lnode.tx.outs)
        if (!(o.value == 0 && o.lock == anchor_lock())) ++spendable;
    if (spendable != 1) return "leaf tx must carry exactly one output besides its anchor";
    std::size_t steps = 0;
    for (int i = ln;; i = v.nodes[i].parent) {
        if (++steps > v.nodes.size()) return "cycle above node " + std::to_string(ln);
        auto& n = v.nodes[i];
        if (n.tx.ins.size() != 1) return "node " + std::to_string(i) + " is not single-input";
        if (n.child.size() != n.tx.outs.size()) return "child map size mismatch";
        if (n.tx.out_value() > v.input_value(i)) return "node " + std::to_string(i) + " creates value";
        if (n.parent < 0) {
            if (i != 0) return "node " + std::to_string(i) + " has no parent";
            if (v.funding_point && n.tx.ins[0] != *v.funding_point) return "root does not spend the funding output";
            break;
        }
        if (n.parent >= i) return "node " + std::to_string(i) + " has no parent";
        auto& p = v.nodes[n.parent];
        if (n.parent_vout >= p.child.size() || p.child[n.parent_vout] != i)
            return "edge condition violated at node " + std::to_string(i);
        if (v.funding_point && n.tx.ins[0] != OutPoint{p.tx.txid(), n.parent_vout})
            return "node " + std::to_string(i) + " does not spend its parent";
    }
    return "";
}

namespace {

struct Range {
    std::size_t lo, hi;
};

std::vector<Range> split(std::size_t lo, std::size_t hi, int arity)
{
    std::size_t n = hi - lo;
    std::size_t g = std::min<std::size_t>(arity, n);
    std::vector<Range> out;
    std::size_t at = lo;
    for (std::size_t i = 0; i < g; ++i) {
        std::size_t sz = n / g + (i < n % g ? 1 : 0);
        out.push_back({at, at + sz});
        at += sz;
    }
    return out;
}

Amount checked_add(Amount a, Amount b)
{
    Amount r;
    if (b < 0 || __builtin_add_overflow(a, b, &r)) throw Error(Errc::ValueOverflow, "value overflow");
    return r;
}

struct BatchBuilder {
    const std::vector<Leaf>& leaves;
    int arity;
    PublicKey op;
    Height expiry;
    bool path_cosign;
    const NonceSource& nonces;
    std::vector<PublicKey> everyone;
    std::vector<Amount> prefix;
    Vtxt v;

    Amount value(std::size_t lo, std::size_t hi) const { return prefix[hi] - prefix[lo]; }

    std::vector<PublicKey> cosigners(std::size_t lo, std::size_t hi) const
    {
        if (!path_cosign) return everyone;
        std::set<PublicKey> s;
        for (std::size_t i = lo; i < hi; ++i) s.insert(leaves[i].cosigners.begin(), leaves[i].cosigners.end());
        s.erase(op);
        return {s.begin(), s.end()};
    }

    int build(std::size_t lo, std::size_t hi, int parent, std::uint32_t vout)
    {
        int idx = static_cast<int>(v.nodes.size());
        v.nodes.emplace_back();
        {
            auto& n = v.nodes[idx];
            n.parent = parent;
            n.parent_vout = vout;
            n.cosigners = cosigners(lo, hi);
            if (nonces) n.r_star = nonces();
        }
        if (hi - lo == 1) {
            auto& n = v.nodes[idx];
            n.tx.outs = {leaves[lo].vtxo, Output{0, anchor_lock()}};
            n.child = {-1, -1};
            n.leaf = static_cast<int>(lo);
            v.leaf_at[lo] = {idx, 0};
            return idx;
        }
        std::vector<Output> outs;
        std::vector<int> kids;
        auto groups = split(lo, hi, arity);
        for (std::uint32_t j = 0; j < groups.size(); ++j) {
            int c = build(groups[j].lo, groups[j].hi, idx, j);
            auto& cn = v.nodes[c];
            outs.push_back({value(groups[j].lo, groups[j].hi), batch_lock(op, expiry, cn.cosigners, cn.r_star)});
            kids.push_back(c);
        }
        outs.push_back({0, anchor_lock()});
        kids.push_back(-1);
        v.nodes[idx].tx.outs = std::move(outs);
        v.nodes[idx].child = std::move(kids);
        return idx;
    }
};

struct ConnectorBuilder {
    int arity;
    LockScript lock;
    Amount epsilon;
    Vtxt v;

    int build(std::size_t lo, std::size_t hi, int parent, std::uint32_t vout)
    {
        int idx = static_cast<int>(v.nodes.size());
        v.nodes.emplace_back();
        v.nodes[idx].parent = parent;
        v.nodes[idx].parent_vout = vout;
        if (hi - lo == 1) {
            v.nodes[idx].tx.outs = {Output{epsilon, lock}};
            v.nodes[idx].child = {-1};
            v.nodes[idx].leaf = static_cast<int>(lo);
            v.leaf_at[lo] = {idx, 0};
            return idx;
        }
        std::vector<Output> outs;
        std::vector<int> kids;
        auto groups = split(lo, hi, arity);
        for (std::uint32_t j = 0; j < groups.size(); ++j) {
            kids.push_back(build(groups[j].lo, groups[j].hi, idx, j));
            outs.push_back({epsilon * static_cast<Amount>(groups[j].hi - groups[j].lo), lock});
        }
        v.nodes[idx].tx.outs = std::move(outs);
        v.nodes[idx].child = std::move(kids);
        return idx;
    }
};

} // namespace

std::pair<BatchOutput, SignerTree> build_vtxt(const std::vector<Leaf>& leaves, int arity, const PublicKey& op,
                                              Height expiry, bool path_cosign, const NonceSource& nonces)
{
    if (leaves.empty()) throw Error(Errc::EmptySet, "batch needs at least one leaf");
    if (arity < 2) throw Error(Errc::InvalidArgument, "arity must be >= 2");
    BatchBuilder b{leaves, arity, op, expiry, path_cosign, nonces, {}, {0}, {}};
    std::set<PublicKey> all;
    for (auto& l : leaves) {
        if (l.vtxo.value < 0) throw Error(Errc::InvalidArgument, "negative leaf value");
        b.prefix.push_back(checked_add(b.prefix.back(), l.vtxo.value));
        all.insert(l.cosigners.begin(), l.cosigners.end());
    }
    all.erase(op);
    b.everyone.assign(all.begin(), all.end());
    b.v.leaf_at.resize(leaves.size());
    b.build(0, leaves.size(), -1, 0);

    BatchOutput out;
    out.value = b.prefix.back();
    out.expiry = expiry;
    out.lock = batch_lock(op, expiry, b.v.nodes[0].cosigners, b.v.nodes[0].r_star);
    b.v.funding = {out.value, out.lock};
    out.vtxt = std::move(b.v);
    SignerTree st;
    for (auto& n : out.vtxt.nodes) st.per_node.push_back(n.cosigners);
    return {std::move(out), std::move(st)};
}

std::vector<Tx> path(const Vtxt& v, std::size_t leaf)
{
    std::vector<Tx> out;
    for (int n : v.node_path(leaf)) out.push_back(v.nodes[n].tx);
    return out;
}

std::vector<Tx> path(const Vtxt& v, const OutPoint& vtxo)
{
    for (std::size_t l = 0; l < v.leaf_count(); ++l)
        if (v.leaf_outpoint(l) == vtxo) return path(v, l);
    throw Error(Errc::NotALeaf, "vtxo " + vtxo.str() + " is not a leaf of this tree");
}

std::vector<OutPoint> ConnectorOutput::anchors() const
{
    std::vector<OutPoint> out;
    if (vtxt.nodes.empty()) {
        if (!vtxt.funding_point) throw Error(Errc::Precondition, "connector not bound");
        out.push_back(*vtxt.funding_point);
        return out;
    }
    for (std::size_t l = 0; l < vtxt.leaf_count(); ++l) out.push_back(vtxt.leaf_outpoint(l));
    return out;
}

ConnectorOutput build_connector(int anchor_count, const PublicKey& op, int arity, Amount epsilon)
{
    if (anchor_count < 1) throw Error(Errc::InvalidArgument, "connector needs at least one anchor");
    if (arity < 2) throw Error(Errc::InvalidArgument, "arity must be >= 2");
    ConnectorOutput c;
    c.lock = connector_lock(op);
    c.value = epsilon * anchor_count;
    c.vtxt.funding = {c.value, c.lock};
    if (anchor_count == 1) {
        c.vtxt.leaf_at = {{-1, 0}};
        return c;
    }
    ConnectorBuilder b{arity, c.lock, epsilon, {}};
    b.v.leaf_at.resize(anchor_count);
    b.build(0, anchor_count, -1, 0);
    b.v.funding = c.vtxt.funding;
    c.vtxt = std::move(b.v);
    return c;
}

void sign_connector(ConnectorOutput& c, const SecretKey& sk_op)
{
    for (std::size_t i = 0; i < c.vtxt.nodes.size(); ++i) {
        auto& tx = c.vtxt.nodes[i].tx;
        tx.wits.assign(1, {});
        sign_single(tx, 0, c.vtxt.input_lock(i), 0, sk_op);
    }
}

// ---- templates

Tx boarding_tx(const Funds& funds, const PublicKey& owner, const PublicKey& op, Height t_b, Amount amount)
{
    if (funds.empty()) throw Error(Errc::InsufficientFunds, "no funds");
    if (amount <= 0) throw Error(Errc::InvalidArgument, "boarding amount must be positive");
    Amount total = 0;
    Tx tx;
    for (auto& [pt, o] : funds) {
        total = checked_add(total, o.value);
        tx.ins.push_back(pt);
    }
    if (total < amount) throw Error(Errc::InsufficientFunds, "funds do not cover the boarding amount");
    tx.outs.push_back({amount, boarding_lock(owner, op, t_b)});
    if (total > amount) tx.outs.push_back({total - amount, script::key_lock(owner)});
    return tx;
}

Tx reset_tx(const OutPoint& vtxo, const Output& vtxo_out, const PublicKey& op, Height expiry,
            std::optional<Point> r_star)
{
    Tx tx;
    tx.ins = {vtxo};
    tx.outs = {{vtxo_out.value, reset_lock(vtxo_out.lock, op, expiry, r_star)}};
    return tx;
}

Tx ark_tx(const Funds& inputs, const std::vector<Output>& outs)
{
    if (inputs.empty()) throw Error(Errc::InvalidArgument, "ark tx needs inputs");
    Amount in = 0, out = 0;
    Tx tx;
    for (auto& [pt, o] : inputs) {
        in = checked_add(in, o.value);
        tx.ins.push_back(pt);
    }
    for (auto& o : outs) out = checked_add(out, o.value);
    if (out > in) throw Error(Errc::ValueExceeded, "outputs exceed inputs");
    tx.outs = outs;
    return tx;
}

Tx forfeit_tx(const OutPoint& vtxo, const Output& vtxo_out, const OutPoint& anchor, const Output& anchor_out,
              const PublicKey& op)
{
    Tx tx;
    tx.ins = {vtxo, anchor};
    tx.outs = {{checked_add(vtxo_out.value, anchor_out.value), script::key_lock(op)}};
    return tx;
}

Tx sweep_tx(const OutPoint& out, const Output& o, const PublicKey& op)
{
    Tx tx;
    tx.ins = {out};
    tx.outs = {{o.value, script::key_lock(op)}};
    return tx;
}

Tx claim_tx(const OutPoint& vtxo, const Output& o, const PublicKey& owner)
{
    Tx tx;
    tx.ins = {vtxo};
    tx.outs = {{o.value, script::key_lock(owner)}};
    return tx;
}

void sign_single(Tx& tx, std::size_t i, const LockScript& lock, std::uint32_t p, const SecretKey& sk)
{
    if (tx.wits.size() != tx.ins.size()) tx.wits.resize(tx.ins.size());
    if (p >= lock.paths.size() || lock.paths[p].signature_slots() != 1)
        throw Error(Errc::InvalidArgument, "path is not single-signature");
    tx.wits[i] = script::script_path_witness(lock, p, {crypto::sign(sk, tx.sighash_bytes(i))});
}

void sign_key_path(Tx& tx, std::size_t i, const LockScript& lock, const SecretKey& sk)
{
    if (tx.wits.size() != tx.ins.size()) tx.wits.resize(tx.ins.size());
    tx.wits[i] = script::key_path_witness(lock, crypto::sign(sk, tx.sighash_bytes(i)));
}

std::string replay_check(const std::vector<Tx>& txs, const View& chain)
{
    std::map<OutPoint, Output> pending;
    std::set<OutPoint> used;
    Height next = chain.height() + 1;
    for (auto& tx : txs) {
        TxId id = tx.txid();
        if (chain.contains(id)) continue;
        if (tx.wits.size() != tx.ins.size()) return "tx " + id.hex() + " is not fully signed";
        Amount in = 0;
        for (std::size_t i = 0; i < tx.ins.size(); ++i) {
            const OutPoint& op = tx.ins[i];
            if (!used.insert(op).second) return "input " + op.str() + " spent twice";
            const Output* o = nullptr;
            Height conf = next;
            if (auto it = pending.find(op); it != pending.end()) {
                o = &it->second;
            } else if (chain.unspent(op)) {
                o = chain.output(op);
                conf = *chain.tx_height(op.txid);
            } else {
                return "input " + op.str() + " missing or already spent";
            }
            script::SpendContext ctx{next, conf, tx.sighash_bytes(i)};
            if (!script::evaluate(o->lock, tx.wits[i], ctx)) return "witness for " + op.str() + " does not verify";
            in += o->value;
        }
        if (tx.out_value() > in) return "tx " + id.hex() + " creates value";
        for (std::uint32_t v = 0; v < tx.outs.size(); ++v) pending[{id, v}] = tx.outs[v];
    }
    return "";
}

std::optional<crypto::Signature> fixed_nonce_sig(const Tx& tx, std::size_t i, const PublicKey& op)
{
    if (i >= tx.wits.size()) return std::nullopt;
    return script::nonce_bound_signature(tx.wits[i], op);
}

io::json vtxt_to_json(const Vtxt& v)
{
    io::json nodes = io::json::array();
    for (auto& n : v.nodes) {
        io::json cos = io::json::array();
        for (auto& c : n.cosigners) cos.push_back(c.hex());
        nodes.push_back({{"tx", io::to_json(n.tx)},
                         {"parent", n.parent},
                         {"parent_vout", n.parent_vout},
                         {"children", n.child},
                         {"cosigners", cos},
                         {"leaf", n.leaf}});
    }
    io::json leaves = io::json::array();
    for (auto& [node, vout] : v.leaf_at) leaves.push_back({{"node", node}, {"vout", vout}});
    io::json j = {{"nodes", nodes}, {"leaves", leaves}, {"funding", io::to_json(v.funding)}};
    j["funding_point"] = v.funding_point ? io::to_json(*v.funding_point) : io::json(nullptr);
    return j;
}

} // namespace ark::core
