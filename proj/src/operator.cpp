#include "ark/operator.hpp"

#include <algorithm>
#include <numeric>

namespace ark::op {

using script::Kind;
using script::LockScript;
using script::Predicate;

const char* request_kind_name(RequestKind k)
{
    switch (k) {
    case RequestKind::Boarding: return "boarding";
    case RequestKind::BatchSwap: return "batch_swap";
    case RequestKind::Exit: return "exit";
    case RequestKind::Ark: return "ark";
    }
    return "?";
}

// ---- bundle

Output CommitmentBundle::anchor_output(const OutPoint& a) const
{
    if (!connector) throw Error(Errc::NotALeaf, "bundle has no connector");
    auto& v = connector->vtxt;
    if (v.nodes.empty()) {
        if (v.funding_point && *v.funding_point == a) return v.funding;
        throw Error(Errc::NotALeaf, "not an anchor of this connector");
    }
    for (std::size_t l = 0; l < v.leaf_count(); ++l)
        if (v.leaf_outpoint(l) == a) return v.leaf_output(l);
    throw Error(Errc::NotALeaf, "not an anchor of this connector");
}

std::vector<Tx> CommitmentBundle::anchor_path(const OutPoint& a) const
{
    if (!connector) throw Error(Errc::NotALeaf, "bundle has no connector");
    auto& v = connector->vtxt;
    if (v.nodes.empty()) return {};
    for (std::size_t l = 0; l < v.leaf_count(); ++l)
        if (v.leaf_outpoint(l) == a) return core::path(v, l);
    throw Error(Errc::NotALeaf, "not an anchor of this connector");
}

std::vector<OutPoint> CommitmentBundle::forfeited() const
{
    std::vector<OutPoint> out;
    for (auto& s : swaps) out.insert(out.end(), s.vtxos.begin(), s.vtxos.end());
    for (auto& e : exits) out.insert(out.end(), e.vtxos.begin(), e.vtxos.end());
    return out;
}

std::set<PartyId> CommitmentBundle::parties() const
{
    std::set<PartyId> out;
    for (auto& r : boardings) out.insert(r.party);
    for (auto& r : swaps) out.insert(r.party);
    for (auto& r : exits) out.insert(r.party);
    return out;
}

std::vector<std::string> OperatorBook::lists_of(const OutPoint& v) const
{
    std::vector<std::string> out;
    for (auto& [c, vs] : unconfirmed)
        if (std::find(vs.begin(), vs.end(), v) != vs.end()) out.push_back("unconfirmed");
    if (confirmedVTXO.count(v)) out.push_back("confirmedVTXO");
    if (preConfirmed.count(v)) out.push_back("preConfirmed");
    bool s = spent.count(v) > 0;
    for (auto& [c, ps] : unconfirmedSpent)
        for (auto& p : ps)
            if (p.first == v) s = true;
    if (s) out.push_back("spent");
    if (replaced.count(v)) out.push_back("replaced");
    if (expired.count(v)) out.push_back("expired");
    return out;
}

bool BatchingPolicy::triggers(std::size_t pending, Height since) const
{
    if (pending == 0) return false;
    return pending >= static_cast<std::size_t>(std::max(1, min_requests)) || since >= max_wait;
}

// ---- operator

Operator::Operator(PartyId id, KeyPair keys, Params params, Ledger& chain, BatchingPolicy policy)
    : id_(std::move(id)), keys_(keys), params_(params), chain_(chain), policy_(policy)
{
    params_.validate();
    chain_.register_party(id_);
}

void Operator::attach(Party* party, const std::vector<PublicKey>& keys)
{
    for (auto& k : keys) directory_[k] = party;
}

Party* Operator::party_of(const PublicKey& pk) const
{
    auto it = directory_.find(pk);
    return it == directory_.end() ? nullptr : it->second;
}

Point Operator::fresh_nonce()
{
    crypto::Scalar r = crypto::derive_fixed_nonce(keys_.sk, "rstar/" + std::to_string(nonce_counter_++));
    Point R = crypto::mul_base(r);
    nonces_[R] = r;
    return R;
}

core::NonceSource Operator::nonce_source()
{
    return [this] { return fresh_nonce(); };
}

void Operator::log(const std::string& type, io::json data) { events_.push_back({chain_.tip(), type, std::move(data)}); }

void Operator::note_cosign(const OutPoint& v, const TxId& tx) { cosigned_[v].insert(tx); }

void Operator::submit(const Tx& tx, const std::string& why)
{
    auto r = chain_.submit(tx, id_);
    if (r.accepted) {
        if (r.reason != Reject::Duplicate) log("submit", {{"tx", tx.txid().hex()}, {"why", why}});
        submitted_.insert(tx.txid());
    } else {
        log("submit_failed", {{"tx", tx.txid().hex()}, {"why", why}, {"reason", reject_name(r.reason)}});
    }
}

// ---- signing

namespace {

[[noreturn]] void abort_with(int step, Party* p, const std::string& why)
{
    throw SessionAborted(step, p ? p->id() : PartyId("?"), why);
}

} // namespace

std::vector<Signature> Operator::cosign_path(const Predicate& path, const Bytes& digest, int step)
{
    std::vector<Signature> out;
    std::function<void(const Predicate&)> walk = [&](const Predicate& p) {
        switch (p.kind) {
        case Kind::CheckSig: {
            if (p.pk == keys_.pk) {
                out.push_back(crypto::sign(keys_.sk, digest));
                return;
            }
            Party* q = party_of(p.pk);
            if (!q) abort_with(step, nullptr, "no party holds a required key");
            auto s = q->sign_for(digest, p.pk, step);
            if (!s || !crypto::verify(p.pk, digest, *s)) abort_with(step, q, "signature withheld");
            out.push_back(*s);
            return;
        }
        case Kind::CheckAggSig: {
            crypto::SigningSession s(p.agg, digest);
            for (auto& m : p.agg.members) {
                if (m == keys_.pk) {
                    s.commit(keys_.sk);
                    continue;
                }
                Party* q = party_of(m);
                if (!q || !q->musig_commit(s, m, step)) abort_with(step, q, "nonce withheld");
            }
            for (auto& m : p.agg.members) {
                if (m == keys_.pk) {
                    s.respond(keys_.sk);
                    continue;
                }
                Party* q = party_of(m);
                if (!q || !q->musig_respond(s, m, step)) abort_with(step, q, "partial signature withheld");
            }
            auto missing = s.missing();
            if (!missing.empty()) abort_with(step, party_of(missing.front()), "session incomplete");
            out.push_back(s.finish());
            return;
        }
        case Kind::NonceBound: {
            if (p.pk != keys_.pk) abort_with(step, nullptr, "nonce binding for another key");
            auto it = nonces_.find(p.r_star);
            if (it == nonces_.end()) abort_with(step, nullptr, "unknown fixed nonce");
            auto used = nonce_used_.find(p.r_star);
            if (honest && used != nonce_used_.end() && used->second != digest)
                throw SessionAborted(step, id_, "refusing to reuse a fixed nonce");
            nonce_used_.emplace(p.r_star, digest);
            out.push_back(crypto::sign(keys_.sk, digest, crypto::Fixed{it->second}));
            return;
        }
        case Kind::And:
            for (auto& c : p.children) walk(c);
            return;
        default: return;
        }
    };
    walk(path);
    return out;
}

void Operator::sign_input(Tx& tx, std::size_t i, const LockScript& lock, std::uint32_t path, int step)
{
    if (path >= lock.paths.size()) throw Error(Errc::InvalidArgument, "no such path");
    if (tx.wits.size() != tx.ins.size()) tx.wits.resize(tx.ins.size());
    auto sigs = cosign_path(lock.paths[path], tx.sighash_bytes(i), step);
    tx.wits[i] = script::script_path_witness(lock, path, std::move(sigs));
}

// ---- intake

void Operator::check_vtxo_output(const Output& o) const
{
    if (o.value <= 0) throw Error(Errc::Rejected, "vtxo value must be positive");
    auto c = core::classify_vtxo(o.lock, keys_.pk, params_.t_u);
    if (!c.ok) throw Error(Errc::Rejected, "not a vtxo: " + c.reason);
}

bool Operator::is_vtxo_known(const OutPoint& v) const
{
    return book_.confirmedVTXO.count(v) || book_.preConfirmed.count(v);
}

static Amount sum_values(const std::vector<Output>& outs)
{
    Amount s = 0;
    for (auto& o : outs) {
        if (o.value < 0 || __builtin_add_overflow(s, o.value, &s)) throw Error(Errc::ValueOverflow, "value overflow");
    }
    return s;
}

std::uint64_t Operator::verify_boarding(BoardingRequest r)
{
    if (!accepting || censored.count(r.party)) throw Error(Errc::Rejected, "request ignored");
    View st = chain_.stable_view();
    if (!st.unspent(r.out) || !chain_.tip_view().unspent(r.out))
        throw Error(Errc::Rejected, "boarding output not confirmed and unspent in the stable view");
    const Output* onchain = st.output(r.out);
    if (onchain->value != r.output.value || !(onchain->lock == r.output.lock))
        throw Error(Errc::Rejected, "boarding output does not match the chain");
    if (book_.preSpent.count(r.out)) throw Error(Errc::AlreadyPending, "boarding output already pending");
    const LockScript& lock = r.output.lock;
    if (script::commit(lock.internal_key, lock.paths) != lock.commitment)
        throw Error(Errc::Rejected, "boarding script does not match its commitment");
    if (lock.internal_key) throw Error(Errc::Rejected, "boarding output has a key path");
    int collab = 0;
    for (auto& p : lock.paths) {
        if (p.requires_signer(keys_.pk)) {
            ++collab;
        } else if (p.rel_delay() < params_.t_b) {
            throw Error(Errc::Rejected, "owner path delayed by less than t_b");
        }
    }
    if (collab == 0) throw Error(Errc::Rejected, "boarding output has no operator path");
    if (r.vtxos.empty()) throw Error(Errc::Rejected, "no vtxos requested");
    for (auto& o : r.vtxos) check_vtxo_output(o);
    if (sum_values(r.vtxos) + params_.operator_fee > r.output.value)
        throw Error(Errc::ValueExceeded, "vtxos exceed the boarding output");
    if (r.cosigners.empty()) throw Error(Errc::Rejected, "empty cosigner set");
    for (auto& c : r.cosigners)
        if (!party_of(c)) throw Error(Errc::UnknownParty, "unknown cosigner");
    r.id = next_request_++;
    request_fee_[r.id] = r.output.value - sum_values(r.vtxos);
    book_.preSpent.insert(r.out);
    log("boarding_queued", {{"party", r.party}, {"id", r.id}, {"out", r.out.str()}});
    book_.toBoard.push_back(r);
    return r.id;
}

static void check_inputs(const OperatorBook& book, const std::vector<OutPoint>& ins, Height tip)
{
    if (ins.empty()) throw Error(Errc::Rejected, "no inputs");
    std::set<OutPoint> seen;
    for (auto& v : ins) {
        if (!seen.insert(v).second) throw Error(Errc::Rejected, "duplicate input");
        if (book.spent.count(v)) throw Error(Errc::DoubleSpend, "vtxo " + v.str() + " already spent");
        if (book.preSpent.count(v)) throw Error(Errc::AlreadyPending, "vtxo " + v.str() + " already pending");
        if (!book.confirmedVTXO.count(v) && !book.preConfirmed.count(v))
            throw Error(Errc::UnknownVtxo, "vtxo " + v.str() + " unknown");
        if (book.info.at(v).expiry <= tip) throw Error(Errc::UnknownVtxo, "vtxo " + v.str() + " expired");
    }
}

static Amount input_value(const OperatorBook& book, const std::vector<OutPoint>& ins)
{
    Amount s = 0;
    for (auto& v : ins) s += book.info.at(v).out.value;
    return s;
}

std::uint64_t Operator::verify_batch_swap(SwapRequest r)
{
    if (!accepting || censored.count(r.party)) throw Error(Errc::Rejected, "request ignored");
    check_inputs(book_, r.vtxos, chain_.tip());
    if (r.outs.empty()) throw Error(Errc::Rejected, "no outputs requested");
    for (auto& o : r.outs) check_vtxo_output(o);
    Amount in = input_value(book_, r.vtxos);
    if (sum_values(r.outs) + params_.operator_fee > in) throw Error(Errc::ValueExceeded, "outputs exceed inputs");
    if (r.cosigners.empty()) throw Error(Errc::Rejected, "empty cosigner set");
    for (auto& c : r.cosigners)
        if (!party_of(c)) throw Error(Errc::UnknownParty, "unknown cosigner");
    r.id = next_request_++;
    request_fee_[r.id] = in - sum_values(r.outs);
    book_.preSpent.insert(r.vtxos.begin(), r.vtxos.end());
    log("swap_queued", {{"party", r.party}, {"id", r.id}});
    book_.toBatchSwap.push_back(r);
    return r.id;
}

std::uint64_t Operator::verify_exit(ExitRequest r)
{
    if (!accepting || censored.count(r.party)) throw Error(Errc::Rejected, "request ignored");
    check_inputs(book_, r.vtxos, chain_.tip());
    if (r.outs.empty()) throw Error(Errc::Rejected, "no outputs requested");
    for (auto& o : r.outs)
        if (o.value <= 0 || o.lock.burn) throw Error(Errc::Rejected, "bad exit output");
    Amount in = input_value(book_, r.vtxos);
    if (sum_values(r.outs) + params_.operator_fee > in) throw Error(Errc::ValueExceeded, "outputs exceed inputs");
    r.id = next_request_++;
    request_fee_[r.id] = in - sum_values(r.outs);
    book_.preSpent.insert(r.vtxos.begin(), r.vtxos.end());
    log("exit_queued", {{"party", r.party}, {"id", r.id}});
    book_.toExit.push_back(r);
    return r.id;
}

static std::optional<Point> nonce_in(const Predicate& p, const PublicKey& op)
{
    if (p.kind == Kind::NonceBound && p.pk == op) return p.r_star;
    for (auto& c : p.children)
        if (auto r = nonce_in(c, op)) return r;
    return std::nullopt;
}

ArkSigned Operator::verify_ark_request(ArkRequest r)
{
    if (!accepting || censored.count(r.party)) throw Error(Errc::Rejected, "request ignored");
    Tx& ark = r.ark;
    if (ark.ins.empty()) throw Error(Errc::Rejected, "ark tx without inputs");
    bool with_resets = params_.resets;
    if (with_resets && r.resets.size() != ark.ins.size()) throw Error(Errc::MissingReset, "one reset per input required");
    if (!with_resets && !r.resets.empty()) throw Error(Errc::Rejected, "resets are disabled");

    std::vector<OutPoint> vtxos;
    for (std::size_t i = 0; i < ark.ins.size(); ++i) {
        if (with_resets && r.resets[i].ins.size() != 1) throw Error(Errc::MissingReset, "reset must spend one vtxo");
        vtxos.push_back(with_resets ? r.resets[i].ins[0] : ark.ins[i]);
    }
    Height tip = chain_.tip();
    if (honest) {
        check_inputs(book_, vtxos, tip);
    } else {
        for (auto& v : vtxos)
            if (!book_.info.count(v)) throw Error(Errc::UnknownVtxo, "vtxo " + v.str() + " unknown");
    }

    Amount in = 0;
    Height expiry = std::numeric_limits<Height>::max();
    int depth = 0;
    for (std::size_t i = 0; i < vtxos.size(); ++i) {
        const VtxoInfo& info = book_.info.at(vtxos[i]);
        if (info.chain + 1 > params_.max_chain)
            throw Error(Errc::Rejected, "ark chain too long, batch swap first");
        if (with_resets) {
            const Tx& re = r.resets[i];
            if (re.outs.size() != 1 || re.outs[0].value != info.out.value || ark.ins[i] != OutPoint{re.txid(), 0})
                throw Error(Errc::MissingReset, "reset does not match input " + std::to_string(i));
            std::optional<Point> rs;
            if (!re.outs[0].lock.paths.empty()) rs = nonce_in(re.outs[0].lock.paths[0], keys_.pk);
            if (rs && !nonces_.count(*rs)) throw Error(Errc::MissingReset, "reset uses a nonce the operator never issued");
            LockScript want;
            try {
                want = core::reset_lock(info.out.lock, keys_.pk, info.expiry, rs);
            } catch (const Error&) {
                throw Error(Errc::MissingReset, "input has no collaborative path");
            }
            if (!(re.outs[0].lock == want))
                throw Error(Errc::MissingReset, "reset output not sweepable at the input's batch expiry");
        }
        in += info.out.value;
        expiry = std::min(expiry, info.expiry);
        depth = std::max(depth, info.chain + 1);
    }
    if (ark.outs.empty()) throw Error(Errc::Rejected, "ark tx without outputs");
    for (auto& o : ark.outs) check_vtxo_output(o);
    if (sum_values(ark.outs) + params_.operator_fee > in) throw Error(Errc::ValueExceeded, "outputs exceed inputs");

    // ark tx first, resets last
    for (std::size_t i = 0; i < ark.ins.size(); ++i) {
        const LockScript& lock = with_resets ? r.resets[i].outs[0].lock : book_.info.at(vtxos[i]).out.lock;
        sign_input(ark, i, lock, core::kCollabPath, kArk);
    }
    for (std::size_t i = 0; i < r.resets.size(); ++i)
        sign_input(r.resets[i], 0, book_.info.at(vtxos[i]).out.lock, core::kCollabPath, kArk);

    TxId aid = ark.txid();
    for (std::size_t i = 0; i < vtxos.size(); ++i) {
        const Tx& spender = with_resets ? r.resets[i] : ark;
        note_cosign(vtxos[i], spender.txid());
        book_.confirmedVTXO.erase(vtxos[i]);
        book_.preConfirmed.erase(vtxos[i]);
        book_.spent[vtxos[i]] = spender;
    }
    for (std::uint32_t j = 0; j < ark.outs.size(); ++j) {
        OutPoint o{aid, j};
        book_.info[o] = VtxoInfo{ark.outs[j], expiry, depth, std::nullopt, aid, r.party};
        book_.preConfirmed.insert(o);
    }
    Amount fee = in - sum_values(ark.outs);
    fees_ += fee;
    ArkSigned out{r.resets, ark};
    arks_[aid] = out;
    if (sink_) sink_->ark(out.resets, out.ark);
    log("ark_signed", {{"party", r.party}, {"ark", aid.hex()}, {"inputs", vtxos.size()}, {"fee", fee}});
    return out;
}

// ---- assembly

std::size_t Operator::pending_requests() const
{
    return book_.toBoard.size() + book_.toBatchSwap.size() + book_.toExit.size();
}

std::vector<std::pair<OutPoint, Output>> Operator::funding_candidates() const
{
    std::set<OutPoint> busy(reserved.begin(), reserved.end());
    for (auto& [seq, e] : chain_.mempool())
        busy.insert(e.tx.ins.begin(), e.tx.ins.end());
    std::vector<std::pair<OutPoint, Output>> out;
    for (auto& [pt, o] : chain_.tip_view().utxos())
        if (o.lock.key_only() && *o.lock.internal_key == keys_.pk && !busy.count(pt)) out.emplace_back(pt, o);
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) {
        if (a.second.value != b.second.value) return a.second.value > b.second.value;
        return a.first < b.first;
    });
    return out;
}

std::optional<CommitmentBundle> Operator::assemble_commitment()
{
    if (pending_requests() == 0) return std::nullopt;
    CommitmentBundle b;
    b.h_O = chain_.tip();
    b.expiry = b.h_O + 2 * params_.k + params_.t_e;
    b.boardings.assign(book_.toBoard.begin(), book_.toBoard.end());
    b.swaps.assign(book_.toBatchSwap.begin(), book_.toBatchSwap.end());
    b.exits.assign(book_.toExit.begin(), book_.toExit.end());

    std::vector<core::Leaf> leaves;
    for (auto& r : b.boardings)
        for (std::size_t j = 0; j < r.vtxos.size(); ++j) {
            leaves.push_back({r.vtxos[j], r.cosigners});
            b.leaves.push_back({RequestKind::Boarding, r.id, j});
        }
    for (auto& r : b.swaps)
        for (std::size_t j = 0; j < r.outs.size(); ++j) {
            leaves.push_back({r.outs[j], r.cosigners});
            b.leaves.push_back({RequestKind::BatchSwap, r.id, j});
        }
    Amount batch_value = 0;
    for (auto& l : leaves) batch_value += l.vtxo.value;
    auto forfeited = b.forfeited();
    Amount connector_value = params_.epsilon * static_cast<Amount>(forfeited.size());
    Amount exit_value = 0;
    for (auto& e : b.exits) exit_value += sum_values(e.outs);
    Amount boarded = 0;
    for (auto& r : b.boardings) boarded += r.output.value;
    Amount need = batch_value + connector_value + exit_value - boarded;

    // funding: forced inputs first (conflict with a rolled-back commitment), then largest UTXOs
    std::vector<std::pair<OutPoint, Output>> funds;
    Amount have = 0;
    View tipv = chain_.tip_view();
    for (auto& pt : extra_funding)
        if (tipv.unspent(pt)) {
            funds.emplace_back(pt, *tipv.output(pt));
            have += tipv.output(pt)->value;
        }
    for (auto& c : funding_candidates()) {
        if (have >= need && !funds.empty()) break;
        if (std::any_of(funds.begin(), funds.end(), [&](auto& f) { return f.first == c.first; })) continue;
        funds.push_back(c);
        have += c.second.value;
    }
    if (have < need) throw Error(Errc::InsufficientLiquidity, "operator liquidity does not cover the commitment");

    Tx& tx = b.tx;
    for (auto& f : funds) tx.ins.push_back(f.first);
    b.funding_inputs = funds.size();
    for (auto& r : b.boardings) tx.ins.push_back(r.out);

    if (!leaves.empty()) {
        auto [batch, signers] = core::build_vtxt(leaves, params_.arity, keys_.pk, b.expiry, params_.path_cosign,
                                                 ff ? nonce_source() : core::NonceSource{});
        b.batch_vout = static_cast<std::uint32_t>(tx.outs.size());
        tx.outs.push_back({batch.value, batch.lock});
        b.batch = std::move(batch);
        b.signers = std::move(signers);
    }
    if (!forfeited.empty()) {
        b.connector = core::build_connector(static_cast<int>(forfeited.size()), keys_.pk, params_.arity, params_.epsilon);
        b.connector_vout = static_cast<std::uint32_t>(tx.outs.size());
        tx.outs.push_back({b.connector->value, b.connector->lock});
    }
    for (auto& e : b.exits) {
        b.exit_vouts.push_back(static_cast<std::uint32_t>(tx.outs.size()));
        for (auto& o : e.outs) tx.outs.push_back(o);
    }
    Amount change = have + boarded - tx.out_value();
    if (change > 0) tx.outs.push_back({change, script::key_lock(keys_.pk)});

    TxId id = tx.txid();
    if (b.batch) b.batch->vtxt.bind({id, b.batch_vout});
    if (b.connector) {
        b.connector->vtxt.bind({id, b.connector_vout});
        core::sign_connector(*b.connector, keys_.sk);
        auto anchors = b.connector->anchors();
        for (std::size_t i = 0; i < forfeited.size(); ++i) b.gamma[forfeited[i]] = anchors[i];
    }
    return b;
}

// ---- signing orchestration

void Operator::run_signing(CommitmentBundle& b)
{
    std::map<PartyId, Party*> involved;
    for (auto& [pk, p] : directory_) involved.emplace(p->id(), p);
    std::vector<Party*> parties;
    std::set<PartyId> ids = b.parties();
    for (auto& per : b.signers.per_node)
        for (auto& pk : per)
            if (auto* p = party_of(pk)) ids.insert(p->id());
    for (auto& id : ids) {
        auto it = involved.find(id);
        if (it == involved.end()) throw SessionAborted(kVerify, id, "party unreachable");
        parties.push_back(it->second);
    }

    // 1. every party verifies
    for (auto* p : parties)
        if (!p->verify_commitment(b)) throw SessionAborted(kVerify, p->id(), "bundle rejected");

    // 2. tree
    std::optional<core::Vtxt> tree;
    if (b.batch) {
        tree = b.batch->vtxt;
        for (std::size_t i = 0; i < tree->nodes.size(); ++i)
            sign_input(tree->nodes[i].tx, 0, tree->input_lock(i), core::kUnrollPath, kTree);
    }

    // 3. forfeits, each bound to its anchor
    std::map<OutPoint, Tx> forfeits;
    auto collect = [&](const PartyId& pid, const std::vector<OutPoint>& vtxos) {
        Party* p = involved.at(pid);
        for (auto& v : vtxos) {
            auto f = p->make_forfeit(b, v);
            if (!f) throw SessionAborted(kForfeit, pid, "forfeit withheld");
            const OutPoint& anchor = b.gamma.at(v);
            Output anchor_out = b.anchor_output(anchor);
            const VtxoInfo& info = book_.info.at(v);
            Tx want = core::forfeit_tx(v, info.out, anchor, anchor_out, keys_.pk);
            if (f->ins != want.ins || f->outs.size() != 1 || f->outs[0].value != want.outs[0].value ||
                !(f->outs[0].lock == want.outs[0].lock))
                throw SessionAborted(kForfeit, pid, "forfeit does not spend the vtxo and its anchor");
            try {
                sign_input(*f, 0, info.out.lock, core::kCollabPath, kForfeit);
            } catch (const SessionAborted& e) {
                throw SessionAborted(kForfeit, e.party() == "?" ? pid : e.party(), e.what());
            }
            sign_input(*f, 1, anchor_out.lock, 0, kForfeit);
            forfeits[v] = *f;
        }
    };
    for (auto& s : b.swaps) collect(s.party, s.vtxos);
    for (auto& e : b.exits) collect(e.party, e.vtxos);

    // 4. boarding inputs
    Tx signed_tx = b.tx;
    signed_tx.wits.assign(signed_tx.ins.size(), {});
    for (std::size_t j = 0; j < b.boardings.size(); ++j) {
        auto& r = b.boardings[j];
        std::uint32_t path = 0;
        while (path < r.output.lock.paths.size() && !r.output.lock.paths[path].requires_signer(keys_.pk)) ++path;
        try {
            sign_input(signed_tx, b.funding_inputs + j, r.output.lock, path, kBoarding);
        } catch (const SessionAborted& e) {
            throw SessionAborted(kBoarding, e.party() == "?" ? r.party : e.party(), e.what());
        }
    }

    // 5. operator funds, only with every forfeit in hand
    if (fail_step == kFunding) throw SessionAborted(kFunding, id_, "operator aborted");
    if (forfeits.size() != b.forfeited().size()) throw SessionAborted(kFunding, id_, "missing forfeits");
    View tipv = chain_.tip_view();
    for (std::size_t i = 0; i < b.funding_inputs; ++i) {
        const Output* o = tipv.output(signed_tx.ins[i]);
        if (!o) throw SessionAborted(kFunding, id_, "funding input vanished");
        core::sign_key_path(signed_tx, i, o->lock, keys_.sk);
    }

    b.tx = std::move(signed_tx);
    if (tree) b.batch->vtxt = std::move(*tree);
    b.forfeits = std::move(forfeits);
}

void Operator::remove_queued(std::uint64_t id)
{
    auto drop = [id](auto& q) { q.erase(std::remove_if(q.begin(), q.end(), [id](auto& r) { return r.id == id; }), q.end()); };
    drop(book_.toBoard);
    drop(book_.toBatchSwap);
    drop(book_.toExit);
}

void Operator::apply_submit_lists(const CommitmentBundle& b)
{
    TxId c = b.txid();
    auto& fresh = book_.unconfirmed[c];
    if (b.batch) {
        for (std::size_t l = 0; l < b.batch->vtxt.leaf_count(); ++l) {
            OutPoint v = b.batch->vtxt.leaf_outpoint(l);
            PartyId owner;
            auto& lo = b.leaves[l];
            if (lo.kind == RequestKind::Boarding) {
                for (auto& r : b.boardings)
                    if (r.id == lo.request) owner = r.party;
            } else {
                for (auto& r : b.swaps)
                    if (r.id == lo.request) owner = r.party;
            }
            book_.info[v] = VtxoInfo{b.batch->vtxt.leaf_output(l), b.expiry, 0, c, std::nullopt, owner};
            book_.replaced.erase(v);
            fresh.push_back(v);
        }
    }
    if (!b.handover) {
        auto& sp = book_.unconfirmedSpent[c];
        for (auto& v : b.forfeited()) {
            book_.origin[v] = book_.preConfirmed.count(v) ? Origin::PreConfirmed : Origin::Confirmed;
            book_.confirmedVTXO.erase(v);
            book_.preConfirmed.erase(v);
            sp.emplace_back(v, b.forfeits.at(v));
            note_cosign(v, b.forfeits.at(v).txid());
        }
    }
    book_.unconfirmedBoardings[c] = b.boardings;
    book_.unconfirmedBatchSwaps[c] = b.swaps;
    book_.unconfirmedExits[c] = b.exits;
    for (auto& r : b.boardings) remove_queued(r.id);
    for (auto& r : b.swaps) remove_queued(r.id);
    for (auto& r : b.exits) remove_queued(r.id);
}

void Operator::submit_and_track(const CommitmentBundle& b)
{
    auto res = chain_.submit(b.tx, id_);
    if (!res.accepted) throw Error(Errc::Rejected, std::string("commitment rejected: ") + reject_name(res.reason) + " " + res.detail);
    TxId c = b.txid();
    submitted_.insert(c);
    apply_submit_lists(b);
    PendingCommit pc;
    pc.bundle = b;
    pc.submitted = chain_.tip();
    commits_[c] = std::move(pc);
    commit_order_.push_back(c);
    extra_funding.clear();
    last_commit_ = chain_.tip();
    if (sink_) sink_->commitment(b);
    std::set<Party*> told;
    for (auto& [pk, p] : directory_) {
        auto ids = b.parties();
        bool cosigner = false;
        for (auto& per : b.signers.per_node)
            if (std::find(per.begin(), per.end(), pk) != per.end()) cosigner = true;
        if ((ids.count(p->id()) || cosigner) && told.insert(p).second) p->on_commitment(b);
    }
    log("commitment", {{"txid", c.hex()},
                       {"boardings", b.boardings.size()},
                       {"swaps", b.swaps.size()},
                       {"exits", b.exits.size()},
                       {"expiry", b.expiry}});
}

void Operator::drop_party(const PartyId& p)
{
    auto release = [this](const std::vector<OutPoint>& ins) {
        for (auto& v : ins) book_.preSpent.erase(v);
    };
    for (auto it = book_.toBoard.begin(); it != book_.toBoard.end();)
        if (it->party == p) {
            book_.preSpent.erase(it->out);
            it = book_.toBoard.erase(it);
        } else {
            ++it;
        }
    for (auto it = book_.toBatchSwap.begin(); it != book_.toBatchSwap.end();)
        if (it->party == p) {
            release(it->vtxos);
            it = book_.toBatchSwap.erase(it);
        } else {
            ++it;
        }
    for (auto it = book_.toExit.begin(); it != book_.toExit.end();)
        if (it->party == p) {
            release(it->vtxos);
            it = book_.toExit.erase(it);
        } else {
            ++it;
        }
}

std::optional<TxId> Operator::commit_round()
{
    if (!policy_.triggers(pending_requests(), chain_.tip() - last_commit_)) return std::nullopt;
    std::size_t attempts = pending_requests() + 1;
    for (std::size_t a = 0; a < attempts; ++a) {
        std::optional<CommitmentBundle> b;
        try {
            b = assemble_commitment();
        } catch (const Error& e) {
            if (e.code() != Errc::InsufficientLiquidity) throw;
            log("liquidity", {{"error", e.what()}});
            return std::nullopt;
        }
        if (!b) return std::nullopt;
        try {
            run_signing(*b);
        } catch (const SessionAborted& e) {
            log("abort", {{"step", e.step()}, {"party", e.party()}});
            if (e.party() == id_ || e.party() == "?") return std::nullopt;
            drop_party(e.party());
            continue;
        }
        submit_and_track(*b);
        return b->txid();
    }
    return std::nullopt;
}

// ---- confirmation tracking

void Operator::confirm(PendingCommit& pc)
{
    const CommitmentBundle& b = pc.bundle;
    TxId c = b.txid();
    pc.status = PendingCommit::Status::Confirmed;
    for (auto& v : book_.unconfirmed[c]) book_.confirmedVTXO.insert(v);
    book_.unconfirmed.erase(c);
    for (auto& [v, f] : book_.unconfirmedSpent[c]) {
        book_.spent[v] = f;
        book_.origin.erase(v);
        book_.preSpent.erase(v);
    }
    book_.unconfirmedSpent.erase(c);
    if (b.batch && !pc.foreign) book_.confirmedBatches[{c, b.batch_vout}] = b.expiry;
    for (auto& r : b.boardings) {
        book_.preSpent.erase(r.out);
        fees_ += request_fee_[r.id];
    }
    for (auto& r : b.swaps) fees_ += pc.foreign ? 0 : request_fee_[r.id];
    for (auto& r : b.exits) fees_ += request_fee_[r.id];
    book_.confirmedBoardings[c] = std::move(book_.unconfirmedBoardings[c]);
    book_.confirmedBatchSwaps[c] = std::move(book_.unconfirmedBatchSwaps[c]);
    book_.confirmedExits[c] = std::move(book_.unconfirmedExits[c]);
    book_.unconfirmedBoardings.erase(c);
    book_.unconfirmedBatchSwaps.erase(c);
    book_.unconfirmedExits.erase(c);
    for (auto& t : pc.on_confirm) submit(t, "on_confirm");
    log("confirmed", {{"txid", c.hex()}});
}

void Operator::rollback(PendingCommit& pc, bool requeue)
{
    const CommitmentBundle& b = pc.bundle;
    TxId c = b.txid();
    for (auto& v : book_.unconfirmed[c]) book_.replaced.insert(v);
    book_.unconfirmed.erase(c);
    for (auto& [v, f] : book_.unconfirmedSpent[c]) {
        if (book_.origin[v] == Origin::Confirmed)
            book_.confirmedVTXO.insert(v);
        else
            book_.preConfirmed.insert(v);
        book_.origin.erase(v);
        if (!requeue || pc.foreign) book_.preSpent.erase(v);
        cosigned_[v].erase(f.txid());
    }
    book_.unconfirmedSpent.erase(c);
    book_.unconfirmedBoardings.erase(c);
    book_.unconfirmedBatchSwaps.erase(c);
    book_.unconfirmedExits.erase(c);
    if (!pc.foreign) {
        if (requeue) {
            for (auto it = b.exits.rbegin(); it != b.exits.rend(); ++it) book_.toExit.push_front(*it);
            for (auto it = b.swaps.rbegin(); it != b.swaps.rend(); ++it) book_.toBatchSwap.push_front(*it);
            for (auto it = b.boardings.rbegin(); it != b.boardings.rend(); ++it) book_.toBoard.push_front(*it);
            View tipv = chain_.tip_view();
            for (std::size_t i = 0; i < b.funding_inputs; ++i)
                if (tipv.unspent(b.tx.ins[i])) extra_funding.push_back(b.tx.ins[i]);
        } else {
            for (auto& r : b.boardings) book_.preSpent.erase(r.out);
        }
    }
    log("rollback", {{"txid", c.hex()}, {"requeue", requeue}});
}

void Operator::track()
{
    View st = chain_.stable_view();
    View tipv = chain_.tip_view();
    Height tip = chain_.tip();
    using S = PendingCommit::Status;
    for (auto& c : commit_order_) {
        auto& pc = commits_.at(c);
        if (pc.status == S::Pending) {
            if (st.contains(c)) {
                confirm(pc);
                continue;
            }
            bool dead = false;
            if (!tipv.contains(c))
                for (auto& in : pc.bundle.tx.ins) {
                    auto sp = tipv.spender(in);
                    if (sp && *sp != c) dead = true;
                }
            if (dead) {
                pc.status = S::Dead;
                rollback(pc, true);
            } else if (tip >= pc.submitted + params_.t_r && !tipv.contains(c)) {
                pc.status = S::RolledBack;
                rollback(pc, true);
            }
        } else if ((pc.status == S::RolledBack) && st.contains(c)) {
            // a rolled-back commitment made it after all: undo the requeue
            std::set<std::uint64_t> ids;
            for (auto& r : pc.bundle.boardings) ids.insert(r.id);
            for (auto& r : pc.bundle.swaps) ids.insert(r.id);
            for (auto& r : pc.bundle.exits) ids.insert(r.id);
            for (auto& other : commit_order_) {
                auto& o = commits_.at(other);
                if (o.status != S::Pending || other == c) continue;
                bool shares = false;
                for (auto& r : o.bundle.boardings) shares |= ids.count(r.id) > 0;
                for (auto& r : o.bundle.swaps) shares |= ids.count(r.id) > 0;
                for (auto& r : o.bundle.exits) shares |= ids.count(r.id) > 0;
                if (shares) {
                    o.status = S::Dead;
                    rollback(o, true);
                }
            }
            for (auto id : ids) remove_queued(id);
            for (auto& v : pc.bundle.forfeited()) {
                book_.confirmedVTXO.erase(v);
                book_.preConfirmed.erase(v);
            }
            apply_submit_lists(pc.bundle);
            confirm(pc);
        }
    }
    // expiry
    for (auto* set : {&book_.confirmedVTXO, &book_.preConfirmed})
        for (auto it = set->begin(); it != set->end();) {
            if (book_.info.at(*it).expiry <= tip) {
                book_.expired.insert(*it);
                book_.preSpent.erase(*it);
                it = set->erase(it);
            } else {
                ++it;
            }
        }
}

// ---- sweeping and reactions

std::optional<std::pair<std::uint32_t, Height>> Operator::sweep_path_of(const LockScript& lock) const
{
    for (std::uint32_t i = 0; i < lock.paths.size(); ++i) {
        auto& p = lock.paths[i];
        if (p.kind == Kind::And && p.children.size() == 2 && p.children[0] == Predicate::check_sig(keys_.pk) &&
            p.children[1].kind == Kind::AbsTimelock)
            return std::make_pair(i, p.children[1].blocks);
    }
    return std::nullopt;
}

void Operator::sweep(const OutPoint& out)
{
    const OutputRecord* r = chain_.record(out);
    if (!r) return;
    if (!r->spent_by) {
        auto sp = sweep_path_of(r->out.lock);
        if (!sp || chain_.tip() + 1 < sp->second) {
            sweep_targets_.insert(out);
            return;
        }
        Tx s = core::sweep_tx(out, r->out, keys_.pk);
        core::sign_single(s, 0, r->out.lock, sp->first, keys_.sk);
        submit(s, "sweep");
        sweep_targets_.insert(out);
        return;
    }
    sweep_targets_.erase(out);
    if (submitted_.count(*r->spent_by)) return;   // ours
    const Tx* child = chain_.find_tx(*r->spent_by);
    if (!child) return;
    TxId cid = *r->spent_by;
    for (std::uint32_t j = 0; j < child->outs.size(); ++j)
        if (sweep_path_of(child->outs[j].lock)) sweep({cid, j});
}

const CommitmentBundle* Operator::bundle_with_forfeit(const OutPoint& v) const
{
    for (auto& c : commit_order_) {
        auto& pc = commits_.at(c);
        if (pc.bundle.forfeits.count(v) && (pc.status == PendingCommit::Status::Confirmed)) return &pc.bundle;
    }
    return nullptr;
}

std::vector<Tx> Operator::vtxo_path(const OutPoint& v) const
{
    auto it = book_.info.find(v);
    if (it == book_.info.end()) return {};
    if (it->second.commitment) {
        auto ct = commits_.find(*it->second.commitment);
        if (ct == commits_.end() || !ct->second.bundle.batch) return {};
        return core::path(ct->second.bundle.batch->vtxt, v);
    }
    if (it->second.ark) {
        auto& a = arks_.at(*it->second.ark);
        std::vector<Tx> out;
        for (std::size_t i = 0; i < a.ark.ins.size(); ++i) {
            OutPoint in = a.resets.empty() ? a.ark.ins[i] : a.resets[i].ins[0];
            auto p = vtxo_path(in);
            out.insert(out.end(), p.begin(), p.end());
        }
        out.insert(out.end(), a.resets.begin(), a.resets.end());
        out.push_back(a.ark);
        return out;
    }
    return {};
}

std::vector<Tx> Operator::watch_step()
{
    std::size_t before = submitted_.size();
    std::vector<Tx> posted;
    auto post = [&](const Tx& t, const std::string& why) {
        if (chain_.tip_view().contains(t.txid())) return true;
        auto r = chain_.submit(t, id_);
        if (r.accepted) {
            if (r.reason != Reject::Duplicate) {
                posted.push_back(t);
                log("submit", {{"tx", t.txid().hex()}, {"why", why}});
            }
            submitted_.insert(t.txid());
            return true;
        }
        log("submit_failed", {{"tx", t.txid().hex()}, {"why", why}, {"reason", reject_name(r.reason)}});
        return false;
    };
    (void)before;

    Height tip = chain_.tip();
    // a partly unrolled batch still has sweepable subtrees; sweep() walks them
    for (auto& [b, T] : book_.confirmedBatches)
        if (tip + 1 >= T && expired_batches_.insert(b).second) sweep_targets_.insert(b);
    std::vector<OutPoint> targets(sweep_targets_.begin(), sweep_targets_.end());
    std::size_t mark = events_.size();
    for (auto& t : targets) sweep(t);
    for (std::size_t i = mark; i < events_.size(); ++i)
        if (events_[i].type == "submit") {
            auto id = TxId::from_hex(events_[i].data["tx"].get<std::string>());
            for (auto& e : chain_.mempool())
                if (e.second.id == id) posted.push_back(e.second.tx);
        }

    if (!react) return posted;
    View tipv = chain_.tip_view();
    for (auto& [v, tx] : book_.spent) {
        if (!tipv.unspent(v)) continue;
        TxId id = tx.txid();
        if (reacted_.count(id) || tipv.contains(id)) continue;
        bool ok = true;
        if (auto* b = bundle_with_forfeit(v); b && b->forfeits.at(v).txid() == id) {
            for (auto& t : b->anchor_path(b->gamma.at(v))) ok = ok && post(t, "connector");
            ok = ok && post(tx, "forfeit");
        } else if (tx.ins.size() == 1 && tx.ins[0] == v) {
            ok = post(tx, "reset");
            if (ok) sweep_targets_.insert({id, 0});
        } else {
            // no resets: the ark tx needs every other input onchain first
            for (auto& in : tx.ins) {
                if (in == v || tipv.unspent(in)) continue;
                for (auto& t : vtxo_path(in)) ok = ok && post(t, "unroll");
            }
            ok = ok && post(tx, "ark");
        }
        if (ok) reacted_.insert(id);
    }
    return posted;
}

void Operator::step()
{
    track();
    if (accepting) commit_round();
    watch_step();
}

Amount Operator::balance(const View& v) const
{
    Amount s = 0;
    for (auto& [pt, o] : v.utxos())
        if (core::operator_owned(o.lock, keys_.pk)) s += o.value;
    return s;
}

std::optional<std::pair<OutPoint, Output>> Operator::lock_funds(Amount value, const LockScript& lock)
{
    Tx tx;
    Amount have = 0;
    std::vector<Output> spent;
    for (auto& c : funding_candidates()) {
        if (have >= value) break;
        tx.ins.push_back(c.first);
        spent.push_back(c.second);
        have += c.second.value;
    }
    if (have < value || value <= 0) return std::nullopt;
    tx.outs.push_back({value, lock});
    if (have > value) tx.outs.push_back({have - value, script::key_lock(keys_.pk)});
    for (std::size_t i = 0; i < spent.size(); ++i) core::sign_key_path(tx, i, spent[i].lock, keys_.sk);
    auto r = chain_.submit(tx, id_);
    if (!r.accepted) return std::nullopt;
    submitted_.insert(tx.txid());
    log("lock_funds", {{"tx", tx.txid().hex()}, {"value", value}});
    return std::make_pair(OutPoint{tx.txid(), 0}, tx.outs[0]);
}

void Operator::track_handover(const CommitmentBundle& b)
{
    TxId c = b.txid();
    auto& sp = book_.unconfirmedSpent[c];
    for (auto& v : b.forfeited()) {
        book_.origin[v] = book_.preConfirmed.count(v) ? Origin::PreConfirmed : Origin::Confirmed;
        book_.confirmedVTXO.erase(v);
        book_.preConfirmed.erase(v);
        sp.emplace_back(v, b.forfeits.at(v));
        note_cosign(v, b.forfeits.at(v).txid());
    }
    PendingCommit pc;
    pc.bundle = b;
    pc.submitted = chain_.tip();
    pc.foreign = true;
    commits_[c] = std::move(pc);
    commit_order_.push_back(c);
    log("handover_tracked", {{"txid", c.hex()}});
}

// ---- handover

HandoverResult handover_swap(Operator& o1, Operator& o2, Party& user,
                             const std::vector<std::pair<OutPoint, Output>>& vtxos,
                             const std::vector<Output>& new_vtxos)
{
    if (vtxos.empty() || new_vtxos.empty()) throw Error(Errc::InvalidArgument, "nothing to hand over");
    Amount v = 0;
    std::vector<OutPoint> olds;
    for (auto& [pt, o] : vtxos) {
        if (!o1.book_.confirmedVTXO.count(pt) && !o1.book_.preConfirmed.count(pt))
            throw Error(Errc::UnknownVtxo, "vtxo " + pt.str() + " not live at the old operator");
        if (o1.book_.preSpent.count(pt)) throw Error(Errc::AlreadyPending, "vtxo already pending");
        v += o.value;
        olds.push_back(pt);
    }
    if (sum_values(new_vtxos) > v) throw Error(Errc::ValueExceeded, "new vtxos exceed the handed-over value");
    for (auto& o : new_vtxos) o2.check_vtxo_output(o);
    const Params& p2 = o2.params_;
    Amount eps = p2.epsilon;

    // owner key: the unilateral path's signer
    PublicKey owner = new_vtxos[0].lock.paths.at(core::kUnilateralPath).children.at(0).pk;

    CommitmentBundle b;
    b.handover = true;
    b.h_O = o2.chain_.tip();
    b.expiry = b.h_O + 2 * p2.k + p2.t_e;
    SwapRequest req{0, user.id(), {owner}, olds, new_vtxos};
    b.swaps.push_back(req);
    std::vector<core::Leaf> leaves;
    for (std::size_t j = 0; j < new_vtxos.size(); ++j) {
        leaves.push_back({new_vtxos[j], {owner}});
        b.leaves.push_back({RequestKind::BatchSwap, 0, j});
    }
    auto [batch, signers] = core::build_vtxt(leaves, p2.arity, o2.pk(), b.expiry, p2.path_cosign);
    auto connector = core::build_connector(static_cast<int>(olds.size()), o1.pk(), p2.arity, eps);
    Output reimb_anchor{eps, core::connector_lock(o2.pk())};
    Amount need = batch.value + connector.value + reimb_anchor.value;

    std::vector<std::pair<OutPoint, Output>> funds;
    Amount have = 0;
    for (auto& c : o2.funding_candidates()) {
        if (have >= need) break;
        funds.push_back(c);
        have += c.second.value;
    }
    if (have < need) throw Error(Errc::InsufficientLiquidity, "new operator lacks liquidity");
    Tx& tx = b.tx;
    for (auto& f : funds) tx.ins.push_back(f.first);
    b.funding_inputs = funds.size();
    b.batch_vout = 0;
    tx.outs.push_back({batch.value, batch.lock});
    b.connector_vout = 1;
    tx.outs.push_back({connector.value, connector.lock});
    std::uint32_t reimb_vout = 2;
    tx.outs.push_back(reimb_anchor);
    if (have > need) tx.outs.push_back({have - need, script::key_lock(o2.pk())});
    TxId id = tx.txid();
    batch.vtxt.bind({id, b.batch_vout});
    connector.vtxt.bind({id, b.connector_vout});
    b.batch = std::move(batch);
    b.signers = std::move(signers);
    b.connector = std::move(connector);
    for (std::size_t i = 0; i < b.connector->vtxt.nodes.size(); ++i)
        o1.sign_input(b.connector->vtxt.nodes[i].tx, 0, b.connector->vtxt.input_lock(i), 0, kForfeit);
    auto anchors = b.connector->anchors();
    for (std::size_t i = 0; i < olds.size(); ++i) b.gamma[olds[i]] = anchors[i];

    // same order as a normal round
    if (!user.verify_commitment(b)) throw SessionAborted(kVerify, user.id(), "bundle rejected");
    core::Vtxt tree = b.batch->vtxt;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        o2.sign_input(tree.nodes[i].tx, 0, tree.input_lock(i), core::kUnrollPath, kTree);
    std::map<OutPoint, Tx> forfeits;
    for (auto& [pt, o] : vtxos) {
        auto f = user.make_forfeit(b, pt);
        if (!f) throw SessionAborted(kForfeit, user.id(), "forfeit withheld");
        Output anchor_out = b.anchor_output(b.gamma.at(pt));
        Tx want = core::forfeit_tx(pt, o, b.gamma.at(pt), anchor_out, o1.pk());
        if (f->ins != want.ins || f->outs.size() != 1 || !(f->outs[0].lock == want.outs[0].lock))
            throw SessionAborted(kForfeit, user.id(), "malformed forfeit");
        o1.sign_input(*f, 0, o.lock, core::kCollabPath, kForfeit);
        o1.sign_input(*f, 1, anchor_out.lock, 0, kForfeit);
        forfeits[pt] = *f;
    }
    // tx_{1->2}: O1 pays v to O2, spendable only through O2's anchor
    auto o1_funds = o1.funding_candidates();
    auto pick = std::find_if(o1_funds.begin(), o1_funds.end(), [&](auto& c) { return c.second.value >= v; });
    if (pick == o1_funds.end()) throw SessionAborted(kFunding, o1.id(), "old operator lacks funds");
    Tx reimb;
    reimb.ins = {pick->first, OutPoint{id, reimb_vout}};
    reimb.outs = {{v + eps, script::key_lock(o2.pk())}};
    if (pick->second.value > v) reimb.outs.push_back({pick->second.value - v, script::key_lock(o1.pk())});
    core::sign_key_path(reimb, 0, pick->second.lock, o1.keys_.sk);
    o2.sign_input(reimb, 1, reimb_anchor.lock, 0, kFunding);
    o1.reserved.insert(pick->first);

    Tx signed_tx = b.tx;
    signed_tx.wits.assign(signed_tx.ins.size(), {});
    for (std::size_t i = 0; i < funds.size(); ++i) core::sign_key_path(signed_tx, i, funds[i].second.lock, o2.keys_.sk);
    b.tx = std::move(signed_tx);
    b.batch->vtxt = std::move(tree);
    b.forfeits = forfeits;

    o2.submit_and_track(b);
    o2.commits_.at(id).on_confirm.push_back(reimb);
    o1.track_handover(b);
    o1.log("handover", {{"commitment", id.hex()}, {"value", v}});
    return {id, reimb, forfeits, b};
}

io::json to_json(const CommitmentBundle& b)
{
    io::json j;
    j["h_O"] = b.h_O;
    j["expiry"] = b.expiry;
    j["tx"] = io::to_json(b.tx);
    j["batch"] = b.batch ? core::vtxt_to_json(b.batch->vtxt) : io::json(nullptr);
    j["connector"] = b.connector ? core::vtxt_to_json(b.connector->vtxt) : io::json(nullptr);
    io::json g = io::json::object();
    for (auto& [v, a] : b.gamma) g[v.str()] = a.str();
    j["gamma"] = g;
    io::json f = io::json::object();
    for (auto& [v, t] : b.forfeits) f[v.str()] = io::to_json(t);
    j["forfeits"] = f;
    return j;
}

} // namespace ark::op
