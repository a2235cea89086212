#include "ark/script.hpp"

#include <algorithm>

namespace ark::script {

const char* kind_name(Kind k)
{
    switch (k) {
    case Kind::CheckSig: return "CheckSig";
    case Kind::CheckAggSig: return "CheckAggSig";
    case Kind::AbsTimelock: return "AbsTimelock";
    case Kind::RelTimelock: return "RelTimelock";
    case Kind::And: return "And";
    case Kind::NonceBound: return "NonceBound";
    case Kind::AlwaysTrue: return "AlwaysTrue";
    }
    return "?";
}

Predicate Predicate::check_sig(const PublicKey& pk)
{
    Predicate p;
    p.kind = Kind::CheckSig;
    p.pk = pk;
    return p;
}

Predicate Predicate::check_agg_sig(const AggregateKey& agg)
{
    Predicate p;
    p.kind = Kind::CheckAggSig;
    p.agg = agg;
    return p;
}

Predicate Predicate::abs_timelock(Height T)
{
    if (T < 0) throw Error(Errc::InvalidArgument, "negative timelock");
    Predicate p;
    p.kind = Kind::AbsTimelock;
    p.blocks = T;
    return p;
}

Predicate Predicate::rel_timelock(Height t)
{
    if (t < 0) throw Error(Errc::InvalidArgument, "negative timelock");
    Predicate p;
    p.kind = Kind::RelTimelock;
    p.blocks = t;
    return p;
}

Predicate Predicate::all(std::vector<Predicate> children)
{
    if (children.empty()) throw Error(Errc::InvalidArgument, "empty conjunction");
    Predicate p;
    p.kind = Kind::And;
    p.children = std::move(children);
    return p;
}

Predicate Predicate::nonce_bound(const PublicKey& pk, const Point& r_star)
{
    Predicate p;
    p.kind = Kind::NonceBound;
    p.pk = pk;
    p.r_star = r_star;
    return p;
}

Predicate Predicate::always_true() { return Predicate{}; }

std::size_t Predicate::signature_slots() const
{
    switch (kind) {
    case Kind::CheckSig:
    case Kind::CheckAggSig:
    case Kind::NonceBound: return 1;
    case Kind::And: {
        std::size_t n = 0;
        for (auto& c : children) n += c.signature_slots();
        return n;
    }
    default: return 0;
    }
}

bool Predicate::requires_signer(const PublicKey& who) const
{
    switch (kind) {
    case Kind::CheckSig:
    case Kind::NonceBound: return pk == who;
    case Kind::CheckAggSig: return agg.contains(who);
    case Kind::And:
        return std::any_of(children.begin(), children.end(),
                           [&](const Predicate& c) { return c.requires_signer(who); });
    default: return false;
    }
}

Height Predicate::rel_delay() const
{
    if (kind == Kind::RelTimelock) return blocks;
    Height d = 0;
    if (kind == Kind::And)
        for (auto& c : children) d = std::max(d, c.rel_delay());
    return d;
}

Height Predicate::abs_height() const
{
    if (kind == Kind::AbsTimelock) return blocks;
    Height d = 0;
    if (kind == Kind::And)
        for (auto& c : children) d = std::max(d, c.abs_height());
    return d;
}

bool Predicate::has_nonce_bound(const PublicKey& who) const
{
    if (kind == Kind::NonceBound) return pk == who;
    if (kind == Kind::And)
        return std::any_of(children.begin(), children.end(),
                           [&](const Predicate& c) { return c.has_nonce_bound(who); });
    return false;
}

// ---- commitment

static void encode(Bytes& out, const Predicate& p)
{
    put_u8(out, static_cast<std::uint8_t>(p.kind));
    switch (p.kind) {
    case Kind::CheckSig: put_bytes(out, p.pk.b); break;
    case Kind::CheckAggSig:
        put_bytes(out, p.agg.point.b);
        put_u32(out, static_cast<std::uint32_t>(p.agg.members.size()));
        for (auto& m : p.agg.members) put_bytes(out, m.b);
        break;
    case Kind::AbsTimelock:
    case Kind::RelTimelock: put_i64(out, p.blocks); break;
    case Kind::And:
        put_u32(out, static_cast<std::uint32_t>(p.children.size()));
        for (auto& c : p.children) encode(out, c);
        break;
    case Kind::NonceBound:
        put_bytes(out, p.pk.b);
        put_bytes(out, p.r_star.b);
        break;
    case Kind::AlwaysTrue: break;
    }
}

Hash256 commit(const std::optional<PublicKey>& internal, const std::vector<Predicate>& paths)
{
    Bytes buf;
    if (internal) {
        put_u8(buf, 1);
        put_bytes(buf, internal->b);
    } else {
        put_u8(buf, 0);
    }
    put_u32(buf, static_cast<std::uint32_t>(paths.size()));
    for (auto& p : paths) encode(buf, p);
    return crypto::tagged_hash("ark/taproot", buf);
}

LockScript taproot(std::optional<PublicKey> internal, std::vector<Predicate> paths)
{
    if (!internal && paths.empty())
        throw Error(Errc::InvalidArgument, "unspendable key path needs at least one script path");
    LockScript l;
    l.internal_key = internal;
    l.paths = std::move(paths);
    l.commitment = commit(l.internal_key, l.paths);
    return l;
}

LockScript key_lock(const PublicKey& pk) { return taproot(pk, {}); }

LockScript burn_lock()
{
    LockScript l;
    l.burn = true;
    l.commitment = crypto::tagged_hash("ark/burn", {});
    return l;
}

Witness key_path_witness(const LockScript& lock, const Signature& sig)
{
    if (!lock.internal_key) throw Error(Errc::InvalidArgument, "lock has no key path");
    Witness w;
    w.sigs = {sig};
    w.revealed_internal = lock.internal_key;
    w.revealed_paths = lock.paths;
    return w;
}

Witness script_path_witness(const LockScript& lock, std::uint32_t path, std::vector<Signature> sigs)
{
    if (path >= lock.paths.size()) throw Error(Errc::InvalidArgument, "no such script path");
    Witness w;
    w.path = path;
    w.sigs = std::move(sigs);
    w.revealed_internal = lock.internal_key;
    w.revealed_paths = lock.paths;
    return w;
}

// ---- evaluation

bool reveal_matches(const LockScript& lock, const Witness& wit)
{
    if (lock.burn) return false;
    if (commit(wit.revealed_internal, wit.revealed_paths) != lock.commitment) return false;
    if (wit.path) return *wit.path < wit.revealed_paths.size();
    return wit.revealed_internal.has_value();
}

const Predicate* chosen_path(const Witness& wit)
{
    if (!wit.path || *wit.path >= wit.revealed_paths.size()) return nullptr;
    return &wit.revealed_paths[*wit.path];
}

static bool check_sigs(const Predicate& p, const std::vector<Signature>& sigs, std::size_t& next,
                       ByteView digest)
{
    switch (p.kind) {
    case Kind::CheckSig:
        if (next >= sigs.size()) return false;
        return crypto::verify(p.pk, digest, sigs[next++]);
    case Kind::CheckAggSig:
        if (next >= sigs.size()) return false;
        return crypto::verify(p.agg.point, digest, sigs[next++]);
    case Kind::NonceBound: {
        if (next >= sigs.size()) return false;
        const Signature& s = sigs[next++];
        return s.R == p.r_star && crypto::verify(p.pk, digest, s);
    }
    case Kind::And:
        for (auto& c : p.children)
            if (!check_sigs(c, sigs, next, digest)) return false;
        return true;
    default: return true;
    }
}

bool signatures_valid(const Witness& wit, ByteView digest)
{
    if (!wit.path) {
        if (!wit.revealed_internal || wit.sigs.size() != 1) return false;
        return crypto::verify(*wit.revealed_internal, digest, wit.sigs[0]);
    }
    const Predicate* p = chosen_path(wit);
    if (!p || wit.sigs.size() != p->signature_slots()) return false;
    std::size_t next = 0;
    return check_sigs(*p, wit.sigs, next, digest);
}

static bool check_locks(const Predicate& p, Height chain_height, Height confirm_height)
{
    switch (p.kind) {
    case Kind::AbsTimelock: return chain_height >= p.blocks;
    case Kind::RelTimelock: return chain_height >= confirm_height + p.blocks;
    case Kind::And:
        return std::all_of(p.children.begin(), p.children.end(), [&](const Predicate& c) {
            return check_locks(c, chain_height, confirm_height);
        });
    default: return true;
    }
}

bool timelocks_satisfied(const Witness& wit, Height chain_height, Height input_confirm_height)
{
    if (!wit.path) return true;
    const Predicate* p = chosen_path(wit);
    return p && check_locks(*p, chain_height, input_confirm_height);
}

bool evaluate(const LockScript& lock, const Witness& wit, const SpendContext& ctx)
{
    if (ctx.input_confirm_height > ctx.chain_height) return false;
    return reveal_matches(lock, wit) && signatures_valid(wit, ctx.tx_digest) &&
           timelocks_satisfied(wit, ctx.chain_height, ctx.input_confirm_height);
}

static bool find_nonce_sig(const Predicate& p, const std::vector<Signature>& sigs, std::size_t& next,
                           const PublicKey& pk, std::optional<Signature>& out)
{
    switch (p.kind) {
    case Kind::CheckSig:
    case Kind::CheckAggSig: ++next; return false;
    case Kind::NonceBound:
        if (p.pk == pk && next < sigs.size()) {
            out = sigs[next];
            return true;
        }
        ++next;
        return false;
    case Kind::And:
        for (auto& c : p.children)
            if (find_nonce_sig(c, sigs, next, pk, out)) return true;
        return false;
    default: return false;
    }
}

std::optional<Signature> nonce_bound_signature(const Witness& wit, const PublicKey& pk)
{
    const Predicate* p = chosen_path(wit);
    if (!p) return std::nullopt;
    std::optional<Signature> out;
    std::size_t next = 0;
    find_nonce_sig(*p, wit.sigs, next, pk, out);
    return out;
}

} // namespace ark::script
