#include "ark/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <mutex>

namespace ark::crypto {

namespace {

void ensure_init()
{
    static const bool ok = [] { return sodium_init() >= 0; }();
    if (!ok) throw Error(Errc::InvalidArgument, "libsodium initialisation failed");
}

std::array<std::uint8_t, 64> sha512_parts(std::initializer_list<ByteView> parts)
{
    crypto_hash_sha512_state st;
    crypto_hash_sha512_init(&st);
    for (auto p : parts) crypto_hash_sha512_update(&st, p.data(), p.size());
    std::array<std::uint8_t, 64> out{};
    crypto_hash_sha512_final(&st, out.data());
    return out;
}

ByteView bv(std::string_view s) { return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}; }
template <std::size_t N>
ByteView bv(const std::array<std::uint8_t, N>& a) { return {a.data(), N}; }

} // namespace

Hash256 sha256(ByteView data)
{
    ensure_init();
    Hash256 h;
    crypto_hash_sha256(h.b.data(), data.data(), data.size());
    return h;
}

Hash256 tagged_hash(std::string_view tag, ByteView data)
{
    ensure_init();
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    Bytes prefix;
    put_str(prefix, tag);
    crypto_hash_sha256_update(&st, prefix.data(), prefix.size());
    crypto_hash_sha256_update(&st, data.data(), data.size());
    Hash256 h;
    crypto_hash_sha256_final(&st, h.b.data());
    return h;
}

// ---- scalars

Scalar Scalar::from_u64(std::uint64_t v)
{
    Scalar s;
    for (int i = 0; i < 8; ++i) s.b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return s;
}

Scalar Scalar::reduce(ByteView wide)
{
    ensure_init();
    if (wide.size() > 64) throw Error(Errc::InvalidArgument, "scalar input too wide");
    std::array<std::uint8_t, 64> buf{};
    std::copy(wide.begin(), wide.end(), buf.begin());
    Scalar s;
    crypto_core_ristretto255_scalar_reduce(s.b.data(), buf.data());
    return s;
}

Scalar Scalar::from_hash(const Hash256& h) { return reduce(bv(h.b)); }

bool Scalar::is_zero() const
{
    return std::all_of(b.begin(), b.end(), [](std::uint8_t c) { return c == 0; });
}

Scalar Scalar::from_hex(std::string_view s)
{
    Scalar out{array_from_hex<32>(s)};
    if (reduce(bv(out.b)) != out) throw Error(Errc::Parse, "scalar not reduced");
    return out;
}

Scalar Scalar::operator+(const Scalar& o) const
{
    Scalar r;
    crypto_core_ristretto255_scalar_add(r.b.data(), b.data(), o.b.data());
    return r;
}

Scalar Scalar::operator-(const Scalar& o) const
{
    Scalar r;
    crypto_core_ristretto255_scalar_sub(r.b.data(), b.data(), o.b.data());
    return r;
}

Scalar Scalar::operator*(const Scalar& o) const
{
    Scalar r;
    crypto_core_ristretto255_scalar_mul(r.b.data(), b.data(), o.b.data());
    return r;
}

Scalar Scalar::operator-() const
{
    Scalar r;
    crypto_core_ristretto255_scalar_negate(r.b.data(), b.data());
    return r;
}

Scalar Scalar::inverse() const
{
    Scalar r;
    if (is_zero() || crypto_core_ristretto255_scalar_invert(r.b.data(), b.data()) != 0)
        throw Error(Errc::ZeroScalar, "inverse of zero");
    return r;
}

// ---- points

const Point& Point::generator()
{
    static const Point g = mul_base(Scalar::from_u64(1));
    return g;
}

bool Point::valid() const
{
    ensure_init();
    return crypto_core_ristretto255_is_valid_point(b.data()) == 1;
}

Point Point::from_hex(std::string_view s)
{
    Point p{array_from_hex<32>(s)};
    if (!p.valid()) throw Error(Errc::InvalidPoint, "not a group element");
    return p;
}

Point Point::operator+(const Point& o) const
{
    Point r;
    if (crypto_core_ristretto255_add(r.b.data(), b.data(), o.b.data()) != 0)
        throw Error(Errc::InvalidPoint, "point addition on invalid encoding");
    return r;
}

Point Point::operator-(const Point& o) const
{
    Point r;
    if (crypto_core_ristretto255_sub(r.b.data(), b.data(), o.b.data()) != 0)
        throw Error(Errc::InvalidPoint, "point subtraction on invalid encoding");
    return r;
}

// The identity comes back as the all-zero encoding.
Point mul_base(const Scalar& s)
{
    ensure_init();
    Point r;
    if (crypto_scalarmult_ristretto255_base(r.b.data(), s.b.data()) != 0) r.b.fill(0);
    return r;
}

Point mul(const Scalar& s, const Point& p)
{
    ensure_init();
    Point r;
    if (crypto_scalarmult_ristretto255(r.b.data(), s.b.data(), p.b.data()) != 0) r.b.fill(0);
    return r;
}

static bool is_identity(const Point& p)
{
    return std::all_of(p.b.begin(), p.b.end(), [](std::uint8_t c) { return c == 0; });
}

// ---- keys and signatures

KeyPair keypair_from_secret(const SecretKey& sk)
{
    if (sk.is_zero()) throw Error(Errc::ZeroScalar, "secret key is zero");
    return {sk, mul_base(sk)};
}

KeyPair keygen(const std::array<std::uint8_t, 32>& seed)
{
    for (std::uint32_t ctr = 0;; ++ctr) {
        Bytes c;
        put_u32(c, ctr);
        auto wide = sha512_parts({bv("ark/keygen"), bv(seed), c});
        Scalar sk = Scalar::reduce(bv(wide));
        if (!sk.is_zero()) return keypair_from_secret(sk);
    }
}

KeyPair keygen_from_label(std::string_view label) { return keygen(sha256(bv(label)).b); }

Scalar challenge(const Point& R, const PublicKey& pk, ByteView m)
{
    Bytes buf;
    buf.reserve(64 + m.size());
    put_bytes(buf, bv(R.b));
    put_bytes(buf, bv(pk.b));
    put_bytes(buf, m);
    return Scalar::from_hash(sha256(buf));
}

Signature sign(const SecretKey& sk, ByteView m, const Nonce& nonce)
{
    if (m.empty()) throw Error(Errc::Precondition, "empty message");
    if (sk.is_zero()) throw Error(Errc::ZeroScalar, "secret key is zero");
    Scalar r;
    if (auto* f = std::get_if<Fixed>(&nonce)) {
        if (f->r.is_zero()) throw Error(Errc::ZeroScalar, "fixed nonce is zero");
        r = f->r;
    } else {
        for (std::uint32_t ctr = 0;; ++ctr) {
            Bytes c;
            put_u32(c, ctr);
            r = Scalar::reduce(bv(sha512_parts({bv("ark/nonce"), bv(sk.b), m, c})));
            if (!r.is_zero()) break;
        }
    }
    PublicKey pk = mul_base(sk);
    Point R = mul_base(r);
    Scalar e = challenge(R, pk, m);
    return {R, r + e * sk};
}

bool verify(const PublicKey& pk, ByteView m, const Signature& sig)
{
    if (!pk.valid() || is_identity(pk) || !sig.R.valid()) return false;
    if (Scalar::reduce(bv(sig.s.b)) != sig.s) return false;
    Scalar e = challenge(sig.R, pk, m);
    try {
        return mul_base(sig.s) - mul(e, pk) == sig.R;
    } catch (const Error&) {
        return false;
    }
}

Scalar derive_fixed_nonce(const SecretKey& sk, std::string_view label)
{
    for (std::uint32_t ctr = 0;; ++ctr) {
        Bytes c;
        put_u32(c, ctr);
        Scalar r = Scalar::reduce(bv(sha512_parts({bv("ark/fixed-nonce"), bv(sk.b), bv(label), c})));
        if (!r.is_zero()) return r;
    }
}

// ---- aggregation

bool AggregateKey::contains(const PublicKey& pk) const
{
    return std::binary_search(members.begin(), members.end(), pk);
}

static Hash256 member_list_hash(const std::vector<PublicKey>& sorted)
{
    Bytes buf;
    buf.reserve(32 * sorted.size());
    for (auto& pk : sorted) put_bytes(buf, bv(pk.b));
    return tagged_hash("ark/agg-list", buf);
}

static Scalar coefficient(const Hash256& list, const PublicKey& pk)
{
    Bytes buf;
    put_bytes(buf, bv(list.b));
    put_bytes(buf, bv(pk.b));
    return Scalar::from_hash(tagged_hash("ark/agg-coef", buf));
}

AggregateKey aggregate(std::vector<PublicKey> pks)
{
    if (pks.empty()) throw Error(Errc::EmptySet, "aggregate of empty set");
    std::sort(pks.begin(), pks.end());
    if (std::adjacent_find(pks.begin(), pks.end()) != pks.end())
        throw Error(Errc::DuplicateMember, "duplicate member in aggregate");
    Hash256 list = member_list_hash(pks);

    // Aggregates are recomputed by every verifier along a path, so memoise.
    // Only validated lists get in, so a hit skips the point checks too.
    static std::mutex mu;
    static std::map<Hash256, Point> memo;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(list);
        if (it != memo.end()) return {it->second, std::move(pks)};
    }
    for (auto& pk : pks)
        if (!pk.valid() || is_identity(pk)) throw Error(Errc::InvalidPoint, "invalid member key");
    Point acc = mul(coefficient(list, pks[0]), pks[0]);
    for (std::size_t i = 1; i < pks.size(); ++i) acc = acc + mul(coefficient(list, pks[i]), pks[i]);
    {
        std::lock_guard<std::mutex> lock(mu);
        memo.emplace(list, acc);
    }
    return {acc, std::move(pks)};
}

Scalar aggregation_coefficient(const AggregateKey& key, const PublicKey& member)
{
    if (!key.contains(member)) throw Error(Errc::InvalidArgument, "not a member");
    return coefficient(member_list_hash(key.members), member);
}

// ---- signing session

SigningSession::SigningSession(AggregateKey key, Bytes msg) : key_(std::move(key)), msg_(std::move(msg))
{
    if (msg_.empty()) throw Error(Errc::Precondition, "empty message");
    list_hash_ = member_list_hash(key_.members);
}

Scalar SigningSession::nonce_for(const SecretKey& sk) const
{
    Bytes ctx;
    put_bytes(ctx, bv(key_.point.b));
    put_bytes(ctx, bv(list_hash_.b));
    for (std::uint32_t ctr = 0;; ++ctr) {
        Bytes c;
        put_u32(c, ctr);
        Scalar r = Scalar::reduce(bv(sha512_parts({bv("ark/session-nonce"), bv(sk.b), ctx, msg_, c})));
        if (!r.is_zero()) return r;
    }
}

Point SigningSession::commit(const SecretKey& sk)
{
    PublicKey pk = mul_base(sk);
    if (!key_.contains(pk)) throw Error(Errc::InvalidArgument, "signer is not a session member");
    Point R = mul_base(nonce_for(sk));
    nonces_[pk] = R;
    R_.reset();
    return R;
}

Point SigningSession::aggregate_nonce() const
{
    if (R_) return *R_;
    Point R{};
    for (auto& [pk, Ri] : nonces_) R = R + Ri;
    R_ = R;
    return R;
}

void SigningSession::respond(const SecretKey& sk)
{
    if (!nonces_complete()) throw Error(Errc::Precondition, "round two before all nonces");
    PublicKey pk = mul_base(sk);
    if (!key_.contains(pk)) throw Error(Errc::InvalidArgument, "signer is not a session member");
    Scalar e = challenge(aggregate_nonce(), key_.point, msg_);
    Scalar a = coefficient(list_hash_, pk);
    partials_[pk] = nonce_for(sk) + e * a * sk;
}

std::vector<PublicKey> SigningSession::missing() const
{
    std::vector<PublicKey> out;
    for (auto& m : key_.members)
        if (!nonces_.count(m) || !partials_.count(m)) out.push_back(m);
    return out;
}

Signature SigningSession::finish() const
{
    if (!missing().empty()) throw SessionAborted(0, "?", "signer missing from session");
    Scalar s = Scalar::from_u64(0);
    for (auto& [pk, si] : partials_) s = s + si;
    Signature sig{aggregate_nonce(), s};
    if (!verify(key_.point, msg_, sig)) throw SessionAborted(0, "?", "invalid partial signature");
    return sig;
}

Signature cosign(ByteView digest, const AggregateKey& key, std::span<const SecretKey> signers)
{
    SigningSession session(key, Bytes(digest.begin(), digest.end()));
    std::vector<SecretKey> usable;
    for (auto& sk : signers) {
        if (sk.is_zero() || !key.contains(mul_base(sk))) continue;
        usable.push_back(sk);
    }
    for (auto& sk : usable) session.commit(sk);
    if (!session.nonces_complete()) throw SessionAborted(0, "?", "signer absent");
    for (auto& sk : usable) session.respond(sk);
    return session.finish();
}

Signature cosign(ByteView digest, std::span<const SecretKey> signers)
{
    std::vector<PublicKey> pks;
    for (auto& sk : signers) pks.push_back(keypair_from_secret(sk).pk);
    return cosign(digest, aggregate(std::move(pks)), signers);
}

SecretKey extract_secret(const PublicKey& pk, ByteView m1, const Signature& sig1, ByteView m2,
                         const Signature& sig2)
{
    if (std::equal(m1.begin(), m1.end(), m2.begin(), m2.end()))
        throw Error(Errc::Precondition, "messages must differ");
    if (sig1.R != sig2.R) throw Error(Errc::NotReused, "signatures use different nonces");
    if (!verify(pk, m1, sig1) || !verify(pk, m2, sig2))
        throw Error(Errc::InvalidSignature, "signature does not verify");
    Scalar e1 = challenge(sig1.R, pk, m1);
    Scalar e2 = challenge(sig2.R, pk, m2);
    Scalar de = e1 - e2;
    if (de.is_zero()) throw Error(Errc::HashCollision, "challenge collision");
    SecretKey sk = (sig1.s - sig2.s) * de.inverse();
    if (mul_base(sk) != pk) throw Error(Errc::InvalidSignature, "extracted key does not match");
    return sk;
}

} // namespace ark::crypto
