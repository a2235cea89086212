#pragma once

// Schnorr signatures over the ristretto255 prime-order group, n-of-n key
// aggregation and nonce-reuse key extraction.

#include "ark/common.hpp"

#include <compare>
#include <map>
#include <optional>
#include <variant>

namespace ark::crypto {

struct Hash256 {
    std::array<std::uint8_t, 32> b{};
    auto operator<=>(const Hash256&) const = default;
    std::string hex() const { return to_hex(b); }
    static Hash256 from_hex(std::string_view s) { return {array_from_hex<32>(s)}; }
};

Hash256 sha256(ByteView data);
Hash256 tagged_hash(std::string_view tag, ByteView data);

// Scalar mod q, little-endian canonical encoding.
struct Scalar {
    std::array<std::uint8_t, 32> b{};
    auto operator<=>(const Scalar&) const = default;

    static Scalar from_u64(std::uint64_t v);
    static Scalar reduce(ByteView wide);   // any length up to 64 bytes
    static Scalar from_hash(const Hash256& h);
    bool is_zero() const;
    std::string hex() const { return to_hex(b); }
    static Scalar from_hex(std::string_view s);

    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator-() const;
    Scalar inverse() const;   // throws ZeroScalar
};

// Group element in compressed (32-byte) encoding.
struct Point {
    std::array<std::uint8_t, 32> b{};
    auto operator<=>(const Point&) const = default;

    static const Point& generator();
    bool valid() const;
    std::string hex() const { return to_hex(b); }
    static Point from_hex(std::string_view s);

    Point operator+(const Point& o) const;   // throws InvalidPoint
    Point operator-(const Point& o) const;
};

// s·G
Point mul_base(const Scalar& s);
// s·P
Point mul(const Scalar& s, const Point& p);

using SecretKey = Scalar;
using PublicKey = Point;

struct KeyPair {
    SecretKey sk;
    PublicKey pk;
};

struct Signature {
    Point R;
    Scalar s;
    bool operator==(const Signature&) const = default;
};

struct Fresh {};
struct Fixed {
    Scalar r;
};
using Nonce = std::variant<Fresh, Fixed>;

KeyPair keygen(const std::array<std::uint8_t, 32>& seed);
KeyPair keygen_from_label(std::string_view label);   // seed = sha256(label)
KeyPair keypair_from_secret(const SecretKey& sk);     // throws ZeroScalar

// H(R || pk || m) mod q
Scalar challenge(const Point& R, const PublicKey& pk, ByteView m);

Signature sign(const SecretKey& sk, ByteView m, const Nonce& nonce = Fresh{});
bool verify(const PublicKey& pk, ByteView m, const Signature& sig);

// Fixed nonce derivation for NonceBound scripts: deterministic per (sk, label).
Scalar derive_fixed_nonce(const SecretKey& sk, std::string_view label);

struct AggregateKey {
    PublicKey point;
    std::vector<PublicKey> members;   // canonical (sorted) order
    bool operator==(const AggregateKey& o) const { return point == o.point && members == o.members; }
    bool contains(const PublicKey& pk) const;
};

// Canonically sorts members. Throws EmptySet / DuplicateMember.
AggregateKey aggregate(std::vector<PublicKey> pks);
Scalar aggregation_coefficient(const AggregateKey& key, const PublicKey& member);

// Two-round n-of-n signing session. Round one collects nonce points from every
// member, round two the partial scalars. finish() only yields a signature once
// every member has contributed to both rounds.
class SigningSession {
public:
    SigningSession(AggregateKey key, Bytes msg);

    const AggregateKey& key() const { return key_; }
    const Bytes& message() const { return msg_; }
    bool nonces_complete() const { return nonces_.size() == key_.members.size(); }

    // Round one. Returns the contributed nonce point.
    Point commit(const SecretKey& sk);
    // Round two; requires all nonces.
    void respond(const SecretKey& sk);

    std::vector<PublicKey> missing() const;
    Signature finish() const;   // throws SessionAborted (step 0, party "?")

private:
    Scalar nonce_for(const SecretKey& sk) const;
    Point aggregate_nonce() const;

    AggregateKey key_;
    Bytes msg_;
    Hash256 list_hash_;    // computed once: coefficients and nonces both need it
    mutable std::optional<Point> R_;   // aggregate nonce, cleared by commit()
    std::map<PublicKey, Point> nonces_;
    std::map<PublicKey, Scalar> partials_;
};

// Runs a complete session with the given secrets. Any member without a
// matching secret aborts the session.
Signature cosign(ByteView digest, const AggregateKey& key, std::span<const SecretKey> signers);
Signature cosign(ByteView digest, std::span<const SecretKey> signers);

// sk = (s1 - s2) / (H(R||pk||m1) - H(R||pk||m2))
SecretKey extract_secret(const PublicKey& pk, ByteView m1, const Signature& sig1, ByteView m2,
                         const Signature& sig2);

inline ByteView view(const Hash256& h) { return {h.b.data(), h.b.size()}; }

} // namespace ark::crypto
