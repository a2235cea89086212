#pragma once

// Taproot-style locks: an optional internal key plus an ordered list of
// script-path predicates, committed to by a single hash.

#include "ark/crypto.hpp"

#include <optional>

namespace ark::script {

using crypto::AggregateKey;
using crypto::Hash256;
using crypto::Point;
using crypto::PublicKey;
using crypto::Signature;

enum class Kind { CheckSig, CheckAggSig, AbsTimelock, RelTimelock, And, NonceBound, AlwaysTrue };

const char* kind_name(Kind k);

struct Predicate {
    Kind kind = Kind::AlwaysTrue;
    PublicKey pk{};            // CheckSig, NonceBound
    AggregateKey agg{};        // CheckAggSig
    Point r_star{};            // NonceBound
    Height blocks = 0;         // AbsTimelock, RelTimelock
    std::vector<Predicate> children;   // And

    bool operator==(const Predicate&) const = default;

    static Predicate check_sig(const PublicKey& pk);
    static Predicate check_agg_sig(const AggregateKey& agg);
    static Predicate abs_timelock(Height T);
    static Predicate rel_timelock(Height t);
    static Predicate all(std::vector<Predicate> children);
    static Predicate nonce_bound(const PublicKey& pk, const Point& r_star);
    static Predicate always_true();

    // Number of signatures a witness must supply, in depth-first order.
    std::size_t signature_slots() const;
    // True if satisfying the predicate needs a signature from pk.
    bool requires_signer(const PublicKey& pk) const;
    // Largest relative / absolute timelock on this path (0 if none).
    Height rel_delay() const;
    Height abs_height() const;
    bool has_nonce_bound(const PublicKey& pk) const;
};

struct LockScript {
    std::optional<PublicKey> internal_key;   // nullopt: key path disabled
    std::vector<Predicate> paths;
    bool burn = false;                        // provably unspendable
    Hash256 commitment{};

    bool operator==(const LockScript& o) const { return commitment == o.commitment; }
    bool key_only() const { return internal_key && paths.empty(); }
};

Hash256 commit(const std::optional<PublicKey>& internal, const std::vector<Predicate>& paths);

// Throws InvalidArgument when the key path is disabled and no path exists.
LockScript taproot(std::optional<PublicKey> internal, std::vector<Predicate> paths);
LockScript key_lock(const PublicKey& pk);   // taproot(pk; )
LockScript burn_lock();

struct Witness {
    std::optional<std::uint32_t> path;   // nullopt: key path
    std::vector<Signature> sigs;
    std::optional<PublicKey> revealed_internal;
    std::vector<Predicate> revealed_paths;

    bool operator==(const Witness&) const = default;
};

Witness key_path_witness(const LockScript& lock, const Signature& sig);
Witness script_path_witness(const LockScript& lock, std::uint32_t path, std::vector<Signature> sigs);

struct SpendContext {
    Height chain_height = 0;
    Height input_confirm_height = 0;
    Bytes tx_digest;
};

bool evaluate(const LockScript& lock, const Witness& wit, const SpendContext& ctx);

// The pieces of evaluate, used by the ledger which checks signatures once on
// submission and timelocks again on inclusion.
bool reveal_matches(const LockScript& lock, const Witness& wit);
bool signatures_valid(const Witness& wit, ByteView digest);
bool timelocks_satisfied(const Witness& wit, Height chain_height, Height input_confirm_height);
const Predicate* chosen_path(const Witness& wit);

// Signature of a given predicate kind inside a script-path witness, if any.
std::optional<Signature> nonce_bound_signature(const Witness& wit, const PublicKey& pk);

} // namespace ark::script
