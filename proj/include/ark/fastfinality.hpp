#pragma once

// Opt-in instant finality: operator collateral burnable by anyone who learns
// the operator key, gossip among the opted-in set, and conflict detection
// that turns two same-nonce operator signatures into that key.

#include "ark/wallet.hpp"

namespace ark::ff {

using crypto::PublicKey;
using crypto::SecretKey;

struct FfConfig {
    std::vector<PartyId> members;   // N^ff
    int delta = 1;                  // gossip bound in rounds
    Amount v = 0;                   // total opted-in value
    Amount c = 0;                   // collateral, must exceed v
    int committee = 3;
    Height t_p = 0;                 // O-alone reclaim height
    Height t_u = 25;                // vtxo unilateral delay, for lock checks
    int k = 6;
};

struct Collateral {
    OutPoint out;
    Output output;
    Height t_p = 0;
    Tx burn;                        // committee signature in place, operator slot open
    crypto::Signature committee_sig;
};

// [committee n-of-n and O → burn] or [O after t_p].
script::LockScript collateral_lock(const crypto::AggregateKey& committee, const PublicKey& op, Height t_p);

// Locks c from operator funds and has a throwaway committee presign the burn.
// Throws Config when c <= v.
Collateral setup_collateral(op::Operator& o, const FfConfig& cfg, const std::string& label);
// Completes the burn witness with an (extracted) operator key.
Tx complete_burn(const Collateral& col, const SecretKey& sk_op);
// O alone, valid from t_p on.
Tx reclaim_collateral(op::Operator& o, const Collateral& col);

// Operator key from two operator signatures over one NonceBound input spent by
// two different txs; nullopt if they do not share R or give the wrong key.
std::optional<SecretKey> extract_operator_key(const Tx& a, std::size_t ia, const Tx& b, std::size_t ib,
                                              const PublicKey& op);

enum class Phase { Waiting, Accepted, Rejected };
const char* phase_name(Phase p);

struct FfEvent {
    Height round = 0;
    std::uint64_t payment = 0;
    PartyId party;
    std::string phase;
    int conflicts = 0;
    int burns = 0;
};

struct Receipt {
    std::uint64_t payment = 0;
    PartyId from, to;
    wallet::Payment p;
    Height start = 0;
    Phase phase = Phase::Waiting;
    Amount value = 0;   // paid to the recipient
    std::string why;
};

// Protocol state of every opted-in member plus the message queue. Dishonest
// members never gossip and never check.
class Network {
public:
    Network(FfConfig cfg, const PublicKey& op, Ledger& chain, Collateral col);

    // Honest members check, gossip and punish; w (optional) stores accepted vtxos.
    void add_member(const PartyId& id, const PublicKey& pk, bool honest, wallet::Wallet* w = nullptr);
    // Gossip delay for (from, to, payment), clamped to [1, Δ]. Default Δ.
    std::function<int(const PartyId&, const PartyId&, std::uint64_t)> edge_delay;

    // Sender hands the payment to its recipient, who processes it in step(at).
    std::uint64_t send(const PartyId& from, const PartyId& to, const wallet::Payment& p, Height at);
    // Deliveries, checks, acceptance after 2Δ, conflict handling and burns.
    void step(Height now);

    const std::vector<Receipt>& receipts() const { return receipts_; }
    const std::vector<FfEvent>& events() const { return events_; }
    int conflicts() const { return conflicts_; }
    bool burned() const { return burned_; }
    std::optional<SecretKey> extracted() const { return extracted_; }
    // Sum over accepted, still-offchain ff vtxos of the member, more than 2k from expiry.
    Amount ff_balance(const PartyId& id) const;
    // Recipient submits the payment's history ahead of a t_u-delayed reclaim.
    std::size_t push_history(const PartyId& id, std::uint64_t payment);

private:
    struct Node {
        PartyId id;
        PublicKey pk;
        bool honest = true;
        wallet::Wallet* w = nullptr;
        std::map<OutPoint, Tx> spends;   // ark ledger: input -> spending tx
        bool conflict = false;
    };
    struct Msg {
        Height at;
        PartyId to;
        std::vector<Tx> txs;
        std::uint64_t payment;
        bool direct;
    };
    Node* node(const PartyId& id);
    std::string check_receipt(const Node& n, const Receipt& r) const;
    void learn(Node& n, const Tx& tx, Height now);
    void on_conflict(Node& n, const Tx& a, std::size_t ia, const Tx& b, std::size_t ib, Height now);
    void log(Height now, std::uint64_t pay, const PartyId& who, const std::string& phase);

    FfConfig cfg_;
    PublicKey op_;
    Ledger& chain_;
    Collateral col_;
    std::vector<Node> nodes_;
    std::vector<Msg> queue_;
    std::vector<Receipt> receipts_;
    std::vector<FfEvent> events_;
    std::optional<SecretKey> extracted_;
    int conflicts_ = 0;
    bool burned_ = false;
};

} // namespace ark::ff
