#pragma once

// User side: requests, commitment verification, forfeits, payments, exits
// and the refresh-or-exit deadline policy.

#include "ark/operator.hpp"

namespace ark::wallet {

using core::Params;
using crypto::KeyPair;
using crypto::Point;
using crypto::PublicKey;

enum class VState {
    Pending,        // leaf of a submitted, not yet stable commitment
    Live,           // leaf of a stable commitment
    PreConfirmed,   // ark output, not yet batch swapped
    Spent,          // spent offchain by an ark tx (through its reset)
    Forfeited,      // swapped or exited in a stable commitment
    Exiting,        // path submitted
    Claimed,        // owner took it onchain after t_u
    Lost,           // exit failed for good
};
const char* vstate_name(VState s);

struct VtxoRecord {
    OutPoint point;
    Output out;
    Height expiry = 0;
    std::vector<Tx> path;             // root-first; ark outputs carry the whole history
    std::optional<TxId> commitment;   // batch leaves
    int chain = 0;
    std::optional<Point> r_star;      // set for fast-finality locks
    VState state = VState::Pending;
    Height exit_height = -1;          // tip when the exit started
    bool swap_pending = false;
};

// What the sender hands the recipient: signed resets and ark tx, the full
// history of every input, and the batch expiry behind each input.
struct Payment {
    PartyId from;
    std::vector<Tx> resets;
    Tx ark;
    std::vector<Tx> path;   // ends with resets then ark
    std::vector<Height> expiries;
    std::vector<int> chains;
};

enum class Intent {
    Hold,      // wait, exit at the deadline
    Refresh,   // batch swap when close to expiry, exit at the deadline if that fails
    Exit,      // collaborative exit, unilateral at the deadline if that fails
    Manual,    // scripted: no automatic action at all
};

struct BoardingRecord {
    OutPoint out;
    Output output;
    Height confirmed = -1;
    bool requested = false;
    std::optional<Point> r_star;   // lock for the boarded vtxo
    std::optional<TxId> commitment;
    int split = 1;                 // vtxos requested for this output
};

class Wallet : public op::Party {
public:
    Wallet(PartyId id, KeyPair keys, Params params, Ledger& chain, op::Operator& op);

    const PartyId& id() const override { return id_; }
    const PublicKey& pk() const { return keys_.pk; }
    const KeyPair& keys() const { return keys_; }

    // ---- requests
    // Submits a boarding tx from onchain funds; the request goes out once it is stable.
    bool board(Amount amount, int split = 1);
    bool request_swap(const std::vector<OutPoint>& vtxos);
    bool request_exit(const std::vector<OutPoint>& vtxos);
    std::optional<Payment> pay(const PublicKey& to, Amount amount);
    // Explicit inputs; force also allows inputs the wallet already spent
    // (scripted double spends).
    std::optional<Payment> pay_with(const std::vector<OutPoint>& ins, const PublicKey& to, Amount amount,
                                    bool force = false);
    bool receive_payment(const Payment& p);

    // Submits whatever part of the vtxo's history is not yet onchain. Returns
    // the number of txs submitted.
    std::size_t unilateral_exit(const OutPoint& v);

    // One round: materialize stable commitments, send matured boarding
    // requests, claim exited vtxos and run the deadline policy.
    void step();

    // Exitable vtxos more than 2k from expiry plus unspent boarding outputs.
    Amount balance(const View& v) const;
    Amount onchain(const View& v) const;   // key-path outputs the wallet owns
    std::vector<OutPoint> live() const;     // Live or PreConfirmed, not pending

    const std::map<OutPoint, VtxoRecord>& vtxos() const { return vtxos_; }
    const std::vector<BoardingRecord>& boardings() const { return boards_; }
    const std::set<Bytes>& signed_digests() const { return signed_; }
    const std::string& last_error() const { return last_error_; }

    // Cold-start export: enough to rerun unilateral_exit.
    io::json transcript() const;

    // ---- op::Party
    bool verify_commitment(const op::CommitmentBundle& b) override;
    bool musig_commit(crypto::SigningSession& s, const PublicKey& member, int step) override;
    bool musig_respond(crypto::SigningSession& s, const PublicKey& member, int step) override;
    std::optional<crypto::Signature> sign_for(ByteView digest, const PublicKey& key, int step) override;
    std::optional<Tx> make_forfeit(const op::CommitmentBundle& b, const OutPoint& vtxo) override;
    void on_commitment(const op::CommitmentBundle& b) override;

    // ---- knobs
    Intent intent = Intent::Refresh;
    Height refresh_window = 0;     // swap when tip >= deadline - window
    int fail_step = 0;             // refuse at this signing step
    bool offline = false;          // refuses everything
    bool ff = false;               // nonce-bound vtxo locks
    bool auto_swap = true;         // batch swap received payments right away
    bool claim = true;             // take exited vtxos onchain after t_u

private:
    std::string check_bundle(const op::CommitmentBundle& b) const;
    void approve(const Bytes& digest) { approved_.insert(digest); }
    bool refuse(int step) const { return offline || (fail_step != 0 && step == fail_step); }
    Output fresh_vtxo(Amount value, std::optional<Point>* r_out = nullptr);
    Amount fee() const { return params_.operator_fee; }
    void materialize(const op::CommitmentBundle& b);

    PartyId id_;
    KeyPair keys_;
    Params params_;
    Ledger& chain_;
    op::Operator& op_;
    std::map<OutPoint, VtxoRecord> vtxos_;
    std::vector<BoardingRecord> boards_;
    std::map<TxId, op::CommitmentBundle> bundles_;   // verified and released to us
    std::set<TxId> materialized_;
    std::set<TxId> verified_;
    std::set<Bytes> approved_;
    std::set<Bytes> signed_;
    std::string last_error_;
};

io::json payment_to_json(const Payment& p);

} // namespace ark::wallet
