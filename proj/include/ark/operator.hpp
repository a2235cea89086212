#pragma once

// Operator state machine: request intake, commitment assembly, interactive
// signing, list bookkeeping, sweeping and onchain watch-and-respond.

#include "ark/arkcore.hpp"

#include <deque>
#include <map>
#include <set>

namespace ark::op {

using core::Params;
using crypto::KeyPair;
using crypto::Point;
using crypto::PublicKey;
using crypto::Signature;

// ---- requests

struct BoardingRequest {
    std::uint64_t id = 0;
    PartyId party;
    std::vector<PublicKey> cosigners;
    OutPoint out;
    Output output;
    std::vector<Output> vtxos;
};

struct SwapRequest {
    std::uint64_t id = 0;
    PartyId party;
    std::vector<PublicKey> cosigners;
    std::vector<OutPoint> vtxos;
    std::vector<Output> outs;
};

struct ExitRequest {
    std::uint64_t id = 0;
    PartyId party;
    std::vector<OutPoint> vtxos;
    std::vector<Output> outs;
};

// resets[i] spends the vtxo behind ark.ins[i]; no resets when they are disabled,
// then ark spends the vtxos directly.
struct ArkRequest {
    std::uint64_t id = 0;
    PartyId party;
    std::vector<Tx> resets;
    Tx ark;
};

enum class RequestKind { Boarding, BatchSwap, Exit, Ark };
const char* request_kind_name(RequestKind k);

// Signing steps, in the order run_signing enforces them.
enum Step : int { kVerify = 1, kTree = 2, kForfeit = 3, kBoarding = 4, kFunding = 5, kArk = 6 };

// ---- commitment bundle

struct LeafOrigin {
    RequestKind kind = RequestKind::Boarding;
    std::uint64_t request = 0;
    std::size_t index = 0;   // position in the request's outputs
};

struct CommitmentBundle {
    Height h_O = 0;
    Height expiry = 0;
    Tx tx;
    std::size_t funding_inputs = 0;   // operator inputs come first
    std::vector<BoardingRequest> boardings;
    std::vector<SwapRequest> swaps;
    std::vector<ExitRequest> exits;

    std::optional<core::BatchOutput> batch;
    std::uint32_t batch_vout = 0;
    core::SignerTree signers;
    std::vector<LeafOrigin> leaves;

    std::optional<core::ConnectorOutput> connector;
    std::uint32_t connector_vout = 0;
    std::map<OutPoint, OutPoint> gamma;          // forfeited vtxo -> anchor
    std::vector<std::uint32_t> exit_vouts;       // first output of each exit request
    std::map<OutPoint, Tx> forfeits;             // filled during signing
    bool handover = false;                       // forfeits belong to another operator

    TxId txid() const { return tx.txid(); }
    // Anchor output (after bind).
    Output anchor_output(const OutPoint& anchor) const;
    // Connector txs from the commitment down to the anchor.
    std::vector<Tx> anchor_path(const OutPoint& anchor) const;
    std::vector<OutPoint> forfeited() const;
    std::set<PartyId> parties() const;
};

// ---- parties

// What the operator needs from a user during signing. Every call may refuse,
// which aborts the session at that step.
class Party {
public:
    virtual ~Party() = default;
    virtual const PartyId& id() const = 0;
    virtual bool verify_commitment(const CommitmentBundle& b) = 0;
    virtual bool musig_commit(crypto::SigningSession& s, const PublicKey& member, int step) = 0;
    virtual bool musig_respond(crypto::SigningSession& s, const PublicKey& member, int step) = 0;
    virtual std::optional<Signature> sign_for(ByteView digest, const PublicKey& key, int step) = 0;
    // Unsigned forfeit for vtxo bound to its anchor in b.
    virtual std::optional<Tx> make_forfeit(const CommitmentBundle& b, const OutPoint& vtxo) = 0;
    // Released once the commitment is submitted.
    virtual void on_commitment(const CommitmentBundle& b) = 0;
};

// Where released offchain data goes; the harness oracle reads only this and the chain.
struct TranscriptSink {
    virtual ~TranscriptSink() = default;
    virtual void commitment(const CommitmentBundle& b) = 0;
    virtual void ark(const std::vector<Tx>& resets, const Tx& ark) = 0;
};

// ---- book

struct VtxoInfo {
    Output out;
    Height expiry = 0;
    int chain = 0;                   // ark-tx depth, 0 for batch leaves
    std::optional<TxId> commitment;  // batch leaves
    std::optional<TxId> ark;         // ark outputs
    PartyId owner;
};

enum class Origin { Confirmed, PreConfirmed };

struct OperatorBook {
    std::deque<BoardingRequest> toBoard;
    std::deque<SwapRequest> toBatchSwap;
    std::deque<ExitRequest> toExit;

    std::map<TxId, std::vector<OutPoint>> unconfirmed;
    std::set<OutPoint> confirmedVTXO;
    std::map<OutPoint, Height> confirmedBatches;   // batch output -> expiry
    std::set<OutPoint> expired;
    std::map<TxId, std::vector<std::pair<OutPoint, Tx>>> unconfirmedSpent;
    std::map<OutPoint, Tx> spent;
    std::set<OutPoint> replaced;
    std::set<OutPoint> preSpent;
    std::set<OutPoint> preConfirmed;

    std::map<TxId, std::vector<BoardingRequest>> unconfirmedBoardings, confirmedBoardings;
    std::map<TxId, std::vector<SwapRequest>> unconfirmedBatchSwaps, confirmedBatchSwaps;
    std::map<TxId, std::vector<ExitRequest>> unconfirmedExits, confirmedExits;

    std::map<OutPoint, VtxoInfo> info;
    std::map<OutPoint, Origin> origin;   // list an unconfirmedSpent vtxo came from

    // Which bookkeeping list holds v ("" if none). Used by the list-machine check.
    std::vector<std::string> lists_of(const OutPoint& v) const;
};

struct BatchingPolicy {
    int min_requests = 1;   // trigger when this many requests are pending
    int max_wait = 1;       // or when this many rounds passed with anything pending

    bool triggers(std::size_t pending, Height rounds_since_last) const;
};

struct ArkSigned {
    std::vector<Tx> resets;
    Tx ark;
};

struct Event {
    Height height = 0;
    std::string type;
    io::json data;
};

struct HandoverResult;
class Operator;
HandoverResult handover_swap(Operator& o1, Operator& o2, Party& user,
                             const std::vector<std::pair<OutPoint, Output>>& vtxos,
                             const std::vector<Output>& new_vtxos);

class Operator {
public:
    Operator(PartyId id, KeyPair keys, Params params, Ledger& chain, BatchingPolicy policy = {});

    const PartyId& id() const { return id_; }
    const PublicKey& pk() const { return keys_.pk; }
    const Params& params() const { return params_; }
    Ledger& chain() { return chain_; }

    void attach(Party* party, const std::vector<PublicKey>& keys);
    void set_sink(TranscriptSink* s) { sink_ = s; }
    Party* party_of(const PublicKey& pk) const;

    // Fresh fixed-nonce commitment for a NonceBound path.
    Point fresh_nonce();
    core::NonceSource nonce_source();

    // ---- intake; each throws Error with the reject reason
    std::uint64_t verify_boarding(BoardingRequest r);
    std::uint64_t verify_batch_swap(SwapRequest r);
    std::uint64_t verify_exit(ExitRequest r);
    ArkSigned verify_ark_request(ArkRequest r);

    // ---- commitment
    std::size_t pending_requests() const;
    // Builds from the queues; nullopt when nothing is pending. Throws InsufficientLiquidity.
    std::optional<CommitmentBundle> assemble_commitment();
    // Throws SessionAborted; the bundle only carries witnesses on success.
    void run_signing(CommitmentBundle& b);
    void submit_and_track(const CommitmentBundle& b);
    // Policy check, assemble, sign (dropping parties that abort) and submit.
    std::optional<TxId> commit_round();

    // ---- chain side
    void sweep(const OutPoint& out);
    std::vector<Tx> watch_step();
    // Confirmation / rollback handling and expiry.
    void track();
    // One operator round: track, commit_round unless shut down, watch_step.
    void step();

    Amount balance(const View& v) const;
    Amount fees_collected() const { return fees_; }

    const OperatorBook& book() const { return book_; }
    const std::vector<Event>& events() const { return events_; }
    // (outpoint, txid) for every vtxo spend the operator co-signed.
    const std::map<OutPoint, std::set<TxId>>& cosigned() const { return cosigned_; }

    // ---- knobs used by scenarios
    bool accepting = true;              // false: ignore new requests (shutdown)
    std::set<PartyId> censored;         // requests from these parties are dropped
    int fail_step = 0;                  // operator aborts its own funding step
    bool honest = true;                 // false: skips the double-spend checks on ark requests
    bool react = true;                  // false: never posts resets/forfeits
    bool ff = false;                    // nonce-bound batch trees
    std::set<OutPoint> reserved;        // never used as funding
    std::vector<OutPoint> extra_funding;   // forced inputs for the next commitment

    // Collected signatures over the given path; aborts with SessionAborted.
    std::vector<Signature> cosign_path(const script::Predicate& path, const Bytes& digest, int step);
    void sign_input(Tx& tx, std::size_t i, const script::LockScript& lock, std::uint32_t path, int step);

    // Spendable operator UTXOs, largest first, minus anything already committed.
    std::vector<std::pair<OutPoint, Output>> funding_candidates() const;
    // Pays `value` from operator funds into `lock` and submits; nullopt without liquidity.
    std::optional<std::pair<OutPoint, Output>> lock_funds(Amount value, const script::LockScript& lock);
    // Track a commitment built elsewhere whose forfeits this operator holds.
    void track_handover(const CommitmentBundle& b);

private:
    struct PendingCommit {
        CommitmentBundle bundle;
        Height submitted = 0;
        enum class Status { Pending, Confirmed, RolledBack, Dead } status = Status::Pending;
        bool foreign = false;
        std::vector<Tx> on_confirm;
    };

    void log(const std::string& type, io::json data);
    void note_cosign(const OutPoint& v, const TxId& tx);
    void drop_party(const PartyId& p);
    void release_request_inputs(const std::vector<OutPoint>& ins);
    bool is_vtxo_known(const OutPoint& v) const;
    void confirm(PendingCommit& c);
    void rollback(PendingCommit& c, bool requeue);
    void check_vtxo_output(const Output& o) const;
    std::optional<std::pair<std::uint32_t, Height>> sweep_path_of(const script::LockScript& lock) const;
    std::vector<Tx> vtxo_path(const OutPoint& v) const;
    const CommitmentBundle* bundle_with_forfeit(const OutPoint& v) const;
    void apply_submit_lists(const CommitmentBundle& b);
    void remove_queued(std::uint64_t id);
    friend HandoverResult handover_swap(Operator&, Operator&, Party&, const std::vector<std::pair<OutPoint, Output>>&,
                                        const std::vector<Output>&);
    void submit(const Tx& tx, const std::string& why);

    PartyId id_;
    KeyPair keys_;
    Params params_;
    Ledger& chain_;
    BatchingPolicy policy_;
    TranscriptSink* sink_ = nullptr;
    std::map<PublicKey, Party*> directory_;
    std::map<Point, crypto::Scalar> nonces_;
    std::uint64_t nonce_counter_ = 0;
    std::uint64_t next_request_ = 1;
    Height last_commit_ = 0;
    OperatorBook book_;
    std::map<TxId, PendingCommit> commits_;
    std::vector<TxId> commit_order_;
    std::set<OutPoint> sweep_targets_;
    std::set<OutPoint> expired_batches_;   // already handed to sweep()
    std::set<TxId> submitted_;
    std::map<OutPoint, std::set<TxId>> cosigned_;
    std::map<std::uint64_t, Amount> request_fee_;
    std::map<TxId, ArkSigned> arks_;
    std::map<Point, Bytes> nonce_used_;
    std::set<TxId> reacted_;
    Amount fees_ = 0;
    std::vector<Event> events_;
};

// Offchain handover of vtxos from O1's batch into a batch of O2.
struct HandoverResult {
    TxId commitment;
    Tx reimbursement;              // tx_{1->2}: pays O2 once its commitment confirms
    std::map<OutPoint, Tx> forfeits;   // held by O1
    CommitmentBundle bundle;
};

io::json to_json(const CommitmentBundle& b);

} // namespace ark::op
