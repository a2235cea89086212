#pragma once

// Ark artifacts: VTXO locks, virtual transaction trees, batch and connector
// outputs, and the boarding / reset / ark / forfeit / sweep templates.

#include "ark/json_io.hpp"

#include <functional>

namespace ark::core {

using crypto::Point;
using crypto::PublicKey;
using crypto::SecretKey;
using script::LockScript;
using script::Predicate;

struct Params {
    int k = 6;
    Height u = 1;   // liveness wait; exposed but unused, confirmation runs off the 2k bound
    Height t_u = 25;
    Height t_e = 120;
    Height t_b = 144;
    Height t_r = 10;
    Amount epsilon = 330;
    double fee_rate = 0;   // sat/vB, notional only (mining fees stay 0)
    Amount operator_fee = 0;
    int arity = 2;
    bool path_cosign = true;
    bool resets = true;
    int max_chain = 6;
    bool unsafe = false;

    // Throws Config unless t_u > 4k (or unsafe) and every value is in range.
    void validate() const;
};

// Supplies fresh fixed-nonce commitments R* for NonceBound paths. Empty
// function: fast finality off.
using NonceSource = std::function<Point()>;

// ---- locks

// Collaborative path needs O and the owner; unilateral path is owner + t_u.
// With r_star set, the collaborative path is NonceBound(O, R*) ∧ CheckSig(owner).
LockScript vtxo_lock(const PublicKey& owner, const PublicKey& op, Height t_u,
                     std::optional<Point> r_star = std::nullopt);

// Path 0 of every lock built here is the collaborative one.
constexpr std::uint32_t kCollabPath = 0;
constexpr std::uint32_t kUnilateralPath = 1;
constexpr std::uint32_t kSweepPath = 0;    // batch-shaped locks
constexpr std::uint32_t kUnrollPath = 1;   // batch-shaped locks
constexpr std::uint32_t kResetSweepPath = 1;

struct VtxoClass {
    bool ok = false;
    int collaborative = 0;
    int unilateral = 0;
    std::string reason;
};

// Mechanical check that a lock qualifies as a VTXO for operator op and delay t_u.
VtxoClass classify_vtxo(const LockScript& lock, const PublicKey& op, Height t_u);

// Sweep path first, then the unroll path over the cosigners plus O.
LockScript batch_lock(const PublicKey& op, Height expiry, const std::vector<PublicKey>& cosigners,
                      std::optional<Point> r_star = std::nullopt);
LockScript connector_lock(const PublicKey& op);
LockScript anchor_lock();   // zero-value fee anchor
LockScript boarding_lock(const PublicKey& owner, const PublicKey& op, Height t_b);
LockScript reset_lock(const LockScript& vtxo, const PublicKey& op, Height expiry,
                      std::optional<Point> r_star = std::nullopt);
// Key path of the locks above that O could spend alone, if any. Used for balances.
bool operator_owned(const LockScript& lock, const PublicKey& op);

// ---- virtual transaction trees

struct VtxtNode {
    Tx tx;
    int parent = -1;                     // -1 for the root
    std::uint32_t parent_vout = 0;
    std::vector<int> child;              // per output; -1 when not spent inside the tree
    std::vector<PublicKey> cosigners;    // who signs this node's input besides O
    std::optional<Point> r_star;         // fixed nonce on this node's input lock
    int leaf = -1;                       // leaf index when the node carries a leaf output
};

struct Vtxt {
    std::vector<VtxtNode> nodes;   // nodes[0] is the root; empty for a 1-anchor connector
    std::vector<std::pair<int, std::uint32_t>> leaf_at;   // leaf -> (node, vout)
    Output funding;                // the commitment output the root spends
    std::optional<OutPoint> funding_point;

    // Fills in all inputs top-down once the commitment txid is known.
    void bind(const OutPoint& funding_outpoint);
    std::size_t leaf_count() const { return leaf_at.size(); }
    OutPoint leaf_outpoint(std::size_t leaf) const;
    const Output& leaf_output(std::size_t leaf) const;
    // Lock of the output node i spends.
    const LockScript& input_lock(std::size_t node) const;
    Amount input_value(std::size_t node) const;
    // Root-to-leaf node indices.
    std::vector<int> node_path(std::size_t leaf) const;
    int depth() const;   // internal levels above the leaf txs
};

// Full tree shape check; empty string when well formed.
std::string check_vtxt(const Vtxt& v);
// Same checks restricted to the root-to-leaf path of one leaf. Enough for the
// owner of that leaf: txs are single-input, so other branches cannot touch it.
std::string check_path(const Vtxt& v, std::size_t leaf);

struct Leaf {
    Output vtxo;
    std::vector<PublicKey> cosigners;   // the requester's cosigner set N
};

struct SignerTree {
    std::vector<std::vector<PublicKey>> per_node;   // mirrors Vtxt::nodes
};

struct BatchOutput {
    Amount value = 0;
    Height expiry = 0;
    LockScript lock;
    Vtxt vtxt;
};

// Balanced tree of the given arity. Internal outputs are batch-shaped,
// leaf txs are [vtxo, anchor]. path_cosign=false makes every node need every
// leaf's cosigners.
std::pair<BatchOutput, SignerTree> build_vtxt(const std::vector<Leaf>& leaves, int arity, const PublicKey& op,
                                              Height expiry, bool path_cosign = true,
                                              const NonceSource& nonces = {});

// Root-first transactions leading to a leaf.
std::vector<Tx> path(const Vtxt& v, std::size_t leaf);
std::vector<Tx> path(const Vtxt& v, const OutPoint& vtxo);   // throws NotALeaf

struct ConnectorOutput {
    Amount value = 0;
    LockScript lock;
    Vtxt vtxt;   // no nodes when there is a single anchor

    std::vector<OutPoint> anchors() const;   // after bind
};

ConnectorOutput build_connector(int anchor_count, const PublicKey& op, int arity, Amount epsilon);
// O signs every connector node.
void sign_connector(ConnectorOutput& c, const SecretKey& sk_op);

// ---- transaction templates (unsigned unless noted)

using Funds = std::vector<std::pair<OutPoint, Output>>;

// Output 0 is the boarding output worth `amount`; change (if any) goes to key(owner).
Tx boarding_tx(const Funds& funds, const PublicKey& owner, const PublicKey& op, Height t_b, Amount amount);
Tx reset_tx(const OutPoint& vtxo, const Output& vtxo_out, const PublicKey& op, Height expiry,
            std::optional<Point> r_star = std::nullopt);
Tx ark_tx(const Funds& inputs, const std::vector<Output>& outs);   // throws ValueExceeded
Tx forfeit_tx(const OutPoint& vtxo, const Output& vtxo_out, const OutPoint& anchor, const Output& anchor_out,
              const PublicKey& op);
Tx sweep_tx(const OutPoint& out, const Output& o, const PublicKey& op);
// Owner claims a confirmed vtxo after t_u into key(owner).
Tx claim_tx(const OutPoint& vtxo, const Output& o, const PublicKey& owner);

// Signs input i through the key path or a CheckSig-only path with sk.
void sign_single(Tx& tx, std::size_t i, const LockScript& lock, std::uint32_t path, const SecretKey& sk);
void sign_key_path(Tx& tx, std::size_t i, const LockScript& lock, const SecretKey& sk);

// Checks that txs applied in order on top of `chain` would all be valid at
// the next block (timelocks included). Already-confirmed txs are skipped.
// Empty string on success.
std::string replay_check(const std::vector<Tx>& txs, const View& chain);

// Nonce-bound signature over input i, if the witness has one.
std::optional<crypto::Signature> fixed_nonce_sig(const Tx& tx, std::size_t i, const PublicKey& op);

io::json vtxt_to_json(const Vtxt& v);

} // namespace ark::core
