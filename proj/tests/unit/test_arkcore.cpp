#include "ark/arkcore.hpp"

#include <doctest.h>

#include <random>

using namespace ark;
using namespace ark::core;

namespace {

crypto::KeyPair key(const std::string& s) { return crypto::keygen_from_label(s); }

std::vector<Amount> p2tr_values(const Tx& tx)
{
    std::vector<Amount> v;
    for (auto& o : tx.outs)
        if (!(o.value == 0 && o.lock == anchor_lock())) v.push_back(o.value);
    return v;
}

std::vector<Leaf> leaves_for(const std::vector<crypto::KeyPair>& owners, const crypto::PublicKey& op,
                             const std::vector<Amount>& values)
{
    std::vector<Leaf> ls;
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto& o = owners[i % owners.size()];
        ls.push_back({{values[i], vtxo_lock(o.pk, op, 25)}, {o.pk}});
    }
    return ls;
}

template <class F>
Errc code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::InvalidArgument;
}

} // namespace

TEST_CASE("vtxo_lock classification")
{
    auto a = key("A"), o = key("O");
    auto c = classify_vtxo(vtxo_lock(a.pk, o.pk, 25), o.pk, 25);
    CHECK(c.ok);
    CHECK(c.collaborative == 1);
    CHECK(c.unilateral == 1);
    CHECK(code_of([&] { vtxo_lock(a.pk, o.pk, 0); }) == Errc::InvalidArgument);

    auto r = crypto::mul_base(crypto::derive_fixed_nonce(o.sk, "x"));
    CHECK(classify_vtxo(vtxo_lock(a.pk, o.pk, 25, r), o.pk, 25).ok);

    // a plain key output is not a vtxo, nor is one whose delay is too short
    CHECK_FALSE(classify_vtxo(script::key_lock(a.pk), o.pk, 25).ok);
    CHECK_FALSE(classify_vtxo(vtxo_lock(a.pk, o.pk, 10), o.pk, 25).ok);
    // without O on the collaborative path it is the owner's alone
    CHECK_FALSE(classify_vtxo(vtxo_lock(a.pk, key("X").pk, 25), o.pk, 25).ok);
}

TEST_CASE("build_vtxt: four leaves, arity 2")
{
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("P1"), key("P2"), key("P3"), key("P4")};
    auto [batch, signers] = build_vtxt(leaves_for(owners, o.pk, {1000, 2000, 3000, 4000}), 2, o.pk, 200);
    OutPoint fund;
    fund.txid.b.fill(0x07);
    batch.vtxt.bind(fund);
    auto& v = batch.vtxt;
    CHECK_MESSAGE(check_vtxt(v).empty(), check_vtxt(v));
    CHECK(v.depth() == 2);
    CHECK(p2tr_values(v.nodes[0].tx) == std::vector<Amount>{3000, 7000});
    CHECK(batch.value == 10000);
    CHECK(batch.expiry == 200);
    for (std::size_t l = 0; l < 4; ++l) {
        auto p = path(v, l);
        REQUIRE(p.size() == 3);
        auto vals = p2tr_values(p.back());
        REQUIRE(vals.size() == 1);
        CHECK(vals[0] == 1000 * static_cast<Amount>(l + 1));
        CHECK(p.back().outs.size() == 2);   // vtxo + anchor
    }
    // internal outputs are batch-shaped: sweep then unroll
    auto& lock = v.input_lock(1);
    CHECK(lock.paths.size() == 2);
    CHECK(lock.paths[kSweepPath].abs_height() == 200);
    CHECK(signers.per_node.size() == v.nodes.size());
}

TEST_CASE("build_vtxt: single leaf and large trees")
{
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A")};
    auto one = build_vtxt(leaves_for(owners, o.pk, {5000}), 2, o.pk, 100).first;
    CHECK(one.vtxt.nodes.size() == 1);
    CHECK(path(one.vtxt, 0).size() == 1);

    std::vector<Amount> vals8(8, 100);
    auto eight = build_vtxt(leaves_for(owners, o.pk, vals8), 2, o.pk, 100).first;
    CHECK(eight.vtxt.depth() == 3);
    for (std::size_t l = 0; l < 8; ++l) CHECK(path(eight.vtxt, l).size() == 4);

    std::vector<Amount> vals128(128, 1000);
    auto big = build_vtxt(leaves_for(owners, o.pk, vals128), 2, o.pk, 100).first;
    CHECK(big.vtxt.depth() == 7);
    for (std::size_t l = 0; l < 128; ++l) CHECK(path(big.vtxt, l).size() == 8);

    CHECK(code_of([&] { build_vtxt({}, 2, o.pk, 100); }) == Errc::EmptySet);
    CHECK(code_of([&] { build_vtxt(leaves_for(owners, o.pk, {1}), 1, o.pk, 100); }) == Errc::InvalidArgument);
    std::vector<Amount> huge{std::numeric_limits<Amount>::max(), 1};
    CHECK(code_of([&] { build_vtxt(leaves_for(owners, o.pk, huge), 2, o.pk, 100); }) == Errc::ValueOverflow);
}

TEST_CASE("path by outpoint")
{
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A")};
    auto b = build_vtxt(leaves_for(owners, o.pk, {1, 2, 3}), 2, o.pk, 100).first;
    OutPoint fund;
    fund.txid.b.fill(7);
    b.vtxt.bind(fund);
    CHECK(path(b.vtxt, b.vtxt.leaf_outpoint(2)).size() == path(b.vtxt, 2).size());
    CHECK(code_of([&] { path(b.vtxt, fund); }) == Errc::NotALeaf);
}

TEST_CASE("signer tree covers each requester along its path")
{
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A"), key("B"), key("C")};
    auto leaves = leaves_for(owners, o.pk, {10, 20, 30, 40, 50});
    auto [b, s] = build_vtxt(leaves, 2, o.pk, 100, true);
    for (std::size_t l = 0; l < leaves.size(); ++l)
        for (int n : b.vtxt.node_path(l)) {
            auto& cs = s.per_node[static_cast<std::size_t>(n)];
            CHECK(std::find(cs.begin(), cs.end(), leaves[l].cosigners[0]) != cs.end());
        }
    // all-holders mode puts every cosigner on every node
    auto all = build_vtxt(leaves, 2, o.pk, 100, false).second;
    for (auto& cs : all.per_node) CHECK(cs.size() == 3);
}

TEST_CASE("connectors")
{
    auto o = key("O");
    auto one = build_connector(1, o.pk, 2, 330);
    CHECK(one.value == 330);
    CHECK(one.vtxt.nodes.empty());
    CHECK(one.lock == connector_lock(o.pk));

    auto two = build_connector(2, o.pk, 2, 330);
    CHECK(two.value == 660);
    OutPoint fund;
    fund.txid.b.fill(3);
    two.vtxt.bind(fund);
    CHECK(two.anchors().size() == 2);
    CHECK(check_vtxt(two.vtxt).empty());

    auto many = build_connector(7, o.pk, 2, 330);
    CHECK(many.value >= 7 * 330);
    many.vtxt.bind(fund);
    CHECK(many.anchors().size() == 7);
    std::set<OutPoint> uniq;
    for (auto& a : many.anchors()) uniq.insert(a);
    CHECK(uniq.size() == 7);
    CHECK(code_of([&] { build_connector(0, o.pk, 2, 330); }) == Errc::InvalidArgument);
}

TEST_CASE("boarding, reset, ark and forfeit templates")
{
    auto a = key("A"), o = key("O"), b = key("B");
    Funds funds{{{TxId{}, 0}, {150000, script::key_lock(a.pk)}}};
    auto bt = boarding_tx(funds, a.pk, o.pk, 144, 100000);
    CHECK(bt.outs[0].value == 100000);
    CHECK(bt.outs[0].lock == boarding_lock(a.pk, o.pk, 144));
    CHECK(bt.outs[0].lock.paths[0].requires_signer(o.pk));
    CHECK(bt.outs[0].lock.paths[1].rel_delay() == 144);
    CHECK(bt.outs[1].value == 50000);
    CHECK(code_of([&] { boarding_tx(funds, a.pk, o.pk, 144, 150001); }) == Errc::InsufficientFunds);

    Output vtxo{40000, vtxo_lock(a.pk, o.pk, 25)};
    OutPoint vpt{TxId{}, 3};
    auto reset = reset_tx(vpt, vtxo, o.pk, 300);
    REQUIRE(reset.outs.size() == 1);
    CHECK(reset.outs[0].value == 40000);
    CHECK(reset.outs[0].lock.paths[0] == vtxo.lock.paths[0]);
    CHECK(reset.outs[0].lock.paths[kResetSweepPath].abs_height() == 300);
    CHECK(reset.outs[0].lock.paths[kResetSweepPath].requires_signer(o.pk));

    Funds ins{{{reset.txid(), 0}, reset.outs[0]}};
    auto pay = ark_tx(ins, {{30000, vtxo_lock(b.pk, o.pk, 25)}, {10000, vtxo_lock(a.pk, o.pk, 25)}});
    CHECK(pay.out_value() == 40000);
    CHECK_NOTHROW(ark_tx(ins, {{40000, vtxo_lock(b.pk, o.pk, 25)}}));
    CHECK(code_of([&] { ark_tx(ins, {{40001, vtxo_lock(b.pk, o.pk, 25)}}); }) == Errc::ValueExceeded);

    OutPoint anchor{TxId{}, 9};
    auto ff = forfeit_tx(vpt, vtxo, anchor, {330, anchor_lock()}, o.pk);
    CHECK(ff.ins == std::vector<OutPoint>{vpt, anchor});
    CHECK(ff.outs.size() == 1);
    CHECK(ff.outs[0].value == 40330);
    // SIGHASH_ALL: moving the anchor changes every input's digest
    auto moved = ff;
    moved.ins[1].vout = 10;
    CHECK(moved.sighash(0) != ff.sighash(0));
}

TEST_CASE("forfeit needs its anchor onchain")
{
    auto a = key("A"), o = key("O");
    Ledger chain(2);
    chain.register_party("O");
    Output vtxo{5000, vtxo_lock(a.pk, o.pk, 25)};
    auto vpt = chain.mint(5000, vtxo.lock);
    auto conn = build_connector(1, o.pk, 2, 330);
    Tx commit_like;
    auto fund = chain.mint(1000, script::key_lock(o.pk));
    commit_like.ins = {fund};
    commit_like.outs = {{330, conn.lock}, {670, script::key_lock(o.pk)}};
    sign_key_path(commit_like, 0, script::key_lock(o.pk), o.sk);
    OutPoint anchor{commit_like.txid(), 0};

    auto ff = forfeit_tx(vpt, vtxo, anchor, commit_like.outs[0], o.pk);
    ff.wits.resize(2);
    ff.wits[0] = script::script_path_witness(vtxo.lock, kCollabPath,
                                              {crypto::cosign(ff.sighash_bytes(0), std::vector<SecretKey>{a.sk, o.sk})});
    sign_single(ff, 1, conn.lock, 0, o.sk);
    CHECK(chain.submit(ff, "O").reason == Reject::MissingInput);
    REQUIRE(chain.submit(commit_like, "O").accepted);
    chain.advance_round();
    CHECK(chain.submit(ff, "O").accepted);
}

TEST_CASE("property: every built tree is well formed and conserves value")
{
    std::mt19937_64 rng(2024);
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A"), key("B"), key("C"), key("D")};
    for (int i = 0; i < 60; ++i) {
        int n = 1 + static_cast<int>(rng() % 40);
        int arity = 2 + static_cast<int>(rng() % 3);
        std::vector<Amount> vals;
        Amount sum = 0;
        for (int j = 0; j < n; ++j) {
            vals.push_back(1 + static_cast<Amount>(rng() % 100000));
            sum += vals.back();
        }
        auto [b, s] = build_vtxt(leaves_for(owners, o.pk, vals), arity, o.pk, 500, rng() % 2);
        OutPoint fund;
        fund.txid.b[0] = static_cast<std::uint8_t>(i);
        b.vtxt.bind(fund);
        CHECK(check_vtxt(b.vtxt).empty());
        CHECK(b.value == sum);
        CHECK(b.vtxt.leaf_count() == static_cast<std::size_t>(n));
        int expect_depth = 0;
        for (std::int64_t cap = 1; cap < n; cap *= arity) ++expect_depth;
        CHECK(b.vtxt.depth() == expect_depth);
        for (std::size_t l = 0; l < b.vtxt.leaf_count(); ++l) {
            CHECK(check_path(b.vtxt, l).empty());
            CHECK(b.vtxt.leaf_output(l).value == vals[l]);
        }
    }
}

TEST_CASE("property: tampering is caught by the tree and path checks")
{
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A")};
    auto b = build_vtxt(leaves_for(owners, o.pk, {1, 2, 3, 4, 5, 6, 7, 8}), 2, o.pk, 100).first;
    OutPoint fund;
    fund.txid.b.fill(1);
    b.vtxt.bind(fund);

    auto inflate = b.vtxt;
    inflate.nodes[inflate.leaf_at[5].first].tx.outs[0].value += 1;
    CHECK_FALSE(check_vtxt(inflate).empty());
    CHECK_FALSE(check_path(inflate, 5).empty());

    auto rewire = b.vtxt;
    int leaf_node = rewire.leaf_at[2].first;
    rewire.nodes[static_cast<std::size_t>(leaf_node)].tx.ins[0].vout ^= 1;
    CHECK_FALSE(check_vtxt(rewire).empty());
    CHECK_FALSE(check_path(rewire, 2).empty());

    auto two_roots = b.vtxt;
    two_roots.nodes[1].parent = -1;
    CHECK_FALSE(check_vtxt(two_roots).empty());
}

TEST_CASE("property: unrolling a signed path confirms the vtxo")
{
    std::mt19937_64 rng(5);
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A"), key("B"), key("C")};
    std::map<crypto::PublicKey, SecretKey> sks{{o.pk, o.sk}};
    for (auto& w : owners) sks[w.pk] = w.sk;

    for (int trial = 0; trial < 6; ++trial) {
        int n = 2 + static_cast<int>(rng() % 12);
        std::vector<Amount> vals(static_cast<std::size_t>(n), 1000);
        auto [b, s] = build_vtxt(leaves_for(owners, o.pk, vals), 2, o.pk, 1000);
        Ledger chain(2);
        chain.register_party("A");
        auto fund = chain.mint(b.value, b.lock);
        b.vtxt.bind(fund);
        for (std::size_t i = 0; i < b.vtxt.nodes.size(); ++i) {
            auto& node = b.vtxt.nodes[i];
            std::vector<SecretKey> signers{o.sk};
            for (auto& pk : node.cosigners) signers.push_back(sks.at(pk));
            auto& lock = b.vtxt.input_lock(i);
            node.tx.wits = {script::script_path_witness(lock, kUnrollPath,
                                                        {crypto::cosign(node.tx.sighash_bytes(0), signers)})};
        }
        std::size_t leaf = rng() % static_cast<std::size_t>(n);
        CHECK(replay_check(path(b.vtxt, leaf), chain.tip_view()).empty());
        for (auto& tx : path(b.vtxt, leaf)) REQUIRE(chain.submit(tx, "A").accepted);
        chain.advance_round();
        auto pt = b.vtxt.leaf_outpoint(leaf);
        CHECK(chain.tip_view().unspent(pt));
        CHECK(chain.tip_view().output(pt)->value == 1000);
    }
}

TEST_CASE("vtxt json is stable")
{
    auto o = key("O");
    std::vector<crypto::KeyPair> owners{key("A")};
    auto b1 = build_vtxt(leaves_for(owners, o.pk, {1, 2, 3}), 2, o.pk, 100).first;
    auto b2 = build_vtxt(leaves_for(owners, o.pk, {1, 2, 3}), 2, o.pk, 100).first;
    CHECK(vtxt_to_json(b1.vtxt).dump() == vtxt_to_json(b2.vtxt).dump());
}
