#include "world_util.hpp"

#include "ark/scenarios.hpp"

#include <doctest.h>

using namespace ark;
using namespace testutil;
using wallet::Intent;
using wallet::VState;

namespace {

// A pending commitment boarding one vtxo for `a`, not yet signed.
op::CommitmentBundle pending_board(sim::World& w, wallet::Wallet& a)
{
    a.intent = Intent::Manual;
    REQUIRE(a.board(100000));
    REQUIRE(wait_pending(w, 1));
    auto b = w.op.assemble_commitment();
    REQUIRE(b);
    return *b;
}

} // namespace

TEST_CASE("verify_commitment accepts the honest bundle")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto b = pending_board(w, a);
    CHECK(a.verify_commitment(b));
}

TEST_CASE("verify_commitment rejects a leaf with the wrong value")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto b = pending_board(w, a);
    auto [node, vout] = b.batch->vtxt.leaf_at.at(0);
    b.batch->vtxt.nodes[static_cast<std::size_t>(node)].tx.outs[vout].value -= 1;
    CHECK_FALSE(a.verify_commitment(b));
    CHECK_FALSE(a.last_error().empty());
}

TEST_CASE("verify_commitment rejects a leaf locked to someone else")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto b = pending_board(w, a);
    auto [node, vout] = b.batch->vtxt.leaf_at.at(0);
    auto mallory = crypto::keygen_from_label("mallory");
    b.batch->vtxt.nodes[static_cast<std::size_t>(node)].tx.outs[vout].lock =
        core::vtxo_lock(mallory.pk, w.op.pk(), w.params().t_u);
    CHECK_FALSE(a.verify_commitment(b));
}

TEST_CASE("verify_commitment rejects a unilateral delay below t_u")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto b = pending_board(w, a);
    auto [node, vout] = b.batch->vtxt.leaf_at.at(0);
    b.batch->vtxt.nodes[static_cast<std::size_t>(node)].tx.outs[vout].lock =
        core::vtxo_lock(a.pk(), w.op.pk(), w.params().t_u - 1);
    CHECK_FALSE(a.verify_commitment(b));
}

TEST_CASE("verify_commitment rejects a tree whose root skips the batch output")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto b = pending_board(w, a);
    b.batch->vtxt.nodes[0].tx.ins[0].vout ^= 1;
    CHECK_FALSE(a.verify_commitment(b));
}

TEST_CASE("receive_payment")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    auto& c = w.add_wallet("c", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    b.auto_swap = false;
    auto p = a.pay(b.pk(), 40000);
    REQUIRE(p);

    SUBCASE("history missing a tx is rejected")
    {
        auto cut = *p;
        cut.path.erase(cut.path.begin());
        CHECK_FALSE(b.receive_payment(cut));
        CHECK(b.last_error().find("replay") != std::string::npos);
    }
    SUBCASE("a reset with a later expiry than claimed is rejected")
    {
        auto lie = *p;
        lie.expiries[0] -= 1;
        CHECK_FALSE(b.receive_payment(lie));
    }
    SUBCASE("not addressed to this wallet")
    {
        CHECK_FALSE(c.receive_payment(*p));
    }
    SUBCASE("accepted")
    {
        REQUIRE(b.receive_payment(*p));
        CHECK(count_state(b, VState::PreConfirmed) == 1);
        auto rec = b.vtxos().at(OutPoint{p->ark.txid(), 0});
        CHECK(rec.chain == 1);
        CHECK(rec.path.back().txid() == p->ark.txid());
        // sender keeps the change, the spent vtxo is gone
        CHECK(count_state(a, VState::Spent) == 1);
        CHECK(count_state(a, VState::PreConfirmed) == 1);
    }
}

TEST_CASE("received vtxo exits unilaterally with its whole history")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    b.auto_swap = false;
    auto p = a.pay(b.pk(), 40000);
    REQUIRE(p);
    REQUIRE(b.receive_payment(*p));
    OutPoint got{p->ark.txid(), 0};
    if (b.vtxos().count(got) == 0) got.vout = 1;
    REQUIRE(b.vtxos().count(got));
    Amount before = b.onchain(w.chain.tip_view());
    auto n = b.unilateral_exit(got);
    CHECK(n == p->path.size());
    REQUIRE(run_until(w, [&] { return b.vtxos().at(got).state == VState::Claimed; }, 80));
    CHECK(b.onchain(w.chain.tip_view()) == before + 40000);
}

TEST_CASE("depth-7 exit is eight transactions and confirms")
{
    auto r = scen::exit_scaling(128);
    CHECK(r.txs == 8);
    CHECK(r.vbytes == 1157);
    CHECK(r.confirmed);
}

TEST_CASE("balance")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    CHECK(a.balance(w.chain.tip_view()) == 0);
    REQUIRE(board_all(w, {&a}));
    b.intent = Intent::Manual;
    REQUIRE(b.board(70000));
    w.run(1);
    // a: one live vtxo; b: an unspent boarding output
    CHECK(a.balance(w.chain.tip_view()) == 100000);
    CHECK(b.balance(w.chain.tip_view()) == 70000);

    a.claim = false;
    Height T = a.vtxos().begin()->second.expiry;
    REQUIRE(run_until(w, [&] { return w.tip() >= T - 2 * w.params().k - 1; }, 400));
    CHECK(a.balance(w.chain.tip_view()) == 100000);
    w.round();
    CHECK(a.balance(w.chain.tip_view()) == 0);
}

TEST_CASE("deadline policy")
{
    SUBCASE("Hold exits onchain before the batch expires")
    {
        sim::World w(manual_cfg());
        auto& a = w.add_wallet("a", 500000);
        REQUIRE(board_all(w, {&a}));
        auto v = a.live().at(0);
        Height T = a.vtxos().at(v).expiry;
        a.intent = Intent::Hold;
        REQUIRE(run_until(w, [&] { return w.tip() >= T + w.params().t_u + 2; }, 400));
        auto leaf_tx = a.vtxos().at(v).path.back().txid();
        auto at = w.chain.tx_height(leaf_tx);
        REQUIRE(at);
        CHECK(*at < T);
        CHECK(a.vtxos().at(v).state == VState::Claimed);
        CHECK(submits(w.op, "sweep") == 0);
    }
    SUBCASE("Refresh swaps into a later batch")
    {
        sim::WorldConfig cfg = manual_cfg();
        cfg.policy = {1, 1};
        sim::World w(cfg);
        auto& a = w.add_wallet("a", 500000);
        a.intent = Intent::Manual;
        REQUIRE(a.board(100000));
        REQUIRE(run_until(w, [&] { return count_state(a, VState::Live) == 1; }));
        auto v = a.live().at(0);
        Height T = a.vtxos().at(v).expiry;
        a.intent = Intent::Refresh;
        a.refresh_window = 4 * w.params().k;
        REQUIRE(run_until(w, [&] { return w.tip() >= T + 1; }, 400));
        CHECK(a.vtxos().at(v).state == VState::Forfeited);
        auto now = a.live();
        REQUIRE(now.size() == 1);
        CHECK(a.vtxos().at(now[0]).expiry > T);
        CHECK(a.vtxos().at(now[0]).out.value == 100000);
    }
}

TEST_CASE("transcript carries enough to exit")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    REQUIRE(board_all(w, {&a}));
    auto t = a.transcript();
    CHECK(t["party"] == "a");
    REQUIRE(t["vtxos"].size() == 1);
    auto& v = t["vtxos"][0];
    CHECK(v["state"] == "live");
    CHECK(v["path"].size() == a.vtxos().begin()->second.path.size());
    CHECK(v["expiry"].get<Height>() == a.vtxos().begin()->second.expiry);
}
