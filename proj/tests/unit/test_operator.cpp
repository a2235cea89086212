#include "world_util.hpp"

#include "ark/scenarios.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace ark;
using namespace testutil;
using wallet::Intent;
using wallet::VState;

namespace {

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

// Puts a boarding-like output on chain with the given lock and waits until it is stable.
OutPoint onchain_lock(sim::World& w, wallet::Wallet& wl, const script::LockScript& lock, Amount value)
{
    core::Funds funds;
    for (auto& [pt, o] : w.chain.tip_view().utxos())
        if (o.lock.key_only() && *o.lock.internal_key == wl.pk()) funds.emplace_back(pt, o);
    REQUIRE(!funds.empty());
    Tx tx;
    tx.ins = {funds[0].first};
    tx.outs = {{value, lock}, {funds[0].second.value - value, script::key_lock(wl.pk())}};
    core::sign_key_path(tx, 0, funds[0].second.lock, wl.keys().sk);
    REQUIRE(w.chain.submit(tx, wl.id()).accepted);
    w.run(w.params().k + 1);
    return {tx.txid(), 0};
}

Output vtxo_for(const wallet::Wallet& wl, const sim::World& w, Amount v)
{
    return {v, core::vtxo_lock(wl.pk(), w.op.pk(), w.params().t_u)};
}

} // namespace

TEST_CASE("verify_boarding")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("alice", 500000);
    a.intent = Intent::Manual;
    auto good = core::boarding_lock(a.pk(), w.op.pk(), w.params().t_b);
    auto pt = onchain_lock(w, a, good, 100000);

    op::BoardingRequest r{0, "alice", {a.pk()}, pt, {100000, good}, {vtxo_for(a, w, 100001)}};
    CHECK(code_of([&] { w.op.verify_boarding(r); }) == Errc::ValueExceeded);

    r.vtxos = {vtxo_for(a, w, 60000), vtxo_for(a, w, 40000)};
    auto id = w.op.verify_boarding(r);
    CHECK(id > 0);
    CHECK(w.op.book().toBoard.size() == 1);
    CHECK(w.op.book().preSpent.count(pt));
    CHECK(code_of([&] { w.op.verify_boarding(r); }) == Errc::AlreadyPending);

    // an owner path without the t_b delay lets the owner double-spend the board
    auto quick = script::taproot(std::nullopt, {script::Predicate::check_agg_sig(crypto::aggregate({a.pk(), w.op.pk()})),
                                                script::Predicate::check_sig(a.pk())});
    auto bad = onchain_lock(w, a, quick, 50000);
    op::BoardingRequest rb{0, "alice", {a.pk()}, bad, {50000, quick}, {vtxo_for(a, w, 50000)}};
    CHECK(code_of([&] { w.op.verify_boarding(rb); }) == Errc::Rejected);
}

TEST_CASE("verify_batch_swap and verify_exit")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("alice", 500000);
    REQUIRE(board_all(w, {&a}));
    auto v = a.live().at(0);

    op::ExitRequest greedy{0, "alice", {v}, {{100001, script::key_lock(a.pk())}}};
    CHECK(code_of([&] { w.op.verify_exit(greedy); }) == Errc::ValueExceeded);

    op::SwapRequest s{0, "alice", {a.pk()}, {v}, {vtxo_for(a, w, 100000)}};
    CHECK(w.op.verify_batch_swap(s) > 0);
    CHECK(w.op.book().preSpent.count(v));
    CHECK(code_of([&] { w.op.verify_batch_swap(s); }) == Errc::AlreadyPending);

    OutPoint unknown;
    unknown.txid.b.fill(0x42);
    op::SwapRequest u{0, "alice", {a.pk()}, {unknown}, {vtxo_for(a, w, 1)}};
    CHECK(code_of([&] { w.op.verify_batch_swap(u); }) == Errc::UnknownVtxo);
}

TEST_CASE("verify_ark_request")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("alice", 500000);
    auto& b = w.add_wallet("bob", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    auto v = a.live().at(0);
    auto& rec = a.vtxos().at(v);

    // reset claimable one block after the batch expiry
    Tx re = core::reset_tx(v, rec.out, w.op.pk(), rec.expiry + 1);
    Tx ark = core::ark_tx({{{re.txid(), 0}, re.outs[0]}}, {vtxo_for(b, w, rec.out.value)});
    CHECK(code_of([&] { w.op.verify_ark_request({0, "alice", {re}, ark}); }) == Errc::MissingReset);
    CHECK(code_of([&] { w.op.verify_ark_request({0, "alice", {}, ark}); }) == Errc::MissingReset);

    auto pay = a.pay(b.pk(), 30000);
    REQUIRE(pay);
    CHECK(pay->resets.size() == 1);
    CHECK(b.receive_payment(*pay));
    CHECK(w.op.book().spent.count(v));
    for (std::uint32_t j = 0; j < pay->ark.outs.size(); ++j) CHECK(w.op.book().preConfirmed.count({pay->ark.txid(), j}));

    // the honest operator refuses a second spend of the same vtxo
    auto again = a.pay_with({v}, b.pk(), 10000, true);
    CHECK_FALSE(again);
    CHECK(a.last_error().find("already spent") != std::string::npos);
}

TEST_CASE("assemble_commitment: board, swap and exit together")
{
    sim::World w(manual_cfg());
    auto& p1 = w.add_wallet("p1", 500000);
    auto& p4 = w.add_wallet("p4", 500000);
    auto& p5 = w.add_wallet("p5", 500000);
    CHECK_FALSE(w.op.assemble_commitment());
    REQUIRE(board_all(w, {&p4, &p5}));

    p1.intent = Intent::Manual;
    REQUIRE(p1.board(100000));
    REQUIRE(wait_pending(w, 1));
    REQUIRE(p4.request_swap({p4.live().at(0)}));
    REQUIRE(p5.request_exit({p5.live().at(0)}));
    auto b = w.op.assemble_commitment();
    REQUIRE(b);
    CHECK(b->expiry == b->h_O + 2 * w.params().k + w.params().t_e);
    REQUIRE(b->batch);
    CHECK(b->batch->vtxt.leaf_count() == 2);
    REQUIRE(b->connector);
    CHECK(b->gamma.size() == 2);
    CHECK(b->exit_vouts.size() == 1);
    CHECK(b->tx.outs[b->exit_vouts[0]].value == 100000);
    // boarding input rides along with the operator funding
    CHECK(std::find(b->tx.ins.begin(), b->tx.ins.end(), p1.boardings().at(0).out) != b->tx.ins.end());
}

TEST_CASE("assemble_commitment: two swaps give batch, connector and change")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    REQUIRE(board_all(w, {&a, &b}, 5000));
    REQUIRE(a.request_swap({a.live().at(0)}));
    REQUIRE(b.request_swap({b.live().at(0)}));
    auto bundle = w.op.assemble_commitment();
    REQUIRE(bundle);
    CHECK(bundle->tx.outs.size() == 3);
    CHECK(bundle->batch->value == 10000);
    CHECK(bundle->connector->value == 660);
}

TEST_CASE("run_signing aborts before the operator signs its funds")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    REQUIRE(a.request_swap({a.live().at(0)}));
    REQUIRE(b.request_swap({b.live().at(0)}));
    a.fail_step = op::kForfeit;

    auto before = harness::derive_state(w.chain, w.log);
    auto released = w.log.commitments.size();
    auto bundle = w.op.assemble_commitment();
    REQUIRE(bundle);
    int step = 0;
    std::string who;
    try {
        w.op.run_signing(*bundle);
    } catch (const SessionAborted& e) {
        step = e.step();
        who = e.party();
    }
    CHECK(step == op::kForfeit);
    CHECK(who == "a");
    for (std::size_t i = 0; i < bundle->funding_inputs; ++i)
        CHECK((i >= bundle->tx.wits.size() || bundle->tx.wits[i].sigs.empty()));
    CHECK(w.log.commitments.size() == released);
    CHECK(harness::derive_state(w.chain, w.log) == before);
}

TEST_CASE("commit_round retries without the party that aborted")
{
    sim::WorldConfig cfg = manual_cfg();
    cfg.policy = {2, INT_MAX};
    sim::World w(cfg);
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    a.intent = b.intent = Intent::Manual;
    a.fail_step = op::kTree;
    REQUIRE(a.board(100000));
    REQUIRE(b.board(100000));
    REQUIRE(run_until(w, [&] { return count_state(b, VState::Live) == 1; }));
    CHECK(count_state(a, VState::Live) == 0);
    bool aborted = false;
    for (auto& e : w.op.events())
        if (e.type == "abort" && e.data["party"] == "a" && e.data["step"] == op::kTree) aborted = true;
    CHECK(aborted);
}

TEST_CASE("submit_and_track: confirmation moves leaves to confirmedVTXO")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    REQUIRE(board_all(w, {&a}));
    auto v = a.live().at(0);
    CHECK(w.op.book().confirmedVTXO.count(v));
    CHECK(w.op.book().confirmedBatches.size() == 1);
    CHECK(w.op.book().unconfirmed.empty());
}

TEST_CASE("submit_and_track: late commitment is rolled back after t_r, then reconciled")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    REQUIRE(board_all(w, {&a}));
    auto v = a.live().at(0);
    REQUIRE(a.request_swap({v}));
    // 2k-1 = 11 rounds in the mempool, past t_r = 10
    w.chain.set_policy({[&](const Tx&, const PartyId& by, Height) { return by == w.op.id() ? 2 * w.params().k - 1 : 0; }, {}});
    auto bundle = commit_now(w);
    REQUIRE(bundle);
    CHECK(w.op.book().unconfirmed.count(bundle->txid()));
    w.run(w.params().t_r + 1);
    REQUIRE_FALSE(w.chain.tip_view().contains(bundle->txid()));
    int rollbacks = 0;
    for (auto& e : w.op.events())
        if (e.type == "rollback") ++rollbacks;
    CHECK(rollbacks == 1);
    CHECK(w.op.book().toBatchSwap.size() == 1);

    // it lands anyway; the requeued swap must not be served twice
    w.chain.set_policy({});
    REQUIRE(run_until(w, [&] { return w.chain.stable_view().contains(bundle->txid()); }, 4 * w.params().k));
    w.run(1);
    CHECK(w.op.book().toBatchSwap.empty());
    CHECK(w.op.book().confirmedBatchSwaps.count(bundle->txid()));
    CHECK_FALSE(w.op.book().confirmedVTXO.count(v));
}

TEST_CASE("sweep: expired unspent batch")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    a.claim = false;
    REQUIRE(board_all(w, {&a}));
    Height T = a.vtxos().begin()->second.expiry;
    Amount before = w.op.balance(w.chain.tip_view());
    REQUIRE(run_until(w, [&] { return w.tip() >= T + 1; }, T + 10));
    w.run(2);
    CHECK(submits(w.op, "sweep") == 1);
    CHECK(w.op.balance(w.chain.tip_view()) == before + 100000);
}

TEST_CASE("sweep: partly unrolled batch sweeps the untouched subtrees")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    auto& c = w.add_wallet("c", 500000);
    auto& d = w.add_wallet("d", 500000);
    REQUIRE(board_all(w, {&a, &b, &c, &d}));
    Height T = a.vtxos().begin()->second.expiry;
    Amount op_before = w.op.balance(w.chain.tip_view());
    Amount a_before = a.onchain(w.chain.tip_view());

    auto v = a.live().at(0);
    CHECK(a.unilateral_exit(v) == 3);   // root, inner node, leaf
    REQUIRE(run_until(w, [&] { return w.tip() >= T + 3; }, T + 10));
    CHECK(submits(w.op, "sweep") == 2);   // sibling subtree at each unrolled level
    CHECK(w.op.balance(w.chain.tip_view()) == op_before + 300000);
    CHECK(a.onchain(w.chain.tip_view()) == a_before + 100000);
}

TEST_CASE("watch_step: forfeit answers an unroll of a swapped vtxo")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    CHECK(w.op.watch_step().empty());

    auto old = a.live().at(0);
    auto history = a.vtxos().at(old).path;
    REQUIRE(a.request_swap({old}));
    REQUIRE(commit_now(w));
    REQUIRE(run_until(w, [&] { return a.vtxos().at(old).state == VState::Forfeited; }));

    // a now tries to take the old vtxo back
    for (auto& tx : history) w.chain.submit(tx, "a");
    REQUIRE(run_until(w, [&] { return !w.chain.tip_view().unspent(old) && w.chain.tip_view().exists(old); }, 40));
    auto spender = w.chain.tip_view().spender(old);
    REQUIRE(spender);
    CHECK(w.chain.submitter(*spender) == std::optional<PartyId>(w.op.id()));
    CHECK(submits(w.op, "forfeit") == 1);
    // well before the owner's t_u delay could have run out
    CHECK(*w.chain.tx_height(*spender) < *w.chain.tx_height(old.txid) + w.params().t_u);
}

TEST_CASE("watch_step: reset answers an unroll of an ark-spent vtxo")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    b.auto_swap = false;
    auto v = a.live().at(0);
    auto history = a.vtxos().at(v).path;
    auto pay = a.pay(b.pk(), 100000);
    REQUIRE(pay);
    REQUIRE(b.receive_payment(*pay));

    for (auto& tx : history) w.chain.submit(tx, "a");
    REQUIRE(run_until(w, [&] { return submits(w.op, "reset") == 1; }, 40));
    w.run(2);
    auto spender = w.chain.tip_view().spender(v);
    REQUIRE(spender);
    CHECK(*spender == pay->resets.at(0).txid());
}

TEST_CASE("handover between operators")
{
    scen::RunConfig c;
    c.scenario = "handover";
    auto r = scen::run_scenario(c);
    for (auto& v : r.verdicts) CHECK_MESSAGE(v.pass, v.name << ": " << v.detail);
}

TEST_CASE("property: book lists partition every vtxo over random swaps")
{
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        sim::WorldConfig cfg;
        cfg.seed = seed;
        sim::World w(cfg);
        harness::Monitor mon(w);
        std::vector<wallet::Wallet*> ws;
        for (int i = 0; i < 4; ++i) {
            auto& wl = w.add_wallet("u" + std::to_string(i), 400000);
            wl.intent = Intent::Refresh;
            wl.refresh_window = 4 * w.params().k;
            ws.push_back(&wl);
        }
        for (auto* wl : ws) wl->board(50000 + 10000 * static_cast<Amount>(seed));
        std::mt19937_64 rng(seed);
        for (int r = 0; r < 120; ++r) {
            if (rng() % 7 == 0) {
                auto* from = ws[rng() % ws.size()];
                auto* to = ws[rng() % ws.size()];
                if (from != to)
                    if (auto p = from->pay(to->pk(), 1000 + static_cast<Amount>(rng() % 5000))) to->receive_payment(*p);
            }
            w.round();
        }
        CHECK_MESSAGE(mon.list_machine().pass, mon.list_machine().detail);
        CHECK_MESSAGE(mon.oracle_agreement().pass, mon.oracle_agreement().detail);
        CHECK(harness::check_single_spend(w.op).pass);
    }
}
