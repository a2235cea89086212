#include "ark/arkcore.hpp"

#include <doctest.h>

#include <random>

using namespace ark;

namespace {

struct Fixture {
    crypto::KeyPair a = crypto::keygen_from_label("alice");
    crypto::KeyPair b = crypto::keygen_from_label("bob");
    Ledger chain{2};
    OutPoint coin;

    explicit Fixture(Amount v = 1000, int k = 2) : chain(k)
    {
        chain.register_party("alice");
        chain.register_party("bob");
        coin = chain.mint(v, script::key_lock(a.pk));
    }

    Tx pay(const OutPoint& in, Amount in_value, Amount out, const crypto::PublicKey& to, std::uint32_t tag = 0)
    {
        Tx tx;
        tx.ins.push_back(in);
        tx.outs.push_back({out, script::key_lock(to)});
        tx.locktime = tag;
        core::sign_key_path(tx, 0, script::key_lock(a.pk), a.sk);
        (void)in_value;
        return tx;
    }
};

} // namespace

TEST_CASE("txid golden value")
{
    // serialization recomputed in python: u32le counts, 32-byte txid, u32le vout,
    // i64le value, lock commitment, u32le locktime; tagged "ark/txid"
    Tx tx;
    OutPoint in;
    in.txid.b.fill(0x11);
    in.vout = 2;
    tx.ins.push_back(in);
    tx.outs.push_back({1000, core::anchor_lock()});
    CHECK(tx.txid().hex() == "8776f4a1e969bd1b7b35840ea9c995adce19a0677bd81610131388efae0d0934");
}

TEST_CASE("submit")
{
    Fixture f;
    auto tx = f.pay(f.coin, 1000, 900, f.b.pk);
    CHECK(f.chain.submit(tx, "alice").accepted);
    f.chain.advance_round();
    CHECK(f.chain.tip_view().contains(tx.txid()));

    auto again = f.pay(f.coin, 1000, 800, f.b.pk, 1);
    auto r = f.chain.submit(again, "alice");
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == Reject::DoubleSpend);

    Fixture g;
    auto over = g.pay(g.coin, 1000, 1001, g.b.pk);
    r = g.chain.submit(over, "alice");
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == Reject::ValueCreated);

    // bob cannot sign for alice's coin
    Tx forged = g.pay(g.coin, 1000, 10, g.b.pk);
    core::sign_key_path(forged, 0, script::key_lock(g.a.pk), g.b.sk);
    CHECK(g.chain.submit(forged, "bob").reason == Reject::InvalidWitness);
    CHECK_THROWS_AS(g.chain.submit(forged, "mallory"), Error);
}

TEST_CASE("package submission orders parents first")
{
    Fixture f;
    auto parent = f.pay(f.coin, 1000, 900, f.a.pk);
    Tx child;
    child.ins.push_back({parent.txid(), 0});
    child.outs.push_back({800, script::key_lock(f.b.pk)});
    core::sign_key_path(child, 0, script::key_lock(f.a.pk), f.a.sk);
    CHECK(f.chain.submit(parent, "alice").accepted);
    CHECK(f.chain.submit(child, "alice").accepted);
    f.chain.advance_round();
    CHECK(f.chain.tip_view().contains(parent.txid()));
    CHECK(f.chain.tip_view().contains(child.txid()));
}

TEST_CASE("inclusion delay and stable views")
{
    const int k = 2;
    for (int delay : {0, 2 * k - 1}) {
        Fixture f(1000, k);
        f.chain.set_policy({[&](const Tx&, const PartyId&, Height) { return delay; }, {}});
        Height h = f.chain.tip();
        auto tx = f.pay(f.coin, 1000, 900, f.b.pk);
        REQUIRE(f.chain.submit(tx, "alice").accepted);
        while (f.chain.tip() < h + 1 + delay + k - 1) {
            f.chain.advance_round();
            CHECK_FALSE(f.chain.stable_view().contains(tx.txid()));
        }
        f.chain.advance_round();
        auto at = f.chain.tx_height(tx.txid());
        REQUIRE(at);
        CHECK(*at == h + 1 + delay);
        CHECK(*at <= h + 2 * k);
        CHECK(f.chain.stable_view().contains(tx.txid()));
    }
}

TEST_CASE("views by depth")
{
    Fixture f(1000, 3);
    auto tx = f.pay(f.coin, 1000, 900, f.b.pk);
    f.chain.submit(tx, "alice");
    f.chain.advance_round();
    CHECK(f.chain.view("bob", 0).contains(tx.txid()));
    CHECK_FALSE(f.chain.view("bob", 3).contains(tx.txid()));
    for (int i = 0; i < 3; ++i) f.chain.advance_round();
    CHECK(f.chain.view("bob", 3).contains(tx.txid()));
    CHECK_THROWS_AS(f.chain.view("nobody", 0), Error);
}

TEST_CASE("conflicting mempool txs: the policy picks one, the other is evicted")
{
    for (bool first_wins : {true, false}) {
        Fixture f;
        auto t1 = f.pay(f.coin, 1000, 900, f.b.pk, 1);
        auto t2 = f.pay(f.coin, 1000, 800, f.a.pk, 2);
        f.chain.set_policy({{}, [&](const MempoolEntry& x, const MempoolEntry& y) {
                                return first_wins ? x.seq < y.seq : x.seq > y.seq;
                            }});
        CHECK(f.chain.submit(t1, "alice").accepted);
        CHECK(f.chain.submit(t2, "alice").accepted);
        f.chain.advance_round();
        const auto& win = first_wins ? t1 : t2;
        const auto& lose = first_wins ? t2 : t1;
        CHECK(f.chain.tip_view().contains(win.txid()));
        CHECK_FALSE(f.chain.tip_view().contains(lose.txid()));
        CHECK_FALSE(f.chain.in_mempool(lose.txid()));
        for (int i = 0; i < 5; ++i) f.chain.advance_round();
        CHECK(f.chain.stable_view().contains(win.txid()));
    }
}

TEST_CASE("relative timelock counted from input confirmation")
{
    Fixture f;
    auto lock = core::vtxo_lock(f.a.pk, f.b.pk, 4);
    Tx fund = f.pay(f.coin, 1000, 1000, f.a.pk);
    fund.outs[0].lock = lock;
    core::sign_key_path(fund, 0, script::key_lock(f.a.pk), f.a.sk);
    f.chain.submit(fund, "alice");
    f.chain.advance_round();
    Height c = *f.chain.tx_height(fund.txid());
    Tx claim = core::claim_tx({fund.txid(), 0}, fund.outs[0], f.a.pk);
    core::sign_single(claim, 0, lock, core::kUnilateralPath, f.a.sk);
    // next block c+1 .. c+3 too early
    for (Height h = f.chain.tip() + 1; h < c + 4; ++h) {
        CHECK(f.chain.submit(claim, "alice").reason == Reject::InvalidWitness);
        f.chain.advance_round();
    }
    CHECK(f.chain.submit(claim, "alice").accepted);
}

TEST_CASE("property: every delay lands the tx by h + 2k")
{
    for (int k : {2, 3}) {
        for (int d = 0; d <= 2 * k + 3; ++d) {
            Fixture f(1000, k);
            f.chain.set_policy({[&](const Tx&, const PartyId&, Height) { return d; }, {}});
            for (int i = 0; i < 3; ++i) f.chain.advance_round();
            Height h = f.chain.tip();
            auto tx = f.pay(f.coin, 1000, 500, f.b.pk);
            REQUIRE(f.chain.submit(tx, "alice").accepted);
            while (f.chain.tip() < h + 3 * k) f.chain.advance_round();
            auto at = f.chain.tx_height(tx.txid());
            REQUIRE(at);
            CHECK(*at <= h + 2 * k);
            CHECK(f.chain.at(*at + k).contains(tx.txid()));
        }
    }
}

TEST_CASE("property: persistence and conservation over random traces")
{
    std::mt19937_64 rng(99);
    for (int trace = 0; trace < 20; ++trace) {
        crypto::KeyPair a = crypto::keygen_from_label("alice");
        Ledger chain(2);
        chain.register_party("alice");
        chain.set_policy({[&](const Tx&, const PartyId&, Height) { return static_cast<int>(rng() % 4); }, {}});
        std::vector<std::pair<OutPoint, Amount>> coins;
        for (int i = 0; i < 4; ++i) coins.push_back({chain.mint(10000, script::key_lock(a.pk)), 10000});
        std::map<TxId, Height> stable_at;
        Amount last_total = chain.utxo_total(chain.tip());
        for (int round = 0; round < 30; ++round) {
            if (!coins.empty() && rng() % 2) {
                auto idx = rng() % coins.size();
                auto [pt, v] = coins[idx];
                Tx tx;
                tx.ins.push_back(pt);
                Amount keep = v - static_cast<Amount>(rng() % 50);
                tx.outs.push_back({keep / 2, script::key_lock(a.pk)});
                tx.outs.push_back({keep - keep / 2, script::key_lock(a.pk)});
                core::sign_key_path(tx, 0, script::key_lock(a.pk), a.sk);
                if (chain.submit(tx, "alice").accepted && tx.outs[0].value > 0) {
                    coins.erase(coins.begin() + static_cast<long>(idx));
                    coins.push_back({{tx.txid(), 0}, tx.outs[0].value});
                    coins.push_back({{tx.txid(), 1}, tx.outs[1].value});
                }
            }
            chain.advance_round();
            Amount total = chain.utxo_total(chain.tip());
            CHECK(total <= last_total);
            last_total = total;
            auto sv = chain.stable_view();
            for (auto& [id, h] : stable_at) {
                CHECK(sv.contains(id));
                CHECK(*sv.tx_height(id) == h);
            }
            for (Height h = 0; h <= sv.height(); ++h)
                for (auto& tx : chain.blocks()[static_cast<std::size_t>(h)].txs) stable_at.emplace(tx.txid(), h);
        }
    }
}

TEST_CASE("dump is one JSON object per block")
{
    Fixture f;
    f.chain.advance_round();
    f.chain.advance_round();
    auto d = f.chain.dump_jsonl();
    CHECK(std::count(d.begin(), d.end(), '\n') == 3);
}
