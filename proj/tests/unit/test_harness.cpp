#include "world_util.hpp"

#include "ark/scenarios.hpp"

#include <doctest.h>

using namespace ark;
using namespace testutil;
using wallet::VState;

namespace {

const harness::Verdict* find(const scen::Report& r, const std::string& name)
{
    for (auto& v : r.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

} // namespace

TEST_CASE("oracle on an empty run")
{
    sim::World w(manual_cfg());
    w.add_wallet("a", 1000);
    w.run(5);
    auto s = harness::derive_state(w.chain, w.log);
    CHECK(s.C.empty());
    CHECK(s.F.empty());
    CHECK(s.S.empty());
    CHECK(harness::book_state(w.op.book(), w.tip()) == s);
}

TEST_CASE("oracle tracks board, pay and swap")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    auto& b = w.add_wallet("b", 500000);
    REQUIRE(board_all(w, {&a, &b}));
    auto s = harness::derive_state(w.chain, w.log);
    CHECK(s.C.size() == 2);
    b.auto_swap = false;
    auto v = a.live().at(0);
    auto p = a.pay(b.pk(), 25000);
    REQUIRE(p);
    REQUIRE(b.receive_payment(*p));
    s = harness::derive_state(w.chain, w.log);
    CHECK(s.S.count(v));
    CHECK(s.F.size() == p->ark.outs.size());
    CHECK_MESSAGE(harness::book_state(w.op.book(), w.tip()) == s,
                  harness::diff(s, harness::book_state(w.op.book(), w.tip())));
}

TEST_CASE("every scenario passes at the defaults")
{
    for (auto& name : scen::scenario_names()) {
        CAPTURE(name);
        scen::RunConfig c;
        c.scenario = name;
        c.ff = name == "ff_double_spend";
        auto r = scen::run_scenario(c);
        CHECK(r.scenario == name);
        CHECK_FALSE(r.verdicts.empty());
        for (auto& v : r.verdicts) CHECK_MESSAGE(v.pass, name << "/" << v.name << ": " << v.detail);
        CHECK(r.ok());
    }
}

TEST_CASE("hostage attack without resets loses exactly the cross-batch vtxo")
{
    scen::RunConfig c;
    c.scenario = "hostage_attack";
    c.params.resets = false;
    auto r = scen::run_scenario(c);
    CHECK_FALSE(r.ok());
    Amount loss = r.extra["operator_loss"].get<Amount>();
    CHECK(loss > 0);
    CHECK(loss == r.extra["cross_batch_vtxo"].get<Amount>());
    auto* t4 = find(r, "T4-conservation");
    REQUIRE(t4);
    CHECK_FALSE(t4->pass);
    CHECK(t4->detail.find("operator loss " + std::to_string(loss)) != std::string::npos);
    auto* why = find(r, "deficit-explained");
    REQUIRE(why);
    CHECK(why->pass);
}

TEST_CASE("unknown scenario")
{
    scen::RunConfig c;
    c.scenario = "no_such_thing";
    try {
        scen::run_scenario(c);
        FAIL("expected UnknownScenario");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownScenario);
    }
}

TEST_CASE("runs are deterministic per seed")
{
    scen::RunConfig c;
    c.scenario = "happy_path";
    c.seed = 5;
    auto a = scen::run_scenario(c).dump();
    auto b = scen::run_scenario(c).dump();
    CHECK(a == b);
    c.seed = 6;
    CHECK(scen::run_scenario(c).ok());
}

TEST_CASE("parse_config is strict")
{
    auto code = [](const char* text) {
        try {
            scen::parse_config(io::json::parse(text));
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::InvalidArgument;   // stand-in for "accepted"
    };
    CHECK(code(R"({"seed": 3, "k": 2, "t_u": 9, "t_e": 30})") == Errc::InvalidArgument);
    CHECK(code(R"({"sede": 3})") == Errc::Config);
    CHECK(code(R"({"k": "6"})") == Errc::Config);
    CHECK(code(R"({"seed": -1})") == Errc::Config);
    CHECK(code(R"({"resets": 1})") == Errc::Config);
    CHECK(code(R"([1, 2])") == Errc::Config);
    CHECK(code(R"({"delta": 0})") == Errc::Config);
    CHECK(code(R"({"users": 0})") == Errc::Config);
    // t_u must clear 4k unless explicitly unsafe
    CHECK(code(R"({"k": 6, "t_u": 24})") == Errc::Config);
    CHECK(code(R"({"k": 6, "t_u": 24, "unsafe": true})") == Errc::InvalidArgument);

    auto c = scen::parse_config(io::json::parse(R"({"scenario": "bank_run", "users": 4, "fee_rate": 1.5})"));
    CHECK(c.scenario == "bank_run");
    CHECK(c.users == 4);
    CHECK(c.params.fee_rate == doctest::Approx(1.5));
    // round trip
    auto back = scen::parse_config(scen::config_to_json(c));
    CHECK(scen::config_to_json(back) == scen::config_to_json(c));
}

TEST_CASE("T1 check flags a spend the owner never signed through the wallet")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    REQUIRE(board_all(w, {&a}));
    auto v = a.live().at(0);
    a.claim = false;
    REQUIRE(a.unilateral_exit(v) > 0);
    REQUIRE(run_until(w, [&] { return w.chain.tip_view().exists(v); }, 40));
    CHECK(harness::check_t1_safety(w).pass);

    // key material used outside the wallet: T1 must notice
    auto& rec = a.vtxos().at(v);
    Tx claim = core::claim_tx(v, rec.out, a.pk());
    core::sign_single(claim, 0, rec.out.lock, core::kUnilateralPath, a.keys().sk);
    REQUIRE(run_until(w, [&] { return w.chain.submit(claim, "a").accepted; }, 60));
    w.run(1);
    CHECK_FALSE(harness::check_t1_safety(w).pass);
}

TEST_CASE("conservation identity on a quiet run")
{
    sim::World w(manual_cfg());
    auto& a = w.add_wallet("a", 500000);
    a.claim = false;
    REQUIRE(board_all(w, {&a}));
    REQUIRE(run_until(w, [&] { return w.tip() >= harness::settle_height(w); }, 400));
    auto c = harness::conservation(w);
    // the vtxo was never touched, so it falls back to the operator
    CHECK(c.unclaimed == 100000);
    CHECK(c.deficit() == 0);
}
