#include "ark/sim.hpp"

namespace ark::sim {

crypto::KeyPair party_keys(const std::string& name, std::uint64_t seed)
{
    return crypto::keygen_from_label("party/" + name + "/" + std::to_string(seed));
}

World::World(WorldConfig cfg)
    : chain(cfg.params.k),
      op(cfg.operator_name, party_keys(cfg.operator_name, cfg.seed), cfg.params, chain, cfg.policy),
      cfg_(std::move(cfg)), rng_(cfg_.seed)
{
    op.set_sink(&log);
    if (cfg_.operator_funds > 0) {
        chain.mint(cfg_.operator_funds, script::key_lock(op.pk()));
        operator_initial = cfg_.operator_funds;
    }
}

wallet::Wallet& World::add_wallet(const std::string& name, Amount onchain)
{
    for (auto& w : wallets_)
        if (w->id() == name) throw Error(Errc::InvalidArgument, "duplicate wallet " + name);
    auto keys = party_keys(name, cfg_.seed);
    wallets_.push_back(std::make_unique<wallet::Wallet>(name, keys, cfg_.params, chain, op));
    if (onchain > 0) chain.mint(onchain, script::key_lock(keys.pk));
    return *wallets_.back();
}

wallet::Wallet& World::w(const std::string& name)
{
    for (auto& w : wallets_)
        if (w->id() == name) return *w;
    throw Error(Errc::UnknownParty, "no wallet " + name);
}

void World::round()
{
    for (auto& w : wallets_) w->step();
    op.step();
    if (on_round) on_round(*this);
    chain.advance_round();
}

void World::run(Height rounds)
{
    for (Height i = 0; i < rounds; ++i) round();
}

void World::run_until(Height t)
{
    while (chain.tip() < t) round();
}

} // namespace ark::sim
