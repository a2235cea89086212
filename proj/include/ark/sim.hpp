#pragma once

// A world: one ledger, one operator, any number of wallets, and the
// transcript log the oracle reads.

#include "ark/wallet.hpp"

#include <memory>
#include <random>

namespace ark::sim {

// Every commitment and ark tx the operator released, in order.
struct TranscriptLog : op::TranscriptSink {
    std::vector<op::CommitmentBundle> commitments;
    std::vector<op::ArkSigned> arks;

    void commitment(const op::CommitmentBundle& b) override { commitments.push_back(b); }
    void ark(const std::vector<Tx>& resets, const Tx& a) override { arks.push_back({resets, a}); }
};

struct WorldConfig {
    core::Params params;
    std::uint64_t seed = 1;
    op::BatchingPolicy policy;
    Amount operator_funds = 100'000'000;
    std::string operator_name = "O";
};

class World {
public:
    explicit World(WorldConfig cfg);

    // Only before the first round: mints `onchain` sats to the wallet key.
    wallet::Wallet& add_wallet(const std::string& name, Amount onchain);
    wallet::Wallet& w(const std::string& name);
    const std::vector<std::unique_ptr<wallet::Wallet>>& wallets() const { return wallets_; }

    // Wallets step, operator steps, hook runs, then a block is mined.
    void round();
    void run(Height rounds);
    void run_until(Height tip);

    const WorldConfig& config() const { return cfg_; }
    const core::Params& params() const { return cfg_.params; }
    Height tip() const { return chain.tip(); }
    std::mt19937_64& rng() { return rng_; }

    Ledger chain;
    op::Operator op;
    TranscriptLog log;
    Amount operator_initial = 0;
    // Called after the operator step, before the block; the view then
    // matches what both the operator and the oracle see.
    std::function<void(World&)> on_round;

private:
    WorldConfig cfg_;
    std::vector<std::unique_ptr<wallet::Wallet>> wallets_;
    std::mt19937_64 rng_;
};

crypto::KeyPair party_keys(const std::string& name, std::uint64_t seed);

} // namespace ark::sim
