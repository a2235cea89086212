#pragma once

// Canned scenarios with their attached checks, plus the trace drivers the
// acceptance suite runs (liveness races, abort injection, ff enumeration).

#include "ark/fastfinality.hpp"
#include "ark/harness.hpp"

namespace ark::scen {

struct RunConfig {
    std::string scenario;
    std::uint64_t seed = 1;
    core::Params params;
    bool ff = false;            // nonce-bound vtxos everywhere
    int delta = 1;              // ff gossip bound
    Amount collateral = 0;      // 0: twice the opted-in value plus one
    int users = 8;              // bank_run size
};

// Strict: unknown keys, wrong types and invalid parameters throw Config.
RunConfig parse_config(const io::json& j);
io::json config_to_json(const RunConfig& c);

struct Report {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<harness::Verdict> verdicts;
    std::map<std::string, Amount> balances;
    std::map<std::string, std::int64_t> footprint;
    io::json events = io::json::array();
    io::json extra = io::json::object();

    bool ok() const;
    io::json to_json() const;
    std::string dump() const;   // canonical text, stable across runs
};

const std::vector<std::string>& scenario_names();
// Throws Error(UnknownScenario) or Error(Config).
Report run_scenario(const RunConfig& cfg);

// ---- drivers

struct LivenessResult {
    int traces = 0;
    int confirmed = 0;   // whole path onchain before expiry
    int lost = 0;
    std::string first_loss;
};
// 4-leaf batch; the exit starts `late` rounds after T - 2k - 1. samples <= 0
// enumerates every delay assignment over the path.
LivenessResult liveness(int k, int late, int samples, std::uint64_t seed);

struct AtomicityResult {
    int traces = 0;
    int aborts = 0;
    int requests = 0;
    int violations = 0;
    std::set<int> steps_hit;
    std::string first_violation;
};
AtomicityResult atomicity(int traces, std::uint64_t seed);

struct FfEnumResult {
    int traces = 0;
    int both_accepted = 0;
    int unburned = 0;
    int deterrence_failures = 0;   // c <= realized gain
    int wrong_key = 0;
    Amount collateral = 0;
    Amount max_gain = 0;
};
// Every (t_A, t_B, d_AB, d_BA) schedule for Δ = 1..max_delta, Byzantine operator.
FfEnumResult ff_enumerate(int max_delta, std::uint64_t seed);
// Randomized double-signs; returns how many extractions gave the exact key.
int ff_extraction(int cases, std::uint64_t seed);

struct ExitScaling {
    std::int64_t n = 0;
    std::size_t txs = 0;
    std::int64_t vbytes = 0;
    bool confirmed = false;
};
ExitScaling exit_scaling(std::int64_t n);

} // namespace ark::scen
