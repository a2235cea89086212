#pragma once

// Offchain state oracle and the property checkers run over traces.

#include "ark/sim.hpp"

namespace ark::harness {

// C: confirmed vtxos, F: preconfirmed ark outputs, S: spent.
struct ArkState {
    std::set<OutPoint> C, F, S;
    bool operator==(const ArkState&) const = default;
    io::json to_json() const;
};

// Value, expiry and owner key of every vtxo the transcripts mention.
struct VtxoIndex {
    std::map<OutPoint, Output> out;
    std::map<OutPoint, Height> expiry;
    std::set<OutPoint> leaves;     // of stable commitments
    std::set<OutPoint> ark_outs;
};

// Reads only the chain and the released transcripts, never the operator book.
VtxoIndex index_vtxos(const Ledger& chain, const sim::TranscriptLog& log);
ArkState derive_state(const Ledger& chain, const sim::TranscriptLog& log);
// The operator's lists read as (C, F, S).
ArkState book_state(const op::OperatorBook& book, Height tip);
std::string diff(const ArkState& oracle, const ArkState& book);

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
    io::json to_json() const { return {{"name", name}, {"pass", pass}, {"detail", detail}}; }
};

// Per-round checks, installed as the world's on_round hook.
class Monitor {
public:
    // Installs itself as w.on_round; chain further hooks through check().
    explicit Monitor(sim::World& w);
    void check(sim::World& w);

    Verdict oracle_agreement() const;
    Verdict transitions() const;
    Verdict list_machine() const;
    std::size_t rounds() const { return rounds_; }
    const ArkState& last() const { return last_; }
    // Keep the oracle running but stop comparing it to the book (dishonest operator runs).
    bool compare_book = true;

private:
    std::size_t rounds_ = 0;
    ArkState last_;
    std::string agreement_error_, transition_error_, list_error_;
    std::size_t agreement_failures_ = 0, transition_failures_ = 0, list_failures_ = 0;
};

// The operator never co-signs two different spends of one vtxo.
Verdict check_single_spend(const op::Operator& o);

// Every onchain spend of a vtxo carries a digest its owner's wallet signed.
Verdict check_t1_safety(const sim::World& w);

// Operator balance identity: final = initial + realized fees + X, where X is
// the value of vtxos that ended unspent offchain and so fell back to the operator.
struct Conservation {
    Height at = 0;
    Amount initial = 0;
    Amount final_balance = 0;
    Amount fees = 0;
    Amount unclaimed = 0;   // X
    Amount expected() const { return initial + fees + unclaimed; }
    Amount deficit() const { return expected() - final_balance; }
    io::json to_json() const;
};
Conservation conservation(const sim::World& w);
// Height from which the identity must hold: h_last + 4k + t_e.
Height settle_height(const sim::World& w);

} // namespace ark::harness
