#pragma once

// Virtual-size model for the transaction shapes Ark produces.

#include "ark/ledger.hpp"

namespace ark::footprint {

struct Shape {
    int keypath_ins = 0;
    int scriptpath_ins = 0;
    int p2tr_outs = 0;
    int anchor_outs = 0;
};

// Constants in half-vbyte units so every value is an exact integer.
struct SizeModel {
    std::int64_t overhead2 = 0;
    std::int64_t keypath_in2 = 0;
    std::int64_t scriptpath_in2 = 0;
    std::int64_t p2tr_out2 = 0;
    std::int64_t anchor_out2 = 0;
};

// Solves the calibration system for the measured commitment (197), node (150)
// and leaf (107) sizes. The node and leaf equations only fix
// scriptpath_in + anchor_out, so the anchor is pinned to a pay-to-anchor
// output: 8-byte value, 1-byte length, 4-byte script.
SizeModel calibrate(std::int64_t overhead2 = 21, std::int64_t p2tr2 = 86, std::int64_t anchor2 = 26);
const SizeModel& model();

std::int64_t vbytes(const Shape& s, const SizeModel& m = model());
int ceil_log2(std::int64_t n);

// Sats to unilaterally exit one leaf of a binary batch of n.
Amount exit_cost(std::int64_t n, double fee_rate);
std::int64_t exit_vbytes(std::int64_t n);

// Zero-value AlwaysTrue outputs count as anchors, everything else as P2TR.
Shape shape_of(const Tx& tx);
Amount fee_for(const Tx& tx, double fee_rate);

std::string cost_table_csv(const std::vector<std::int64_t>& ns, double fee_rate);

} // namespace ark::footprint
