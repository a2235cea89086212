#pragma once

// Wall-clock timing of commitment assembly plus signing, with a linear fit.

#include <cstdint>
#include <vector>

namespace ark::bench {

struct BenchRow {
    std::int64_t n = 0;
    double seconds = 0;   // min over reps
};

struct BenchResult {
    std::vector<BenchRow> rows;
    double a0 = 0, a1 = 0, r2 = 0;
    bool fitted = false;   // needs at least two distinct n
};

std::vector<std::int64_t> default_ns();
BenchResult bench_commit(const std::vector<std::int64_t>& ns, int reps = 3);
// Least squares t = a0 + a1 n.
void fit_linear(BenchResult& r);

} // namespace ark::bench
