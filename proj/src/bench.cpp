#include "ark/bench.hpp"

#include "ark/sim.hpp"

#include <chrono>
#include <limits>

namespace ark::bench {

std::vector<std::int64_t> default_ns() { return {2, 8, 16, 32, 48, 64, 96, 128, 160, 192, 224, 256}; }

static double time_one(std::int64_t n, std::uint64_t seed)
{
    sim::WorldConfig wc;
    wc.seed = seed;
    // never trigger on its own; the commitment is built by hand below
    wc.policy.min_requests = std::numeric_limits<int>::max();
    wc.policy.max_wait = std::numeric_limits<int>::max();
    sim::World w(wc);
    std::vector<wallet::Wallet*> us;
    for (std::int64_t i = 0; i < n; ++i) {
        auto& wl = w.add_wallet("b" + std::to_string(i), 200000);
        wl.intent = wallet::Intent::Manual;
        wl.board(100000);
        us.push_back(&wl);
    }
    for (int i = 0; i < 8 * w.params().k + 20 && w.op.pending_requests() < static_cast<std::size_t>(n); ++i) w.round();
    if (w.op.pending_requests() < static_cast<std::size_t>(n))
        throw Error(Errc::Precondition, "bench: only " + std::to_string(w.op.pending_requests()) + " of " +
                                            std::to_string(n) + " boardings queued");
    auto t0 = std::chrono::steady_clock::now();
    auto b = w.op.assemble_commitment();
    w.op.run_signing(*b);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

BenchResult bench_commit(const std::vector<std::int64_t>& ns, int reps)
{
    BenchResult r;
    for (auto n : ns) {
        if (n < 1) throw Error(Errc::Config, "bench: n must be >= 1");
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < std::max(reps, 1); ++i) best = std::min(best, time_one(n, 1 + i));
        r.rows.push_back({n, best});
    }
    fit_linear(r);
    return r;
}

void fit_linear(BenchResult& r)
{
    r.fitted = false;
    const double m = static_cast<double>(r.rows.size());
    if (r.rows.size() < 2) return;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& row : r.rows) {
        double x = static_cast<double>(row.n);
        sx += x;
        sy += row.seconds;
        sxx += x * x;
        sxy += x * row.seconds;
    }
    double den = m * sxx - sx * sx;
    if (den == 0) return;
    r.a1 = (m * sxy - sx * sy) / den;
    r.a0 = (sy - r.a1 * sx) / m;
    double mean = sy / m, ss_tot = 0, ss_res = 0;
    for (auto& row : r.rows) {
        double e = row.seconds - (r.a0 + r.a1 * static_cast<double>(row.n));
        ss_res += e * e;
        ss_tot += (row.seconds - mean) * (row.seconds - mean);
    }
    r.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    r.fitted = true;
}

} // namespace ark::bench
