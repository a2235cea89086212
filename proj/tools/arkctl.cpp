// arkctl: run scenarios, print footprint tables, time commitment signing.
// Talks to the simulator only through the C API.

#include "ark/ark.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct CStr {
    char* p = nullptr;
    ~CStr() { ark_string_free(p); }
};

using Ctx = std::unique_ptr<ark_ctx, decltype(&ark_ctx_free)>;

bool write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    f << text;
    return static_cast<bool>(f);
}

void summarize(const json& rep)
{
    std::cout << rep.value("scenario", "?") << " (seed " << rep.value("seed", 0) << ")\n";
    for (auto& v : rep["verdicts"])
        std::cout << "  " << (v["pass"].get<bool>() ? "PASS " : "FAIL ") << v["name"].get<std::string>() << ": "
                  << v["detail"].get<std::string>() << "\n";
    for (auto& [party, sats] : rep["balances"].items()) std::cout << "  balance " << party << " " << sats << "\n";
    std::cout << (rep["ok"].get<bool>() ? "OK" : "FAILED") << "\n";
}

struct RunOpts {
    std::string scenario;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::string config, out;
    bool unsafe = false, no_resets = false, ff = false;
    double fee_rate = -1;
};

int cmd_run(const RunOpts& o)
{
    json cfg = json::object();
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) {
            std::cerr << "error: cannot read config " << o.config << "\n";
            return kExitConfig;
        }
        std::stringstream ss;
        ss << f.rdbuf();
        try {
            cfg = json::parse(ss.str());
        } catch (const json::parse_error& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
            return kExitConfig;
        }
        if (!cfg.is_object()) {
            std::cerr << "error: config must be a JSON object\n";
            return kExitConfig;
        }
    }
    std::string name = o.scenario;
    if (name.empty() && cfg.contains("scenario") && cfg["scenario"].is_string()) name = cfg["scenario"];
    if (name.empty()) {
        std::cerr << "error: no scenario given\n";
        return kExitConfig;
    }
    if (o.seed_set) cfg["seed"] = o.seed;
    if (o.unsafe) cfg["unsafe"] = true;
    if (o.no_resets) cfg["resets"] = false;
    if (o.ff) cfg["ff"] = true;
    if (o.fee_rate >= 0) cfg["fee_rate"] = o.fee_rate;
    cfg["scenario"] = name;

    Ctx ctx(ark_ctx_new(), ark_ctx_free);
    CStr rep;
    int ok = 0;
    char err[512];
    int rc = ark_run_scenario(ctx.get(), name.c_str(), cfg.dump().c_str(), &rep.p, &ok, err, sizeof err);
    if (rc == ARK_ERR_CONFIG || rc == ARK_ERR_UNKNOWN) {
        std::cerr << "error: " << err << "\n";
        return kExitConfig;
    }
    if (rc != ARK_OK) {
        std::cerr << "error: " << err << "\n";
        return kExitFail;
    }
    summarize(json::parse(rep.p));
    if (!o.out.empty() && !write_file(o.out, rep.p)) {
        std::cerr << "error: cannot write " << o.out << "\n";
        return kExitConfig;
    }
    return ok ? kExitPass : kExitFail;
}

int cmd_footprint(const std::vector<std::int64_t>& ns, double fee_rate, const std::string& out)
{
    CStr csv;
    char err[512];
    int rc = ark_footprint_table(ns.data(), ns.size(), fee_rate, &csv.p, err, sizeof err);
    if (rc != ARK_OK) {
        std::cerr << "error: " << err << "\n";
        return kExitConfig;
    }
    std::cout << csv.p;
    if (!out.empty() && !write_file(out, csv.p)) return kExitConfig;
    return kExitPass;
}

int cmd_bench(const std::vector<std::int64_t>& ns, int reps, const std::string& out)
{
    Ctx ctx(ark_ctx_new(), ark_ctx_free);
    CStr res;
    char err[512];
    int rc = ark_bench_commit(ctx.get(), ns.data(), ns.size(), reps, &res.p, err, sizeof err);
    if (rc != ARK_OK) {
        std::cerr << "error: " << err << "\n";
        return rc == ARK_ERR_CONFIG ? kExitConfig : kExitFail;
    }
    json j = json::parse(res.p);
    std::cout << "n,seconds\n";
    for (auto& r : j["rows"]) std::printf("%lld,%.6f\n", static_cast<long long>(r["n"].get<std::int64_t>()), r["seconds"].get<double>());
    if (j["fitted"].get<bool>())
        std::printf("fit: t = %.6g + %.6g n, R^2 = %.4f\n", j["a0"].get<double>(), j["a1"].get<double>(), j["r2"].get<double>());
    else
        std::cout << "fit: needs two or more n\n";
    if (!out.empty() && !write_file(out, j.dump(2) + "\n")) return kExitConfig;
    return kExitPass;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ark protocol simulator"};
    app.require_subcommand(1);

    RunOpts ro;
    auto* run = app.add_subcommand("run", "Run a scenario and its checks");
    run->add_option("scenario", ro.scenario, "Scenario name (or set it in --config)");
    run->add_option("--seed", ro.seed, "RNG seed")->each([&](const std::string&) { ro.seed_set = true; });
    run->add_option("--config", ro.config, "JSON config file");
    run->add_option("--out", ro.out, "Write the report JSON here");
    run->add_flag("--unsafe", ro.unsafe, "Allow t_u <= 4k");
    run->add_flag("--no-resets", ro.no_resets, "Disable reset transactions");
    run->add_flag("--ff", ro.ff, "Enable fast finality");
    run->add_option("--fee-rate", ro.fee_rate, "Fee rate in sat/vB")->check(CLI::NonNegativeNumber);

    std::vector<std::int64_t> fp_ns{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
    double fp_rate = 6;
    std::string fp_out;
    auto* fp = app.add_subcommand("footprint", "Unilateral exit cost table (CSV)");
    fp->add_option("--n", fp_ns, "Batch sizes")->delimiter(',');
    fp->add_flag("--empty", [&](std::int64_t) { fp_ns.clear(); }, "No rows, header only");
    fp->add_option("--fee-rate", fp_rate, "Fee rate in sat/vB")->check(CLI::NonNegativeNumber);
    fp->add_option("--out", fp_out, "Also write the CSV here");

    std::vector<std::int64_t> b_ns{2, 8, 16, 32, 48, 64, 96, 128, 160, 192, 224, 256};
    int reps = 3;
    std::string b_out;
    auto* bench = app.add_subcommand("bench", "Time commitment assembly and signing");
    bench->add_option("--n", b_ns, "Batch sizes")->delimiter(',');
    bench->add_option("--reps", reps, "Repetitions per n (min is kept)")->check(CLI::PositiveNumber);
    bench->add_option("--out", b_out, "Write the result JSON here");

    auto* list = app.add_subcommand("list", "List scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitConfig;
    }

    if (*run) return cmd_run(ro);
    if (*fp) return cmd_footprint(fp_ns, fp_rate, fp_out);
    if (*bench) return cmd_bench(b_ns, reps, b_out);
    if (*list) {
        CStr names;
        char err[256];
        if (ark_scenario_names(&names.p, err, sizeof err) != ARK_OK) return kExitFail;
        for (auto& n : json::parse(names.p)) std::cout << n.get<std::string>() << "\n";
        return kExitPass;
    }
    return kExitConfig;
}
