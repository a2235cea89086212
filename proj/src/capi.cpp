#include "ark/ark.h"

#include "ark/bench.hpp"
#include "ark/footprint.hpp"
#include "ark/scenarios.hpp"

#include <cstring>

struct ark_ctx {
    std::uint64_t runs = 0;
};

namespace {

void set_err(char* err, size_t errlen, const std::string& m)
{
    if (!err || errlen == 0) return;
    size_t n = std::min(errlen - 1, m.size());
    std::memcpy(err, m.data(), n);
    err[n] = '\0';
}

char* dup(const std::string& s)
{
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

int code_of(ark::Errc c)
{
    switch (c) {
    case ark::Errc::UnknownScenario: return ARK_ERR_UNKNOWN;
    case ark::Errc::Config:
    case ark::Errc::Parse: return ARK_ERR_CONFIG;
    case ark::Errc::InvalidArgument: return ARK_ERR_ARGUMENT;
    default: return ARK_ERR_INTERNAL;
    }
}

template <class F>
int guarded(char* err, size_t errlen, F&& f)
{
    set_err(err, errlen, "");
    try {
        return f();
    } catch (const ark::Error& e) {
        set_err(err, errlen, e.what());
        return code_of(e.code());
    } catch (const nlohmann::json::exception& e) {
        set_err(err, errlen, std::string("config: ") + e.what());
        return ARK_ERR_CONFIG;
    } catch (const std::exception& e) {
        set_err(err, errlen, e.what());
        return ARK_ERR_INTERNAL;
    } catch (...) {
        set_err(err, errlen, "unknown failure");
        return ARK_ERR_INTERNAL;
    }
}

} // namespace

extern "C" {

ark_ctx* ark_ctx_new(void)
{
    try {
        return new ark_ctx{};
    } catch (...) {
        return nullptr;
    }
}

void ark_ctx_free(ark_ctx* ctx) { delete ctx; }

int ark_scenario_names(char** json_out, char* err, size_t errlen)
{
    return guarded(err, errlen, [&] {
        if (!json_out) throw ark::Error(ark::Errc::InvalidArgument, "null output pointer");
        *json_out = dup(nlohmann::json(ark::scen::scenario_names()).dump());
        return ARK_OK;
    });
}

int ark_run_scenario(ark_ctx* ctx, const char* name, const char* config_json, char** report_out, int* ok_out,
                     char* err, size_t errlen)
{
    return guarded(err, errlen, [&] {
        if (!ctx || !name || !report_out || !ok_out) throw ark::Error(ark::Errc::InvalidArgument, "null argument");
        nlohmann::json j = nlohmann::json::object();
        if (config_json && *config_json) {
            try {
                j = nlohmann::json::parse(config_json);
            } catch (const nlohmann::json::parse_error& e) {
                throw ark::Error(ark::Errc::Config, std::string("config is not valid JSON: ") + e.what());
            }
        }
        if (!j.is_object()) throw ark::Error(ark::Errc::Config, "config must be a JSON object");
        if (j.contains("scenario") && j["scenario"] != name)
            throw ark::Error(ark::Errc::Config, "config names a different scenario");
        j["scenario"] = name;
        auto cfg = ark::scen::parse_config(j);
        auto rep = ark::scen::run_scenario(cfg);
        ++ctx->runs;
        *report_out = dup(rep.dump());
        *ok_out = rep.ok() ? 1 : 0;
        return ARK_OK;
    });
}

int ark_footprint_table(const int64_t* ns, size_t count, double fee_rate, char** csv_out, char* err, size_t errlen)
{
    return guarded(err, errlen, [&] {
        if (!csv_out || (count && !ns)) throw ark::Error(ark::Errc::InvalidArgument, "null argument");
        if (!(fee_rate >= 0)) throw ark::Error(ark::Errc::Config, "fee rate must be >= 0");
        std::vector<std::int64_t> v(ns, ns + count);
        for (auto n : v)
            if (n < 1) throw ark::Error(ark::Errc::Config, "n must be >= 1");
        *csv_out = dup(ark::footprint::cost_table_csv(v, fee_rate));
        return ARK_OK;
    });
}

int ark_footprint_vbytes(int keypath_ins, int scriptpath_ins, int p2tr_outs, int anchor_outs, int64_t* vbytes_out,
                         char* err, size_t errlen)
{
    return guarded(err, errlen, [&] {
        if (!vbytes_out) throw ark::Error(ark::Errc::InvalidArgument, "null argument");
        if (keypath_ins < 0 || scriptpath_ins < 0 || p2tr_outs < 0 || anchor_outs < 0 || keypath_ins + scriptpath_ins < 1)
            throw ark::Error(ark::Errc::Config, "counts must be >= 0 with at least one input");
        *vbytes_out = ark::footprint::vbytes({keypath_ins, scriptpath_ins, p2tr_outs, anchor_outs});
        return ARK_OK;
    });
}

int ark_bench_commit(ark_ctx* ctx, const int64_t* ns, size_t count, int reps, char** json_out, char* err,
                     size_t errlen)
{
    return guarded(err, errlen, [&] {
        if (!ctx || !json_out) throw ark::Error(ark::Errc::InvalidArgument, "null argument");
        std::vector<std::int64_t> v = ns ? std::vector<std::int64_t>(ns, ns + count) : ark::bench::default_ns();
        auto r = ark::bench::bench_commit(v, reps);
        nlohmann::json rows = nlohmann::json::array();
        for (auto& row : r.rows) rows.push_back({{"n", row.n}, {"seconds", row.seconds}});
        nlohmann::json j{{"rows", rows}, {"fitted", r.fitted}};
        if (r.fitted) {
            j["a0"] = r.a0;
            j["a1"] = r.a1;
            j["r2"] = r.r2;
        }
        *json_out = dup(j.dump());
        return ARK_OK;
    });
}

void ark_string_free(char* s) { std::free(s); }

} // extern "C"
