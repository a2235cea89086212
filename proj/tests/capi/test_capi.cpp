#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ark/ark.h"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using nlohmann::json;

namespace {

struct Out {
    int code = -1;
    std::string text;
};

Out arkctl(const std::string& args)
{
    Out o;
    std::string cmd = std::string(ARKCTL_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) o.text.append(buf.data(), n);
    int st = pclose(p);
    o.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return o;
}

std::filesystem::path tmp(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("arkctl_test_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST_CASE("C API: scenario names and errors")
{
    char err[128];
    char* names = nullptr;
    REQUIRE(ark_scenario_names(&names, err, sizeof err) == ARK_OK);
    auto j = json::parse(names);
    ark_string_free(names);
    CHECK(j.size() == 8);

    ark_ctx* ctx = ark_ctx_new();
    char* rep = nullptr;
    int ok = -1;
    CHECK(ark_run_scenario(ctx, "nope", nullptr, &rep, &ok, err, sizeof err) == ARK_ERR_UNKNOWN);
    CHECK(std::string(err).size() > 0);
    CHECK(ark_run_scenario(ctx, "happy_path", "{\"k\": ", &rep, &ok, err, sizeof err) == ARK_ERR_CONFIG);
    CHECK(ark_run_scenario(ctx, "happy_path", "{\"bogus\": 1}", &rep, &ok, err, sizeof err) == ARK_ERR_CONFIG);
    CHECK(ark_run_scenario(ctx, "happy_path", "{\"scenario\": \"bank_run\"}", &rep, &ok, err, sizeof err) ==
          ARK_ERR_CONFIG);
    CHECK(ark_run_scenario(nullptr, "happy_path", nullptr, &rep, &ok, err, sizeof err) == ARK_ERR_ARGUMENT);
    CHECK(ark_run_scenario(ctx, "happy_path", nullptr, nullptr, &ok, err, sizeof err) == ARK_ERR_ARGUMENT);

    // tiny buffer still gets a terminated message
    char small[4];
    CHECK(ark_run_scenario(ctx, "nope", nullptr, &rep, &ok, small, sizeof small) == ARK_ERR_UNKNOWN);
    CHECK(std::string(small).size() == 3);

    REQUIRE(ark_run_scenario(ctx, "happy_path", "{\"seed\": 2}", &rep, &ok, err, sizeof err) == ARK_OK);
    CHECK(ok == 1);
    auto r = json::parse(rep);
    ark_string_free(rep);
    CHECK(r["scenario"] == "happy_path");
    CHECK(r["seed"] == 2);
    ark_ctx_free(ctx);
}

TEST_CASE("C API: footprint")
{
    char err[128];
    std::int64_t vb = 0;
    REQUIRE(ark_footprint_vbytes(0, 1, 1, 1, &vb, err, sizeof err) == ARK_OK);
    CHECK(vb == 107);
    CHECK(ark_footprint_vbytes(-1, 0, 0, 0, &vb, err, sizeof err) == ARK_ERR_CONFIG);
    std::int64_t ns[] = {128};
    char* csv = nullptr;
    REQUIRE(ark_footprint_table(ns, 1, 6, &csv, err, sizeof err) == ARK_OK);
    CHECK(std::string(csv) == "n,depth,vB,sats\n128,7,1157,6942\n");
    ark_string_free(csv);
    std::int64_t bad[] = {0};
    CHECK(ark_footprint_table(bad, 1, 6, &csv, err, sizeof err) == ARK_ERR_CONFIG);
}

TEST_CASE("arkctl run")
{
    auto ok = arkctl("run happy_path --seed 1");
    CHECK(ok.code == 0);
    CHECK(ok.text.find("OK") != std::string::npos);

    auto out = tmp("hostage.json");
    auto h = arkctl("run hostage_attack --no-resets --out " + out.string());
    CHECK(h.code == 1);
    std::ifstream f(out);
    REQUIRE(f);
    auto rep = json::parse(f);
    bool loss = false;
    for (auto& v : rep["verdicts"])
        if (v["detail"].get<std::string>().find("operator loss") != std::string::npos) loss = true;
    CHECK(loss);
    std::filesystem::remove(out);

    CHECK(arkctl("run no_such_scenario").code == 2);
    auto cfg = tmp("bad.json");
    std::ofstream(cfg) << "{\"k\": 6, ";
    CHECK(arkctl("run happy_path --config " + cfg.string()).code == 2);
    std::ofstream(cfg) << "{\"k\": 6, \"t_u\": 10}";
    CHECK(arkctl("run happy_path --config " + cfg.string()).code == 2);
    std::filesystem::remove(cfg);
    CHECK(arkctl("run").code == 2);
    CHECK(arkctl("frobnicate").code == 2);
}

TEST_CASE("arkctl footprint and list")
{
    auto t = arkctl("footprint --n 1,128");
    CHECK(t.code == 0);
    CHECK(t.text.find("1,0,107,642\n") != std::string::npos);
    CHECK(t.text.find("128,7,1157,6942\n") != std::string::npos);
    auto e = arkctl("footprint --empty");
    CHECK(e.code == 0);
    CHECK(e.text == "n,depth,vB,sats\n");
    auto l = arkctl("list");
    CHECK(l.code == 0);
    CHECK(l.text.find("operator_shutdown") != std::string::npos);
}
