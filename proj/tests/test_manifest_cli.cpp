#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fademac/cli.hpp"

#include <filesystem>
#include <fstream>

using namespace fademac;
namespace fs = std::filesystem;

namespace {

fs::path
scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("fademac_" + name);
    fs::remove_all(dir);
    return dir;
}

Config
quick_config()
{
    Config c;
    c.run.replications = 2;
    c.run.seed = 17;
    c.experiment.sim_duration_s = 1.0;
    c.experiment.delay_distances = {100.0, 200.0};
    c.experiment.delivery_distances = {100.0, 250.0};
    c.experiment.delivery_samples = 2000;
    return c;
}

} // namespace

TEST_CASE("sha256 known answers")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK_THROWS_AS(sha256_file("/nonexistent/x"), std::runtime_error);
}

TEST_CASE("manifest json round-trip and tamper detection")
{
    RunManifest m;
    m.tool_version = "1.0";
    m.experiment = "delay";
    m.config_text = "[run]\nseed = 3\n";
    m.seed = 3;
    m.replications = 4;
    m.started_utc = "2024-01-01T00:00:00Z";
    m.finished_utc = "2024-01-01T00:00:01Z";
    m.outputs = {{"delay.csv", sha256_hex("x")}};
    m.checks = {{"monotone", true, "ok"}};
    const auto text = m.to_json_text();
    const auto back = RunManifest::from_json_text(text);
    CHECK(back.outputs == m.outputs);
    CHECK(back.checks == m.checks);
    CHECK(back.config_text == m.config_text);
    CHECK(back.digest() == m.digest());

    std::string bad = text;
    const auto at = bad.find(sha256_hex("x"));
    REQUIRE(at != std::string::npos);
    bad[at] = bad[at] == '0' ? '1' : '0';
    CHECK_THROWS_AS(RunManifest::from_json_text(bad), std::runtime_error);
    CHECK_THROWS_AS(RunManifest::from_json_text("{"), std::runtime_error);
}

TEST_CASE("registry and name resolution")
{
    const char* names[] = {"power-trace", "delivery",        "packet-delivery", "backoff-curve",
                           "delay",       "capacity",        "unfairness",      "hop-order",
                           "flooding",    "capture-geometry", "validate"};
    for (const char* n : names)
    {
        CHECK(find_experiment(n).name == n);
    }
    CHECK(find_experiment("delivery_vs_distance").name == "delivery");
    CHECK(find_experiment("hop_order").name == "hop-order");
    try
    {
        find_experiment("nope");
        FAIL("expected an error");
    }
    catch (const UnknownExperiment& e)
    {
        const std::string msg = e.what();
        for (const char* n : names)
        {
            CHECK(msg.find(n) != std::string::npos);
        }
    }
}

TEST_CASE("run writes csv and manifest; rerun is identical")
{
    const auto dir = scratch("cli_delay");
    const Config c = quick_config();
    const auto m = run_experiment("delay", c, dir);
    REQUIRE_FALSE(m.outputs.empty());
    for (const auto& o : m.outputs)
    {
        CHECK(fs::exists(dir / o.file));
        CHECK(sha256_file(dir / o.file) == o.sha256);
    }
    CHECK(fs::exists(dir / "delay.manifest.json"));

    const auto again = scratch("cli_delay_again");
    const auto report = rerun_from_manifest(dir / "delay.manifest.json", again);
    CHECK(report.identical());
    CHECK(report.rerun.digest() == m.digest());
    fs::remove_all(dir);
    fs::remove_all(again);
}

TEST_CASE("trace file only when requested")
{
    Config c = quick_config();
    const auto plain = scratch("cli_plain");
    run_experiment("delay", c, plain);
    CHECK_FALSE(fs::exists(plain / "delay_trace.csv"));

    c.run.trace = true;
    const auto traced = scratch("cli_traced");
    const auto m = run_experiment("delay", c, traced);
    REQUIRE(fs::exists(traced / "delay_trace.csv"));
    std::ifstream in(traced / "delay_trace.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("time_s,", 0) == 0);
    bool listed = false;
    for (const auto& o : m.outputs)
    {
        listed = listed || o.file == "delay_trace.csv";
    }
    CHECK(listed);
    fs::remove_all(plain);
    fs::remove_all(traced);
}

TEST_CASE("invalid configuration is rejected before running")
{
    Config c = quick_config();
    c.propagation.sigma_db = -1.0;
    CHECK_THROWS_AS(run_experiment("delay", c, scratch("cli_bad")), ConfigError);
}

TEST_CASE("analytic experiments report their checks")
{
    const auto dir = scratch("cli_geom");
    const auto m = run_experiment("capture-geometry", quick_config(), dir);
    CHECK_FALSE(m.checks.empty());
    CHECK(m.all_checks_passed());
    fs::remove_all(dir);
}
