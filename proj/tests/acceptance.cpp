// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include "fademac/analytic.hpp"
#include "fademac/cli.hpp"
#include "fademac/propagation.hpp"
#include "fademac/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fademac;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
fs::path g_out;

void
report(int n, bool ok, const std::string& detail)
{
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << detail << std::endl;
    g_failures += ok ? 0 : 1;
}

void
info(int n, const std::string& detail)
{
    std::cout << "INFO criterion " << n << ": " << detail << std::endl;
}

std::string
num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double
seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double>
grid101()
{
    return linear_grid(0.0, 1.0, 101);
}

/// Runs an experiment and folds its self-checks into one verdict.
struct CheckedRun
{
    RunManifest manifest;
    bool ok = true;
    std::string detail;
};

CheckedRun
checked(const std::string& experiment, const Config& c, const std::string& dir, const std::string& prefix = "")
{
    CheckedRun r;
    r.manifest = run_experiment(experiment, c, g_out / dir);
    for (const auto& ch : r.manifest.checks)
    {
        if (ch.name.rfind(prefix, 0) != 0)
        {
            continue;
        }
        r.ok = r.ok && ch.passed;
        if (!ch.passed)
        {
            r.detail += " [" + ch.name + ": " + ch.detail + "]";
        }
    }
    return r;
}

std::string
check_detail(const RunManifest& m, const std::string& name)
{
    for (const auto& c : m.checks)
    {
        if (c.name == name)
        {
            return c.detail;
        }
    }
    return "missing";
}

bool
check_passed(const RunManifest& m, const std::string& name)
{
    for (const auto& c : m.checks)
    {
        if (c.name == name)
        {
            return c.passed;
        }
    }
    return false;
}

void
criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    const BackoffParams bp;
    const double at1 = expected_backoff_slots(LinkRatio(1.0), bp);
    const double at0 = expected_backoff_slots(LinkRatio(0.0), bp);
    const double half = link_delivery_ratio(PropagationParams{}, 250.0).value();
    const double dt = seconds_since(t0);
    report(1, at1 == 15.5 && at0 == 511.5 && std::abs(half - 0.5) <= 1e-9 && dt < 1.0,
           "backoff(1)=" + num(at1) + " backoff(0)=" + num(at0) + " p(ideal range)=" + num(half) + " in " +
               num(dt) + " s");
}

void
criterion2()
{
    const auto t0 = std::chrono::steady_clock::now();
    RetryLimits rts;
    RetryLimits plain;
    plain.rts_cts = false;
    RetryLimits short_only = rts;
    short_only.long_packet = false;
    double worst_short = 0.0;
    double worst_plain = 0.0;
    double eq6_gap = 0.0;
    double eq6_at = 0.0;
    bool adopted = true;
    for (double p : grid101())
    {
        const LinkRatio lp(p);
        worst_short = std::max(worst_short, std::abs(packet_delivery_short_rtscts(lp, rts.srl) -
                                                     retry_process_oracle(lp, short_only)));
        worst_plain = std::max(worst_plain,
                               std::abs(packet_delivery_no_rts(lp, plain.lrl) - retry_process_oracle(lp, plain)));
        const double oracle = retry_process_oracle(lp, rts);
        const double gap = std::abs(packet_delivery_long_rtscts(lp, rts) - oracle);
        if (gap > eq6_gap)
        {
            eq6_gap = gap;
            eq6_at = p;
        }
        adopted = adopted && packet_delivery(lp, rts) == oracle;
    }
    const double dt = seconds_since(t0);
    report(2, worst_short <= 1e-12 && worst_plain <= 1e-12 && adopted && dt < 10.0,
           "short-limit max error " + num(worst_short) + ", no-RTS max error " + num(worst_plain) +
               "; long-packet closed form diverges by up to " + num(eq6_gap) + " at p=" + num(eq6_at) +
               ", oracle used downstream; " + num(dt) + " s");
}

void
criterion3()
{
    const RetryLimits rts;
    std::vector<double> ps;
    std::vector<int> signs;
    for (double p : linear_grid(0.0, 1.0, 1001))
    {
        if (p <= 0.0 || p >= 1.0)
        {
            continue;
        }
        const double diff = packet_delivery(LinkRatio(p), rts) - p;
        ps.push_back(p);
        signs.push_back(diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0));
    }
    int changes = 0;
    double p_star = -1.0;
    for (std::size_t i = 1; i < signs.size(); ++i)
    {
        if (signs[i] != signs[i - 1])
        {
            ++changes;
            p_star = 0.5 * (ps[i] + ps[i - 1]);
        }
    }
    const bool below_then_above = !signs.empty() && signs.front() < 0 && signs.back() > 0;
    report(3, changes == 1 && below_then_above && p_star >= 0.5 && p_star <= 0.7,
           "single crossover at p*~" + num(p_star) + " (" + std::to_string(changes) + " sign change)");
}

void
criterion4()
{
    RetryLimits rts;
    RetryLimits plain;
    plain.rts_cts = false;
    double worst = 1.0;
    for (double p : grid101())
    {
        worst = std::min(worst, packet_delivery(LinkRatio(p), plain) - packet_delivery(LinkRatio(p), rts));
    }
    const auto t0 = std::chrono::steady_clock::now();
    Config c;
    const auto m = run_experiment("capacity", c, g_out / "capacity");
    const bool sim_ok = check_passed(m, "no_rts_capacity_at_least_rts");
    report(4, worst >= 0.0 && sim_ok,
           "analytic min(no_rts - rts) " + num(worst) + "; simulator " + check_detail(m, "no_rts_capacity_at_least_rts") +
               " over " + std::to_string(c.experiment.capacity_distances.size()) + " distances x " +
               std::to_string(c.run.replications) + " seeds, " + num(seconds_since(t0)) + " s");
}

void
criterion5()
{
    const auto r = checked("validate", Config{}, "validate", "mac_delivery_");
    int points = 0;
    for (const auto& ch : r.manifest.checks)
    {
        points += ch.name.rfind("mac_delivery_", 0) == 0 ? 1 : 0;
    }
    report(5, r.ok && points == 8, std::to_string(points) + " points within 3 sigma" + r.detail);
}

void
criterion6()
{
    bool ok = true;
    std::string detail;
    for (int bytes : {500, 1500})
    {
        for (bool rts : {false, true})
        {
            Config c;
            c.experiment.payload_bytes = bytes;
            c.mac.rts_cts = rts;
            const std::string tag = std::to_string(bytes) + (rts ? "_rts" : "_basic");
            const auto r = checked("unfairness", c, "unfairness_" + tag);
            ok = ok && r.ok;
            detail += " " + tag + (r.ok ? " ok" : " failed" + r.detail) + ";";
        }
        Config c;
        c.experiment.payload_bytes = bytes;
        c.mac.backoff_enabled = false;
        const std::string tag = std::to_string(bytes) + "_no_backoff_basic";
        const auto r = checked("unfairness", c, "unfairness_" + tag);
        ok = ok && r.ok;
        detail += " " + tag + " " + check_detail(r.manifest, "backoff_disabled_parity_within_15pct") + ";";

        c.mac.rts_cts = true;
        const auto with_rts = run_experiment("unfairness", c, g_out / ("unfairness_" + std::to_string(bytes) +
                                                                       "_no_backoff_rts"));
        info(6, std::to_string(bytes) + " B backoff disabled with RTS/CTS (not scored): " +
                    check_detail(with_rts, "backoff_disabled_parity_within_15pct"));
    }
    report(6, ok, "parity, dominance and widening gap;" + detail);
}

void
criterion7()
{
    const auto m = run_experiment("hop-order", Config{}, g_out / "hop_order");
    const bool a = check_passed(m, "weak_then_strong_beats_strong_then_weak");
    const bool b = check_passed(m, "strong_then_weak_below_weak_weak");
    report(7, a && b,
           check_detail(m, "weak_then_strong_beats_strong_then_weak") + "; " +
               check_detail(m, "strong_then_weak_below_weak_weak"));
}

void
criterion8()
{
    const auto m = run_experiment("flooding", Config{}, g_out / "flooding");
    const bool a = check_passed(m, "coverage_non_increasing_in_drop");
    const bool b = check_passed(m, "sparse_network_loses_more_coverage");
    report(8, a && b,
           check_detail(m, "coverage_non_increasing_in_drop") + "; " +
               check_detail(m, "sparse_network_loses_more_coverage"));
}

void
criterion9()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = checked("capture-geometry", Config{}, "capture_geometry");
    const double dt = seconds_since(t0);
    report(9, r.ok && r.manifest.checks.size() == 3 && dt < 1.0,
           check_detail(r.manifest, "worst_case_unpreventable_collision_exists") + "; " + num(dt) + " s" + r.detail);
}

std::string
slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void
criterion10()
{
    Config c;
    c.run.replications = 3;
    c.run.trace = true;
    c.experiment.sim_duration_s = 3.0;
    c.experiment.trace_duration_s = 2.0;
    c.experiment.delivery_samples = 20000;
    c.experiment.capacity_distances = {100.0, 200.0};
    c.experiment.delay_distances = {100.0, 200.0};
    c.experiment.unfairness.varied_distances = {150.0, 200.0};
    c.experiment.flood_node_counts = {25, 100};
    c.experiment.flood_drop_probs = {0.0, 0.3};
    bool ok = true;
    int files = 0;
    std::string detail;
    for (const auto& e : experiment_registry())
    {
        const fs::path first = g_out / "determinism" / "first" / e.name;
        const fs::path second = g_out / "determinism" / "second" / e.name;
        fs::remove_all(first);
        fs::remove_all(second);
        const auto m = run_experiment(e.name, c, first);
        std::string stem = e.name;
        std::replace(stem.begin(), stem.end(), '-', '_');
        const auto rerun = rerun_from_manifest(first / (stem + ".manifest.json"), second);
        bool same = rerun.identical() && !m.outputs.empty();
        for (const auto& o : m.outputs)
        {
            ++files;
            same = same && fs::exists(second / o.file) && slurp(first / o.file) == slurp(second / o.file);
        }
        ok = ok && same;
        if (!same)
        {
            detail += " " + e.name + " differs;";
        }
    }
    detail = std::to_string(experiment_registry().size()) + " experiments, " + std::to_string(files) +
             " files compared byte for byte" + detail;
    report(10, ok, detail);
}

} // namespace

int
main(int argc, char** argv)
{
    g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fademac_acceptance";
    fs::create_directories(g_out);
    try
    {
        criterion1();
        criterion2();
        criterion3();
        criterion9();
        criterion10();
        criterion5();
        criterion7();
        criterion8();
        criterion4();
        criterion6();
    }
    catch (const std::exception& e)
    {
        std::cout << "FAIL criterion run aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
