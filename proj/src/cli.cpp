#include "fademac/cli.hpp"

#include "fademac/analytic.hpp"
#include "fademac/geometry.hpp"
#include "fademac/propagation.hpp"
#include "fademac/rng.hpp"
#include "fademac/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace fademac {

UnknownExperiment::UnknownExperiment(const std::string& name)
    : std::invalid_argument([&] {
        std::string msg = "unknown experiment '" + name + "'; available:";
        for (const auto& e : experiment_registry())
        {
            msg += " " + e.name;
        }
        return msg;
    }())
{
}

namespace {

std::string
fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

CheckRecord
check(std::string name, bool ok, std::string detail)
{
    return {std::move(name), ok, std::move(detail)};
}

std::string
file_stem(const std::string& name)
{
    std::string s = name;
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

std::vector<double>
p_grid(const Config& c)
{
    return linear_grid(0.0, 1.0, c.experiment.p_grid_points);
}

Table
checks_table(const std::vector<CheckRecord>& checks)
{
    Table t;
    t.columns = {"check", "passed", "detail"};
    for (const auto& c : checks)
    {
        t.add_row({c.name, std::string(c.passed ? "true" : "false"), c.detail});
    }
    return t;
}

// ---- analytic checks shared by several experiments -------------------------

std::vector<CheckRecord>
closed_form_checks(std::span<const double> grid, const RetryLimits& limits)
{
    std::vector<CheckRecord> out;
    RetryLimits rts = limits;
    rts.rts_cts = true;
    rts.long_packet = true;
    RetryLimits rts_short = rts;
    rts_short.long_packet = false;
    RetryLimits basic = limits;
    basic.rts_cts = false;

    double short_err = 0.0;
    double basic_err = 0.0;
    double eq6_err = 0.0;
    double eq6_at = 0.0;
    double conservation_err = 0.0;
    for (double pv : grid)
    {
        const LinkRatio p(pv);
        short_err = std::max(short_err, std::abs(packet_delivery_short_rtscts(p, limits.srl) -
                                                 retry_process_oracle(p, rts_short)));
        basic_err = std::max(basic_err,
                             std::abs(packet_delivery_no_rts(p, limits.lrl) - retry_process_oracle(p, basic)));
        const auto tree = enumerate_retry_tree(p, rts);
        conservation_err = std::max(conservation_err, std::abs(tree.delivered + tree.dropped - 1.0));
        if (limits.srl == 7 && limits.lrl == 4)
        {
            const double d = std::abs(packet_delivery_long_rtscts(p, rts) - tree.delivered);
            if (d > eq6_err)
            {
                eq6_err = d;
                eq6_at = pv;
            }
        }
    }
    out.push_back(check("short_rtscts_matches_oracle", short_err <= 1e-12, "max abs error " + fmt(short_err)));
    out.push_back(check("no_rts_matches_oracle", basic_err <= 1e-12, "max abs error " + fmt(basic_err)));
    out.push_back(check("retry_tree_conserves_probability", conservation_err <= 1e-12,
                        "max |delivered + dropped - 1| " + fmt(conservation_err)));
    if (limits.srl == 7 && limits.lrl == 4)
    {
        const bool agree = eq6_err <= 1e-12;
        out.push_back(check("long_rtscts_closed_form_vs_oracle", true,
                            agree ? "closed form agrees with oracle"
                                  : "closed form diverges from oracle by up to " + fmt(eq6_err) + " at p=" +
                                        fmt(eq6_at) + "; oracle adopted downstream"));
    }
    return out;
}

std::vector<CheckRecord>
delivery_shape_checks(std::span<const double> grid, const RetryLimits& limits)
{
    RetryLimits rts = limits;
    rts.rts_cts = true;
    rts.long_packet = true;
    RetryLimits basic = limits;
    basic.rts_cts = false;

    std::vector<CheckRecord> out;
    // Crossover: delivery below link ratio under p*, above it over p*.
    double below_max = -1.0;
    double above_min = 2.0;
    bool sign_ok = true;
    double prev_sign = 0.0;
    int sign_changes = 0;
    double crossing = std::nan("");
    double worst_dominance = 0.0;
    double worst_gap = 0.0;
    for (double pv : grid)
    {
        const LinkRatio p(pv);
        const double d = packet_delivery(p, rts);
        if (pv > 0.0 && pv < 1.0)
        {
            const double s = d - pv > 0.0 ? 1.0 : -1.0;
            if (prev_sign != 0.0 && s != prev_sign)
            {
                ++sign_changes;
                crossing = pv;
            }
            prev_sign = s;
            if (s < 0.0)
            {
                below_max = std::max(below_max, pv);
            }
            else
            {
                above_min = std::min(above_min, pv);
            }
        }
        worst_dominance = std::min(worst_dominance, packet_delivery(p, basic) - d);
        worst_gap = std::max(worst_gap, std::abs(packet_delivery_short_rtscts(p, limits.srl) - d));
    }
    sign_ok = sign_changes == 1 && crossing >= 0.5 && crossing <= 0.7 && below_max < above_min;
    out.push_back(check("crossover_in_0.5_0.7", sign_ok,
                        "delivery < p up to p=" + fmt(below_max) + ", > p from p=" + fmt(above_min) +
                            " (" + std::to_string(sign_changes) + " sign change)"));
    out.push_back(check("no_rts_dominates_rtscts", worst_dominance >= 0.0,
                        "min(no_rts - rtscts) " + fmt(worst_dominance)));
    out.push_back(check("short_long_almost_identical", worst_gap <= 0.05, "max |short - long| " + fmt(worst_gap)));
    return out;
}

std::vector<CheckRecord>
backoff_checks(std::span<const double> grid, const BackoffParams& bp)
{
    double chain_err = 0.0;
    bool monotone = true;
    bool bounded = true;
    double prev = std::numeric_limits<double>::infinity();
    const double lo = bp.cw_min_slots / 2.0;
    const double hi = bp.cw_max_slots / 2.0;
    for (double pv : grid)
    {
        const LinkRatio p(pv);
        const double e = expected_backoff_slots(p, bp);
        chain_err = std::max(chain_err, std::abs(e - backoff_stationary_mean_slots(p, bp)) / e);
        monotone = monotone && e <= prev + 1e-12;
        bounded = bounded && e >= lo - 1e-12 && e <= hi + 1e-12;
        prev = e;
    }
    return {check("expected_backoff_matches_markov_chain", chain_err <= 1e-9, "max rel error " + fmt(chain_err)),
            check("expected_backoff_non_increasing", monotone, ""),
            check("expected_backoff_bounded", bounded, "[" + fmt(lo) + ", " + fmt(hi) + "]")};
}

/// Each grid point: |MC - analytic| within 3 binomial sigma plus one sample.
CheckRecord
delivery_agreement(const Table& t, int n_samples)
{
    double worst = -std::numeric_limits<double>::infinity();
    double worst_d = 0.0;
    bool ok = true;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        const double slack = t.number(r, "tolerance_3sigma") + 1.0 / n_samples;
        const double err = std::abs(t.number(r, "montecarlo_p") - t.number(r, "analytic_p"));
        if (err - slack > worst)
        {
            worst = err - slack;
            worst_d = t.number(r, "distance_m");
        }
        ok = ok && err <= slack;
    }
    return check("montecarlo_matches_analytic", ok,
                 "worst excess over 3-sigma tolerance " + fmt(worst) + " at d=" + fmt(worst_d));
}

// ---- MAC-level Monte Carlo agreement ---------------------------------------

struct MacAgreement
{
    double target_p;
    bool rts;
    double analytic;
    double simulated;
    double tolerance;
    std::uint64_t packets;
};

MacAgreement
mac_delivery_agreement(const Config& c, double target_p, bool rts, std::uint64_t min_packets)
{
    const PropagationParams& prop = c.propagation;
    const double d = distance_for_delivery_ratio(prop, LinkRatio(target_p));
    DcfConfig mac = c.mac;
    mac.rts_cts = rts;
    RetryLimits limits = mac.retry;
    limits.rts_cts = rts;
    limits.long_packet = true;
    const double analytic = packet_delivery(link_delivery_ratio(prop, d), limits);

    double duration = 100.0;
    for (int round = 0;; ++round)
    {
        Scenario s;
        s.nodes = {{0, {0.0, 0.0}}, {1, {d, 0.0}}};
        s.flows = {{{0, 1}, c.experiment.payload_bytes, 0.0, 0.0}};
        s.channel.propagation = prop;
        s.duration_s = duration;
        const auto m = run(s, mac, derive_seed(c.run.seed, rts ? "mac-agree-rts" : "mac-agree-basic",
                                              static_cast<std::uint64_t>(std::llround(target_p * 1e6)),
                                              static_cast<std::uint64_t>(round)));
        const auto& n = m.nodes[0];
        const std::uint64_t done = n.acked + n.retry_drops;
        if (done >= min_packets || round > 10)
        {
            const double sim = done ? static_cast<double>(n.acked) / static_cast<double>(done) : 0.0;
            const double tol = 3.0 * std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(done));
            return {target_p, rts, analytic, sim, tol, done};
        }
        duration *= 2.0;
    }
}

struct BackoffAgreement
{
    double p;
    double expected;
    double simulated;
    std::uint64_t draws;
};

BackoffAgreement
mac_backoff_agreement(const Config& c, double target_p, std::uint64_t min_draws)
{
    const PropagationParams& prop = c.propagation;
    const double d = distance_for_delivery_ratio(prop, LinkRatio(target_p));
    DcfConfig mac = c.mac;
    mac.rts_cts = false;
    mac.backoff_enabled = true;
    double duration = 100.0;
    for (int round = 0;; ++round)
    {
        Scenario s;
        s.nodes = {{0, {0.0, 0.0}}, {1, {d, 0.0}}};
        s.flows = {{{0, 1}, c.experiment.payload_bytes, 0.0, 0.0}};
        s.channel.propagation = prop;
        s.duration_s = duration;
        const auto m = run(s, mac, derive_seed(c.run.seed, "mac-backoff", 0, static_cast<std::uint64_t>(round)));
        if (m.nodes[0].backoff_draws >= min_draws || round > 10)
        {
            return {target_p, expected_backoff_slots(LinkRatio(target_p), mac.backoff), m.mean_backoff_slots(0),
                    m.nodes[0].backoff_draws};
        }
        duration *= 2.0;
    }
}

// ---- experiments -----------------------------------------------------------

ExperimentOutput
power_trace(const Config& c)
{
    const auto& e = c.experiment;
    ExperimentOutput out;
    Table t = exp_power_trace(c.propagation, e.trace_distance_m, e.trace_duration_s, e.trace_interval_s, c.run.seed);
    const auto n = static_cast<double>(t.rows.size());
    double sum = 0.0;
    double above = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        const double v = t.number(r, "power_dbm");
        sum += v;
        above += v >= c.propagation.p_th_dbm ? 1.0 : 0.0;
    }
    const double mean = mean_received_power_dbm(c.propagation, e.trace_distance_m);
    const double p = link_delivery_ratio(c.propagation, e.trace_distance_m).value();
    const double mean_tol = 4.0 * c.propagation.sigma_db / std::sqrt(n);
    const double frac_tol = 3.0 * std::sqrt(p * (1.0 - p) / n) + 1.0 / n;
    out.checks.push_back(check("trace_mean_near_mean_power", std::abs(sum / n - mean) <= mean_tol + 1e-12,
                               "trace mean " + fmt(sum / n) + " dBm vs " + fmt(mean) + " dBm (tol " +
                                   fmt(mean_tol) + ")"));
    out.checks.push_back(check("fraction_above_threshold_matches_p", std::abs(above / n - p) <= frac_tol,
                               fmt(above / n) + " vs " + fmt(p) + " (tol " + fmt(frac_tol) + ")"));
    if (c.propagation.sigma_db > 0.0 && p > 0.01 && p < 0.99)
    {
        out.checks.push_back(check("trace_crosses_threshold", above > 0.0 && above < n,
                                   fmt(above) + " of " + fmt(n) + " samples above threshold"));
    }
    out.tables.emplace_back("power_trace.csv", std::move(t));
    return out;
}

ExperimentOutput
delivery(const Config& c)
{
    const auto& e = c.experiment;
    ExperimentOutput out;
    Table t = exp_delivery_vs_distance(c.propagation, e.delivery_distances, e.delivery_samples, c.run.seed);
    out.checks.push_back(delivery_agreement(t, e.delivery_samples));
    out.tables.emplace_back("delivery.csv", std::move(t));
    return out;
}

ExperimentOutput
packet_delivery_exp(const Config& c)
{
    ExperimentOutput out;
    const auto grid = p_grid(c);
    out.checks = closed_form_checks(grid, c.mac.retry);
    const auto shape = delivery_shape_checks(grid, c.mac.retry);
    out.checks.insert(out.checks.end(), shape.begin(), shape.end());
    out.tables.emplace_back("packet_delivery.csv", exp_packet_delivery_curves(grid, c.mac.retry));
    return out;
}

ExperimentOutput
backoff_curve(const Config& c)
{
    ExperimentOutput out;
    const auto grid = p_grid(c);
    out.checks = backoff_checks(grid, c.mac.backoff);
    out.tables.emplace_back("backoff_curve.csv", exp_backoff_curve(grid, c.mac.backoff));
    return out;
}

ExperimentOutput::TraceRun
single_hop_trace(const Config& c, double d)
{
    ExperimentOutput::TraceRun tr;
    tr.scenario.nodes = {{0, {0.0, 0.0}}, {1, {d, 0.0}}};
    tr.scenario.flows = {{{0, 1}, c.experiment.payload_bytes, 0.0, 0.0}};
    tr.scenario.channel.propagation = c.propagation;
    tr.scenario.duration_s = std::min(c.experiment.sim_duration_s, 1.0);
    tr.mac = c.mac;
    tr.seed = derive_seed(c.run.seed, "trace", 0, 0);
    return tr;
}

/// Means of `metric` are strictly decreasing (sign=-1) or increasing (+1)
/// over points whose key is at least `from`.
CheckRecord
trend_check(const ExperimentResult& r, const std::string& key, double from, const std::string& metric, int sign,
            const std::string& name)
{
    std::vector<std::pair<double, double>> xs;
    for (const auto& p : r.points)
    {
        if (p.key(key) >= from)
        {
            xs.emplace_back(p.key(key), p.metric(metric).mean);
        }
    }
    std::sort(xs.begin(), xs.end());
    bool ok = xs.size() >= 2;
    std::string detail;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        detail += (i ? " " : "") + fmt(xs[i].first) + ":" + fmt(xs[i].second);
        if (i > 0)
        {
            ok = ok && sign * (xs[i].second - xs[i - 1].second) > 0.0;
        }
    }
    return check(name, ok, detail);
}

ExperimentOutput
delay(const Config& c)
{
    ExperimentOutput out;
    const auto r = exp_one_hop_delay(c.sim_setup(), c.experiment.delay_distances, c.plan());
    out.checks.push_back(trend_check(r, "distance_m", 150.0, "delay_s", +1, "delay_rises_beyond_150m"));
    const auto [lo, hi] = std::minmax_element(r.points.begin(), r.points.end(), [](const auto& a, const auto& b) {
        return a.key("distance_m") < b.key("distance_m");
    });
    out.checks.push_back(check("weak_link_delay_exceeds_strong", hi->metric("delay_s").mean > lo->metric("delay_s").mean,
                               fmt(hi->metric("delay_s").mean) + " s vs " + fmt(lo->metric("delay_s").mean) + " s"));
    out.tables.emplace_back("delay.csv", r.to_table());
    out.tables.emplace_back("delay_metadata.csv", r.metadata_table());
    out.trace_run = single_hop_trace(c, c.experiment.delay_distances.front());
    return out;
}

ExperimentOutput
capacity(const Config& c)
{
    ExperimentOutput out;
    const auto r = exp_capacity(c.sim_setup(), c.experiment.capacity_distances, c.plan());
    bool ok = true;
    std::string worst;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& p : r.points)
    {
        const auto& a = p.metric("no_rts_bps");
        const auto& b = p.metric("rts_bps");
        const double margin = a.mean - b.mean + a.half_width.value_or(0.0) + b.half_width.value_or(0.0);
        ok = ok && margin >= 0.0;
        if (margin < worst_margin)
        {
            worst_margin = margin;
            worst = "d=" + fmt(p.key("distance_m")) + " no_rts " + fmt(a.mean) + " vs rts " + fmt(b.mean);
        }
    }
    out.checks.push_back(check("no_rts_capacity_at_least_rts", ok, "tightest " + worst));
    out.checks.push_back(trend_check(r, "distance_m", 150.0, "no_rts_bps", -1, "no_rts_capacity_falls_beyond_150m"));
    out.checks.push_back(trend_check(r, "distance_m", 150.0, "rts_bps", -1, "rts_capacity_falls_beyond_150m"));
    out.tables.emplace_back("capacity.csv", r.to_table());
    out.tables.emplace_back("capacity_metadata.csv", r.metadata_table());
    out.trace_run = single_hop_trace(c, c.experiment.capacity_distances.back());
    return out;
}

double
parity_deviation(double a, double b)
{
    const double hi = std::max(a, b);
    return hi > 0.0 ? std::abs(a - b) / hi : 0.0;
}

ExperimentOutput
unfairness(const Config& c)
{
    ExperimentOutput out;
    const auto& g = c.experiment.unfairness;
    const auto r = exp_unfairness(c.sim_setup(), g, c.plan());
    const auto share = [](const ExperimentResult::Point& p, const char* m) { return p.metric(m).mean; };

    if (c.mac.backoff_enabled)
    {
        for (const auto& p : r.points)
        {
            if (p.key("varied_distance_m") == g.fixed_distance_m)
            {
                const double dev = parity_deviation(share(p, "conn1_normalized"), share(p, "conn2_normalized"));
                out.checks.push_back(check("equal_distance_parity_within_10pct", dev <= 0.10,
                                           "relative difference " + fmt(dev)));
            }
        }
        std::vector<std::pair<double, double>> gaps;
        for (const auto& p : r.points)
        {
            if (p.key("varied_distance_m") > g.fixed_distance_m)
            {
                gaps.emplace_back(p.key("varied_distance_m"), share(p, "normalized_gap"));
            }
        }
        std::sort(gaps.begin(), gaps.end());
        bool ok = !gaps.empty();
        std::string detail;
        for (std::size_t i = 0; i < gaps.size(); ++i)
        {
            ok = ok && gaps[i].second > 0.0 && (i == 0 || gaps[i].second > gaps[i - 1].second);
            detail += (i ? " " : "") + fmt(gaps[i].first) + ":" + fmt(gaps[i].second);
        }
        out.checks.push_back(check("strong_link_dominates_and_gap_widens", ok, "gap by distance " + detail));
    }
    else
    {
        double worst = 0.0;
        for (const auto& p : r.points)
        {
            worst = std::max(worst, parity_deviation(share(p, "conn1_normalized"), share(p, "conn2_normalized")));
        }
        out.checks.push_back(
            check("backoff_disabled_parity_within_15pct", worst <= 0.15, "worst relative difference " + fmt(worst)));
    }
    out.tables.emplace_back("unfairness.csv", r.to_table());
    out.tables.emplace_back("unfairness_metadata.csv", r.metadata_table());

    ExperimentOutput::TraceRun tr;
    tr.scenario = unfairness_scenario(c.propagation, g, g.varied_distances.back(), c.experiment.payload_bytes,
                                      std::min(c.experiment.sim_duration_s, 1.0), true, true);
    tr.mac = c.mac;
    tr.seed = derive_seed(c.run.seed, "trace", 0, 0);
    out.trace_run = tr;
    return out;
}

/// a < b with non-overlapping 95% intervals.
bool
clearly_less(const Summary& a, const Summary& b)
{
    return a.upper() < b.lower();
}

ExperimentOutput
hop_order(const Config& c)
{
    ExperimentOutput out;
    const auto r = exp_hop_order(c.sim_setup(), c.experiment.hop_order, c.plan());
    const auto& ss = r.at_label("strong-strong").metric("throughput_bps");
    const auto& sw = r.at_label("strong-weak").metric("throughput_bps");
    const auto& ws = r.at_label("weak-strong").metric("throughput_bps");
    const auto& ww = r.at_label("weak-weak").metric("throughput_bps");
    const auto show = [](const Summary& s) { return fmt(s.mean) + "+-" + fmt(s.half_width.value_or(0.0)); };
    out.checks.push_back(check("strong_strong_best", ss.mean >= sw.mean && ss.mean >= ws.mean && ss.mean >= ww.mean,
                               "strong-strong " + show(ss)));
    out.checks.push_back(check("weak_then_strong_beats_strong_then_weak", clearly_less(sw, ws),
                               "weak-strong " + show(ws) + " vs strong-weak " + show(sw)));
    out.checks.push_back(check("strong_then_weak_below_weak_weak", clearly_less(sw, ww),
                               "strong-weak " + show(sw) + " vs weak-weak " + show(ww)));
    out.tables.emplace_back("hop_order.csv", r.to_table());
    out.tables.emplace_back("hop_order_metadata.csv", r.metadata_table());

    ExperimentOutput::TraceRun tr;
    const auto& h = c.experiment.hop_order;
    tr.scenario.nodes = {{0, {0.0, 0.0}}, {1, {h.strong_m, 0.0}}, {2, {h.strong_m + h.weak_m, 0.0}}};
    tr.scenario.flows = {{{0, 1, 2}, c.experiment.payload_bytes, 0.0, 0.0}};
    tr.scenario.channel.propagation = c.propagation;
    tr.scenario.duration_s = std::min(c.experiment.sim_duration_s, 1.0);
    tr.mac = c.mac;
    tr.seed = derive_seed(c.run.seed, "trace", 0, 0);
    out.trace_run = tr;
    return out;
}

ExperimentOutput
flooding(const Config& c)
{
    ExperimentOutput out;
    const auto spec = c.flooding();
    const auto r = exp_flooding(c.propagation, c.mac, spec, c.plan());
    if (!spec.fading_channel)
    {
        // Paired over replications: every drop probability reuses the same
        // topologies, so the per-replication difference isolates the effect.
        bool ok = true;
        std::string worst;
        double worst_excess = -std::numeric_limits<double>::infinity();
        std::map<int, std::vector<const ExperimentResult::Point*>> by_n;
        for (const auto& p : r.points)
        {
            by_n[static_cast<int>(p.key("nodes"))].push_back(&p);
        }
        for (auto& [n, pts] : by_n)
        {
            std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->key("drop_p") < b->key("drop_p"); });
            for (std::size_t i = 1; i < pts.size(); ++i)
            {
                const auto& a = pts[i - 1]->metric("coverage").raw;
                const auto& b = pts[i]->metric("coverage").raw;
                std::vector<double> diff;
                for (std::size_t k = 0; k < a.size(); ++k)
                {
                    diff.push_back(b[k] - a[k]);
                }
                const auto s = summarize(diff);
                const double excess = s.mean - s.half_width.value_or(0.0);
                ok = ok && excess <= 0.0;
                if (excess > worst_excess)
                {
                    worst_excess = excess;
                    worst = "n=" + std::to_string(n) + " drop " + fmt(pts[i - 1]->key("drop_p")) + "->" +
                            fmt(pts[i]->key("drop_p")) + " mean change " + fmt(s.mean) + "+-" +
                            fmt(s.half_width.value_or(0.0));
                }
            }
        }
        out.checks.push_back(check("coverage_non_increasing_in_drop", ok, "largest increase " + worst));

        const auto loss_at = [&](int n, double drop) -> std::optional<double> {
            const ExperimentResult::Point* base = nullptr;
            const ExperimentResult::Point* at = nullptr;
            for (const auto& p : r.points)
            {
                if (static_cast<int>(p.key("nodes")) == n && p.key("drop_p") == 0.0)
                {
                    base = &p;
                }
                if (static_cast<int>(p.key("nodes")) == n && std::abs(p.key("drop_p") - drop) < 1e-12)
                {
                    at = &p;
                }
            }
            if (!base || !at || base->metric("coverage").mean <= 0.0)
            {
                return std::nullopt;
            }
            return 1.0 - at->metric("coverage").mean / base->metric("coverage").mean;
        };
        const auto [lo, hi] = std::minmax_element(spec.node_counts.begin(), spec.node_counts.end());
        const auto sparse = loss_at(*lo, 0.3);
        const auto dense = loss_at(*hi, 0.3);
        if (sparse && dense && *lo != *hi)
        {
            out.checks.push_back(check("sparse_network_loses_more_coverage", *sparse > *dense,
                                       "relative loss at drop 0.3: n=" + std::to_string(*lo) + " " + fmt(*sparse) +
                                           ", n=" + std::to_string(*hi) + " " + fmt(*dense)));
        }
    }
    out.tables.emplace_back("flooding.csv", r.to_table());
    out.tables.emplace_back("flooding_metadata.csv", r.metadata_table());

    ExperimentOutput::TraceRun tr;
    const int n = spec.node_counts.front();
    tr.scenario.nodes = random_deployment(n, spec.area_m, c.propagation.d0_m,
                                          derive_seed(c.run.seed, "flood-topology", static_cast<std::uint64_t>(n), 0));
    tr.scenario.channel.propagation = c.propagation;
    if (!spec.fading_channel)
    {
        tr.scenario.channel.bernoulli_drop = spec.drop_probs.front();
    }
    tr.scenario.flood = FloodSpec{0, 0.001, spec.payload_bytes, spec.jitter_s};
    tr.scenario.duration_s = spec.duration_s;
    tr.mac = c.mac;
    tr.seed = derive_seed(c.run.seed, "flood", static_cast<std::uint64_t>(n), 0);
    out.trace_run = tr;
    return out;
}

std::vector<CheckRecord>
geometry_checks(const CaptureParams& params)
{
    const auto dense = linear_grid(1.0, params.tx_range_m, 250);
    const auto interferers = linear_grid(0.0, params.cs_range_m() * 1.5, 826);
    bool superset = true;
    bool complete = true;
    std::string superset_fail;
    std::string complete_fail;
    bool counterexample = false;
    double example_d = 0.0;
    for (double d_sr : dense)
    {
        const double cl = capture_line(params, d_sr);
        for (double d_ir : interferers)
        {
            if (ca_blocks(params, d_ir))
            {
                for (auto cse : {CsmaCase::Average, CsmaCase::Worst})
                {
                    if (!csma_blocks(params, d_sr, d_ir, cse) && superset)
                    {
                        superset = false;
                        superset_fail = " first failure d_sr=" + fmt(d_sr) + " d_ir=" + fmt(d_ir);
                    }
                }
            }
            if (d_ir < cl && !csma_blocks(params, d_sr, d_ir, CsmaCase::Average) && complete)
            {
                complete = false;
                complete_fail = " first failure d_sr=" + fmt(d_sr) + " d_ir=" + fmt(d_ir);
            }
        }
        if (!counterexample && cl > params.cs_range_m() - d_sr)
        {
            counterexample = true;
            example_d = d_sr;
        }
    }
    return {check("ca_blocked_implies_csma_blocked", superset, "grid 250 x 826" + superset_fail),
            check("average_csma_blocks_all_colliders", complete, "grid 250 x 826" + complete_fail),
            check("worst_case_unpreventable_collision_exists", counterexample,
                  counterexample ? "first at d_sr=" + fmt(example_d) : "none found")};
}

ExperimentOutput
capture_geometry(const Config& c)
{
    ExperimentOutput out;
    out.checks = geometry_checks(c.geometry);
    out.tables.emplace_back("capture_geometry.csv", exp_capture_geometry(c.geometry, c.experiment.geometry_distances));
    return out;
}

ExperimentOutput
validate_suite(const Config& c)
{
    ExperimentOutput out;
    auto add = [&out](std::vector<CheckRecord> xs) { out.checks.insert(out.checks.end(), xs.begin(), xs.end()); };
    const auto grid = p_grid(c);
    add(closed_form_checks(grid, c.mac.retry));
    add(delivery_shape_checks(grid, c.mac.retry));
    add(backoff_checks(grid, c.mac.backoff));

    const auto& e = c.experiment;
    const Table dt = exp_delivery_vs_distance(c.propagation, e.delivery_distances, e.delivery_samples, c.run.seed);
    out.checks.push_back(delivery_agreement(dt, e.delivery_samples));

    Table mac;
    mac.columns = {"target_p", "rts_cts", "packets", "analytic", "simulated", "tolerance_3sigma"};
    bool mac_ok = true;
    for (bool rts : {false, true})
    {
        for (double p : {0.5, 0.66, 0.8, 0.95})
        {
            const auto a = mac_delivery_agreement(c, p, rts, 10000);
            mac.add_row({a.target_p, std::string(rts ? "true" : "false"), static_cast<std::int64_t>(a.packets),
                         a.analytic, a.simulated, a.tolerance});
            const bool ok = std::abs(a.simulated - a.analytic) <= a.tolerance && a.packets >= 10000;
            mac_ok = mac_ok && ok;
            out.checks.push_back(check(std::string("mac_delivery_") + (rts ? "rts" : "basic") + "_p" + fmt(p), ok,
                                       fmt(a.simulated) + " vs " + fmt(a.analytic) + " over " +
                                           std::to_string(a.packets) + " packets (tol " + fmt(a.tolerance) + ")"));
        }
    }
    const auto b = mac_backoff_agreement(c, 0.9, 10000);
    out.checks.push_back(check("mac_mean_backoff_within_5pct", std::abs(b.simulated - b.expected) <= 0.05 * b.expected,
                               fmt(b.simulated) + " vs " + fmt(b.expected) + " slots over " +
                                   std::to_string(b.draws) + " draws"));
    out.tables.emplace_back("validate.csv", checks_table(out.checks));
    out.tables.emplace_back("validate_mac_delivery.csv", std::move(mac));
    return out;
}

std::string
normalize(std::string name)
{
    std::replace(name.begin(), name.end(), '_', '-');
    static const std::map<std::string, std::string> aliases = {
        {"delivery-vs-distance", "delivery"},
        {"packet-delivery-curves", "packet-delivery"},
        {"one-hop-delay", "delay"},
    };
    if (const auto it = aliases.find(name); it != aliases.end())
    {
        return it->second;
    }
    return name;
}

} // namespace

const std::vector<ExperimentInfo>&
experiment_registry()
{
    static const std::vector<ExperimentInfo> registry = {
        {"power-trace", "received power samples over time at one distance", power_trace},
        {"delivery", "link delivery ratio vs distance, analytic and Monte Carlo", delivery},
        {"packet-delivery", "retry-limited packet delivery vs link delivery ratio", packet_delivery_exp},
        {"backoff-curve", "expected backoff vs link delivery ratio", backoff_curve},
        {"delay", "simulated one-hop MAC delay vs distance", delay},
        {"capacity", "saturated single-hop throughput with and without RTS/CTS", capacity},
        {"unfairness", "two contending connections, one fixed and one of varying quality", unfairness},
        {"hop-order", "two-hop chain throughput for strong/weak link orders", hop_order},
        {"flooding", "network-wide broadcast coverage under probabilistic drops", flooding},
        {"capture-geometry", "capture line vs collision-avoidance and carrier-sense bounds", capture_geometry},
        {"validate", "closed forms vs oracles and Monte Carlo agreement suites", validate_suite},
    };
    return registry;
}

const ExperimentInfo&
find_experiment(const std::string& name)
{
    const std::string key = normalize(name);
    for (const auto& e : experiment_registry())
    {
        if (e.name == key)
        {
            return e;
        }
    }
    throw UnknownExperiment(name);
}

RunManifest
run_experiment(const std::string& name, const Config& config, const std::filesystem::path& out_dir)
{
    const ExperimentInfo& info = find_experiment(name);
    config.validate();

    RunManifest m;
    m.tool_version = FADEMAC_VERSION;
    m.experiment = info.name;
    m.config_text = to_config_text(config);
    m.seed = config.run.seed;
    m.replications = config.run.replications;
    m.started_utc = utc_now();

    ExperimentOutput out = info.run(config);

    std::filesystem::create_directories(out_dir);
    for (const auto& [file, table] : out.tables)
    {
        emit_csv(table, out_dir / file);
        m.outputs.push_back({file, sha256_file(out_dir / file)});
    }
    if (config.run.trace && out.trace_run)
    {
        const std::string file = file_stem(info.name) + "_trace.csv";
        std::ostringstream trace;
        run(out.trace_run->scenario, out.trace_run->mac, out.trace_run->seed, &trace);
        std::ofstream f(out_dir / file, std::ios::binary);
        f << trace.str();
        if (!f)
        {
            throw std::runtime_error("cannot write " + (out_dir / file).string());
        }
        f.close();
        m.outputs.push_back({file, sha256_file(out_dir / file)});
    }
    m.checks = std::move(out.checks);
    m.finished_utc = utc_now();
    m.write(out_dir / (file_stem(info.name) + ".manifest.json"));
    return m;
}

RerunReport
rerun_from_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir)
{
    RerunReport report;
    report.original = RunManifest::read(manifest_path);
    const Config config = parse_config(report.original.config_text);
    report.rerun = run_experiment(report.original.experiment, config, out_dir);

    std::map<std::string, std::string> fresh;
    for (const auto& o : report.rerun.outputs)
    {
        fresh[o.file] = o.sha256;
    }
    for (const auto& o : report.original.outputs)
    {
        const auto it = fresh.find(o.file);
        if (it == fresh.end() || it->second != o.sha256)
        {
            report.mismatched.push_back(o.file);
        }
        if (it != fresh.end())
        {
            fresh.erase(it);
        }
    }
    for (const auto& [file, digest] : fresh)
    {
        report.mismatched.push_back(file);
    }
    return report;
}

} // namespace fademac
