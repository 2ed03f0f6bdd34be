#include "fademac/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace fademac {

Summary
summarize(std::vector<double> raw)
{
    Summary s;
    if (raw.empty())
    {
        return s;
    }
    const double n = static_cast<double>(raw.size());
    s.mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
    if (raw.size() >= 2)
    {
        double ss = 0.0;
        for (double v : raw)
        {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.half_width = 1.959963984540054 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    s.raw = std::move(raw);
    return s;
}

const Summary&
ExperimentResult::Point::metric(const std::string& name) const
{
    for (const auto& [k, v] : metrics)
    {
        if (k == name)
        {
            return v;
        }
    }
    throw std::out_of_range("no metric named " + name);
}

double
ExperimentResult::Point::key(const std::string& name) const
{
    for (const auto& [k, v] : keys)
    {
        if (k == name)
        {
            return v;
        }
    }
    throw std::out_of_range("no key named " + name);
}

const ExperimentResult::Point&
ExperimentResult::at_label(const std::string& label) const
{
    for (const auto& p : points)
    {
        if (p.label == label)
        {
            return p;
        }
    }
    throw std::out_of_range("no point labelled " + label);
}

Table
ExperimentResult::to_table() const
{
    Table t;
    if (points.empty())
    {
        return t;
    }
    const auto& first = points.front();
    const bool labelled = std::any_of(points.begin(), points.end(), [](const Point& p) { return !p.label.empty(); });
    for (const auto& [k, v] : first.keys)
    {
        t.columns.push_back(k);
    }
    if (labelled)
    {
        t.columns.emplace_back("label");
    }
    for (const auto& [k, v] : first.metrics)
    {
        t.columns.push_back(k + "_mean");
        t.columns.push_back(k + "_ci95");
    }
    for (const auto& p : points)
    {
        std::vector<Cell> row;
        for (const auto& [k, v] : p.keys)
        {
            row.emplace_back(v);
        }
        if (labelled)
        {
            row.emplace_back(p.label);
        }
        for (const auto& [k, s] : p.metrics)
        {
            row.emplace_back(s.mean);
            if (s.half_width)
            {
                row.emplace_back(*s.half_width);
            }
            else
            {
                row.emplace_back(std::string{});
            }
        }
        t.add_row(std::move(row));
    }
    return t;
}

Table
ExperimentResult::metadata_table() const
{
    Table t;
    t.columns = {"key", "value"};
    for (const auto& [k, v] : metadata)
    {
        t.add_row({k, v});
    }
    return t;
}

std::vector<double>
parallel_map(std::size_t count, unsigned threads, const std::function<double(std::size_t)>& fn)
{
    std::vector<double> out(count, 0.0);
    if (threads == 0)
    {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            out[i] = fn(i);
        }
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
        {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++)
                {
                    try
                    {
                        out[i] = fn(i);
                    }
                    catch (...)
                    {
                        if (!failed.exchange(true))
                        {
                            failure = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
    return out;
}

namespace {

std::uint64_t
key_of(double v)
{
    return std::bit_cast<std::uint64_t>(v);
}

/// Runs `replications` copies of fn(seed) per point and summarizes them.
std::vector<Summary>
replicate(std::size_t points, const ReplicationPlan& plan,
          const std::function<double(std::size_t point, std::uint64_t rep)>& fn)
{
    const auto reps = static_cast<std::size_t>(plan.replications);
    const auto flat = parallel_map(points * reps, plan.threads, [&](std::size_t k) {
        return fn(k / reps, static_cast<std::uint64_t>(k % reps));
    });
    std::vector<Summary> out;
    for (std::size_t p = 0; p < points; ++p)
    {
        out.push_back(summarize({flat.begin() + static_cast<std::ptrdiff_t>(p * reps),
                                 flat.begin() + static_cast<std::ptrdiff_t>((p + 1) * reps)}));
    }
    return out;
}

void
require_plan(const ReplicationPlan& plan)
{
    if (plan.replications < 1)
    {
        throw std::invalid_argument("replications must be >= 1");
    }
}

std::string
fmt_pos(Position p)
{
    return "(" + format_double(p.x) + " " + format_double(p.y) + ")";
}

} // namespace

std::vector<double>
linear_grid(double lo, double hi, int points)
{
    if (points < 1)
    {
        throw std::invalid_argument("grid needs at least one point");
    }
    std::vector<double> g;
    for (int i = 0; i < points; ++i)
    {
        g.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
    }
    return g;
}

Table
exp_power_trace(const PropagationParams& params, double d_m, double duration_s, double interval_s,
                std::uint64_t seed)
{
    if (!(interval_s > 0.0) || !(duration_s > 0.0))
    {
        throw std::invalid_argument("power trace: duration and interval must be > 0");
    }
    Rng rng(derive_seed(seed, "power-trace", key_of(d_m), 0));
    Table t;
    t.columns = {"time_s", "power_dbm", "threshold_dbm"};
    const auto samples = static_cast<std::int64_t>(std::floor(duration_s / interval_s + 1e-9));
    for (std::int64_t k = 0; k < samples; ++k)
    {
        t.add_row({static_cast<double>(k) * interval_s, sample_received_power_dbm(params, d_m, rng),
                   params.p_th_dbm});
    }
    return t;
}

Table
exp_delivery_vs_distance(const PropagationParams& params, std::span<const double> grid, int n_samples,
                         std::uint64_t seed)
{
    if (n_samples < 1)
    {
        throw std::invalid_argument("delivery: n_samples must be >= 1");
    }
    Table t;
    t.columns = {"distance_m", "analytic_p", "montecarlo_p", "two_ray_p", "tolerance_3sigma"};
    for (double d : grid)
    {
        Rng rng(derive_seed(seed, "delivery", key_of(d), 0));
        std::int64_t hits = 0;
        for (int k = 0; k < n_samples; ++k)
        {
            hits += sample_received_power_dbm(params, d, rng) >= params.p_th_dbm ? 1 : 0;
        }
        const double p = link_delivery_ratio(params, d).value();
        const double mc = static_cast<double>(hits) / n_samples;
        t.add_row({d, p, mc, d <= params.ideal_range_m ? 1.0 : 0.0, 3.0 * std::sqrt(p * (1.0 - p) / n_samples)});
    }
    return t;
}

Table
exp_packet_delivery_curves(std::span<const double> p_grid, const RetryLimits& limits)
{
    RetryLimits rts = limits;
    rts.rts_cts = true;
    rts.long_packet = true;
    RetryLimits basic = limits;
    basic.rts_cts = false;
    const bool closed_form = limits.srl == 7 && limits.lrl == 4;

    Table t;
    t.columns = {"p", "link", "short_rtscts", "long_rtscts_oracle", "long_rtscts_closed_form", "no_rts"};
    for (double pv : p_grid)
    {
        const LinkRatio p(pv);
        t.add_row({pv, pv, packet_delivery_short_rtscts(p, limits.srl), retry_process_oracle(p, rts),
                   closed_form ? packet_delivery_long_rtscts(p, rts) : std::nan(""),
                   retry_process_oracle(p, basic)});
    }
    return t;
}

Table
exp_backoff_curve(std::span<const double> p_grid, const BackoffParams& backoff)
{
    Table t;
    t.columns = {"p", "expected_backoff_slots", "markov_chain_slots"};
    for (double pv : p_grid)
    {
        const LinkRatio p(pv);
        t.add_row({pv, expected_backoff_slots(p, backoff), backoff_stationary_mean_slots(p, backoff)});
    }
    return t;
}

namespace {

Scenario
single_hop(const PropagationParams& params, double d_m, int payload_bytes, double duration_s)
{
    Scenario s;
    s.nodes = {{0, {0.0, 0.0}}, {1, {d_m, 0.0}}};
    s.flows = {{{0, 1}, payload_bytes, 0.0, 0.0}};
    s.channel.propagation = params;
    s.duration_s = duration_s;
    return s;
}

} // namespace

ExperimentResult
exp_one_hop_delay(const SimSetup& setup, std::span<const double> distances, const ReplicationPlan& plan)
{
    require_plan(plan);
    const std::vector<double> grid(distances.begin(), distances.end());
    const auto delay = replicate(grid.size(), plan, [&](std::size_t p, std::uint64_t rep) {
        const auto scenario = single_hop(setup.propagation, grid[p], setup.payload_bytes, setup.duration_s);
        const auto m = run(scenario, setup.mac, derive_seed(plan.base_seed, "delay", key_of(grid[p]), rep));
        const auto stats = one_hop_delay(m, 0);
        return stats ? stats->mean_s : std::nan("");
    });

    ExperimentResult r;
    r.name = "delay";
    for (std::size_t p = 0; p < grid.size(); ++p)
    {
        ExperimentResult::Point pt;
        pt.keys = {{"distance_m", grid[p]}};
        pt.metrics = {{"link_p", summarize({link_delivery_ratio(setup.propagation, grid[p]).value()})},
                      {"delay_s", delay[p]}};
        r.points.push_back(std::move(pt));
    }
    r.metadata = {{"rts_cts", setup.mac.rts_cts ? "true" : "false"},
                  {"payload_bytes", std::to_string(setup.payload_bytes)}};
    return r;
}

ExperimentResult
exp_capacity(const SimSetup& setup, std::span<const double> distances, const ReplicationPlan& plan)
{
    require_plan(plan);
    const std::vector<double> grid(distances.begin(), distances.end());
    auto mode_run = [&](bool rts) {
        DcfConfig mac = setup.mac;
        mac.rts_cts = rts;
        return replicate(grid.size(), plan, [&, mac](std::size_t p, std::uint64_t rep) {
            return saturation_capacity(grid[p], mac, setup.propagation, setup.payload_bytes, setup.duration_s,
                                       derive_seed(plan.base_seed, rts ? "capacity-rts" : "capacity-basic",
                                                   key_of(grid[p]), rep));
        });
    };
    const auto with_rts = mode_run(true);
    const auto without = mode_run(false);

    ExperimentResult r;
    r.name = "capacity";
    for (std::size_t p = 0; p < grid.size(); ++p)
    {
        ExperimentResult::Point pt;
        pt.keys = {{"distance_m", grid[p]}};
        pt.metrics = {{"link_p", summarize({link_delivery_ratio(setup.propagation, grid[p]).value()})},
                      {"rts_bps", with_rts[p]},
                      {"no_rts_bps", without[p]}};
        r.points.push_back(std::move(pt));
    }
    r.metadata = {{"payload_bytes", std::to_string(setup.payload_bytes)},
                  {"duration_s", format_double(setup.duration_s)},
                  {"warmup_fraction", format_double(setup.mac.warmup_fraction)}};
    return r;
}

Scenario
unfairness_scenario(const PropagationParams& params, const UnfairnessGeometry& g, double varied_m, int payload_bytes,
                    double duration_s, bool include_conn1, bool include_conn2)
{
    Scenario s;
    s.channel.propagation = params;
    s.duration_s = duration_s;
    s.nodes = {{1, {0.0, 0.0}},
               {2, {0.0, g.fixed_distance_m}},
               {3, {g.source_separation_m, 0.0}},
               {4, {g.source_separation_m, -varied_m}}};
    if (include_conn1)
    {
        s.flows.push_back({{1, 2}, payload_bytes, 0.0, 0.0});
    }
    if (include_conn2)
    {
        s.flows.push_back({{3, 4}, payload_bytes, 0.0, 0.0});
    }
    return s;
}

ExperimentResult
exp_unfairness(const SimSetup& setup, const UnfairnessGeometry& geometry, const ReplicationPlan& plan)
{
    require_plan(plan);
    const auto& grid = geometry.varied_distances;
    const auto reps = static_cast<std::size_t>(plan.replications);
    // Three runs per (point, replication): contention, conn1 alone, conn2 alone.
    constexpr std::size_t kRuns = 3;
    const auto flat = parallel_map(grid.size() * reps * kRuns * 2, plan.threads, [&](std::size_t k) {
        const std::size_t which = k % 2;
        const std::size_t run_kind = (k / 2) % kRuns;
        const std::size_t rep = (k / 2 / kRuns) % reps;
        const std::size_t p = k / 2 / kRuns / reps;
        const bool c1 = run_kind != 2;
        const bool c2 = run_kind != 1;
        if ((which == 0 && !c1) || (which == 1 && !c2))
        {
            return 0.0;
        }
        const auto scenario = unfairness_scenario(setup.propagation, geometry, grid[p], setup.payload_bytes,
                                                  setup.duration_s, c1, c2);
        static constexpr const char* tags[] = {"unfair-both", "unfair-solo1", "unfair-solo2"};
        const auto m = run(scenario, setup.mac, derive_seed(plan.base_seed, tags[run_kind], key_of(grid[p]), rep));
        const std::size_t flow = (run_kind == 0) ? which : 0;
        return m.flows[flow].throughput_bps;
    });
    auto at = [&](std::size_t p, std::size_t rep, std::size_t run_kind, std::size_t which) {
        return flat[((p * reps + rep) * kRuns + run_kind) * 2 + which];
    };

    ExperimentResult r;
    r.name = "unfairness";
    int clamps = 0;
    for (std::size_t p = 0; p < grid.size(); ++p)
    {
        std::vector<double> t1, t2, s1, s2, n1, n2, gap;
        for (std::size_t rep = 0; rep < reps; ++rep)
        {
            const double a = at(p, rep, 0, 0);
            const double b = at(p, rep, 0, 1);
            const double sa = at(p, rep, 1, 0);
            const double sb = at(p, rep, 2, 1);
            double na = sa > 0.0 ? a / sa : 0.0;
            double nb = sb > 0.0 ? b / sb : 0.0;
            if (na > 1.0)
            {
                na = 1.0;
                ++clamps;
            }
            if (nb > 1.0)
            {
                nb = 1.0;
                ++clamps;
            }
            t1.push_back(a);
            t2.push_back(b);
            s1.push_back(sa);
            s2.push_back(sb);
            n1.push_back(na);
            n2.push_back(nb);
            gap.push_back(na - nb);
        }
        ExperimentResult::Point pt;
        pt.keys = {{"varied_distance_m", grid[p]}};
        pt.metrics = {{"conn1_bps", summarize(t1)},        {"conn2_bps", summarize(t2)},
                      {"conn1_solo_bps", summarize(s1)},   {"conn2_solo_bps", summarize(s2)},
                      {"conn1_normalized", summarize(n1)}, {"conn2_normalized", summarize(n2)},
                      {"normalized_gap", summarize(gap)}};
        r.points.push_back(std::move(pt));
    }

    const auto sample = unfairness_scenario(setup.propagation, geometry, grid.empty() ? 0.0 : grid.front(),
                                            setup.payload_bytes, setup.duration_s, true, true);
    r.metadata = {{"sender1", fmt_pos(sample.nodes[0].pos)},
                  {"receiver1", fmt_pos(sample.nodes[1].pos)},
                  {"sender2", fmt_pos(sample.nodes[2].pos)},
                  {"receiver2", "(" + format_double(geometry.source_separation_m) + " -varied_distance_m)"},
                  {"fixed_distance_m", format_double(geometry.fixed_distance_m)},
                  {"source_separation_m", format_double(geometry.source_separation_m)},
                  {"payload_bytes", std::to_string(setup.payload_bytes)},
                  {"rts_cts", setup.mac.rts_cts ? "true" : "false"},
                  {"backoff_enabled", setup.mac.backoff_enabled ? "true" : "false"},
                  {"normalized_clamped", std::to_string(clamps)}};
    return r;
}

ExperimentResult
exp_hop_order(const SimSetup& setup, const HopOrderSpec& spec, const ReplicationPlan& plan)
{
    require_plan(plan);
    struct Case
    {
        const char* label;
        double first;
        double second;
    };
    const std::vector<Case> cases = {{"strong-strong", spec.strong_m, spec.strong_m},
                                     {"strong-weak", spec.strong_m, spec.weak_m},
                                     {"weak-strong", spec.weak_m, spec.strong_m},
                                     {"weak-weak", spec.weak_m, spec.weak_m}};
    const auto thr = replicate(cases.size(), plan, [&](std::size_t c, std::uint64_t rep) {
        Scenario s;
        s.channel.propagation = setup.propagation;
        s.duration_s = setup.duration_s;
        s.nodes = {{0, {0.0, 0.0}}, {1, {cases[c].first, 0.0}}, {2, {cases[c].first + cases[c].second, 0.0}}};
        s.flows = {{{0, 1, 2}, setup.payload_bytes, 0.0, 0.0}};
        return run(s, setup.mac, derive_seed(plan.base_seed, "hop-order", c, rep)).flows[0].throughput_bps;
    });

    ExperimentResult r;
    r.name = "hop-order";
    for (std::size_t c = 0; c < cases.size(); ++c)
    {
        ExperimentResult::Point pt;
        pt.keys = {{"first_hop_m", cases[c].first}, {"second_hop_m", cases[c].second}};
        pt.label = cases[c].label;
        pt.metrics = {{"throughput_bps", thr[c]}};
        r.points.push_back(std::move(pt));
    }
    r.metadata = {{"strong_m", format_double(spec.strong_m)},
                  {"weak_m", format_double(spec.weak_m)},
                  {"layout", "A (0 0) -> B (first 0) -> C (first+second 0)"},
                  {"rts_cts", setup.mac.rts_cts ? "true" : "false"}};
    return r;
}

std::vector<NodeSpec>
random_deployment(int count, double area_m, double min_separation_m, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<NodeSpec> nodes;
    for (int i = 0; i < count; ++i)
    {
        for (int attempt = 0;; ++attempt)
        {
            if (attempt > 10000)
            {
                throw std::runtime_error("random_deployment: cannot separate nodes");
            }
            const Position p{rng.uniform(0.0, area_m), rng.uniform(0.0, area_m)};
            const bool clear = std::all_of(nodes.begin(), nodes.end(),
                                           [&](const NodeSpec& n) { return distance(n.pos, p) >= min_separation_m; });
            if (clear)
            {
                nodes.push_back({i, p});
                break;
            }
        }
    }
    return nodes;
}

ExperimentResult
exp_flooding(const PropagationParams& params, const DcfConfig& mac, const FloodingSpec& spec,
             const ReplicationPlan& plan)
{
    require_plan(plan);
    struct Point
    {
        int n;
        double drop;
    };
    std::vector<Point> points;
    for (int n : spec.node_counts)
    {
        if (spec.fading_channel)
        {
            points.push_back({n, std::nan("")});
            continue;
        }
        for (double d : spec.drop_probs)
        {
            points.push_back({n, d});
        }
    }
    const auto cov = replicate(points.size(), plan, [&](std::size_t p, std::uint64_t rep) {
        const auto n = static_cast<std::uint64_t>(points[p].n);
        Scenario s;
        s.nodes = random_deployment(points[p].n, spec.area_m, params.d0_m,
                                    derive_seed(plan.base_seed, "flood-topology", n, rep));
        s.channel.propagation = params;
        if (!spec.fading_channel)
        {
            s.channel.bernoulli_drop = points[p].drop;
        }
        s.flood = FloodSpec{0, 0.001, spec.payload_bytes, spec.jitter_s};
        s.duration_s = spec.duration_s;
        // Same MAC seed for every drop probability of a topology.
        return run(s, mac, derive_seed(plan.base_seed, "flood", n, rep)).coverage;
    });

    ExperimentResult r;
    r.name = "flooding";
    for (std::size_t p = 0; p < points.size(); ++p)
    {
        ExperimentResult::Point pt;
        pt.keys = {{"nodes", static_cast<double>(points[p].n)}};
        if (!spec.fading_channel)
        {
            pt.keys.emplace_back("drop_p", points[p].drop);
        }
        pt.metrics = {{"coverage", cov[p]}};
        r.points.push_back(std::move(pt));
    }
    r.metadata = {{"area_m", format_double(spec.area_m)},
                  {"channel", spec.fading_channel ? "log-normal" : "bernoulli"},
                  {"jitter_s", format_double(spec.jitter_s)},
                  {"payload_bytes", std::to_string(spec.payload_bytes)}};
    return r;
}

Table
exp_capture_geometry(const CaptureParams& params, std::span<const double> d_sr_grid)
{
    Table t;
    t.columns = {"d_sr", "capture_line", "ca_bound", "csma_avg_bound", "csma_worst_bound"};
    for (const auto& row : region_table(params, d_sr_grid))
    {
        t.add_row({row.d_sr_m, row.capture_line_m, row.ca_bound_m, row.csma_avg_bound_m, row.csma_worst_bound_m});
    }
    return t;
}

} // namespace fademac
