#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fademac/scenarios.hpp"

#include <cmath>

using namespace fademac;

TEST_CASE("summaries")
{
    const auto one = summarize({3.0});
    CHECK(one.mean == 3.0);
    CHECK_FALSE(one.half_width.has_value());
    const auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    REQUIRE(s.half_width.has_value());
    CHECK(*s.half_width == doctest::Approx(1.959963984540054 * std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(s.raw.size() == 4);
}

TEST_CASE("parallel map is order-stable")
{
    const auto f = [](std::size_t i) { return std::sqrt(static_cast<double>(i)) * 3.0; };
    CHECK(parallel_map(100, 1, f) == parallel_map(100, 4, f));
    CHECK(parallel_map(0, 4, f).empty());
    CHECK_THROWS(parallel_map(10, 3, [](std::size_t i) -> double {
        if (i == 7)
        {
            throw std::runtime_error("boom");
        }
        return 0.0;
    }));
}

TEST_CASE("power trace")
{
    PropagationParams flat;
    flat.sigma_db = 0.0;
    const auto t = exp_power_trace(flat, 220.0, 1.0, 0.01, 1);
    REQUIRE(t.rows.size() == 100);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        CHECK(t.number(r, "power_dbm") == mean_received_power_dbm(flat, 220.0));
    }

    const PropagationParams prop;
    const auto f = exp_power_trace(prop, 220.0, 10.0, 0.01, 1);
    const auto n = static_cast<double>(f.rows.size());
    double above = 0.0;
    for (std::size_t r = 0; r < f.rows.size(); ++r)
    {
        above += f.number(r, "power_dbm") >= prop.p_th_dbm ? 1.0 : 0.0;
    }
    const double p = 0.66143400443865264832;
    CHECK(above > 0.0);
    CHECK(above < n);
    CHECK(std::abs(above / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("delivery table")
{
    const PropagationParams prop;
    const std::vector<double> grid{100.0, 220.0, 250.0, 300.0};
    const auto t = exp_delivery_vs_distance(prop, grid, 100000, 4);
    CHECK(t.columns == std::vector<std::string>{"distance_m", "analytic_p", "montecarlo_p", "two_ray_p",
                                                "tolerance_3sigma"});
    CHECK(t.number(2, "analytic_p") == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(t.number(1, "analytic_p") == doctest::Approx(0.661434004).epsilon(1e-8));
    CHECK(t.number(2, "two_ray_p") == 1.0);
    CHECK(t.number(3, "two_ray_p") == 0.0);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        CHECK(std::abs(t.number(r, "montecarlo_p") - t.number(r, "analytic_p")) <=
              t.number(r, "tolerance_3sigma") + 1e-5);
    }
}

TEST_CASE("packet delivery curves")
{
    const auto grid = linear_grid(0.0, 1.0, 11);
    const auto t = exp_packet_delivery_curves(grid, RetryLimits{});
    const auto last = t.rows.size() - 1;
    for (const char* col : {"link", "short_rtscts", "long_rtscts_oracle", "long_rtscts_closed_form", "no_rts"})
    {
        CHECK(t.number(last, col) == doctest::Approx(1.0));
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        CHECK(std::abs(t.number(r, "short_rtscts") - t.number(r, "long_rtscts_oracle")) <= 0.05);
        CHECK(t.number(r, "no_rts") >= t.number(r, "long_rtscts_oracle"));
    }
}

TEST_CASE("linear grid")
{
    CHECK(linear_grid(0.0, 1.0, 3) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(linear_grid(2.0, 5.0, 1) == std::vector<double>{2.0});
    CHECK_THROWS(linear_grid(0.0, 1.0, 0));
}

TEST_CASE("unfairness geometry and metadata")
{
    const PropagationParams prop;
    const UnfairnessGeometry g;
    const auto s = unfairness_scenario(prop, g, 200.0, 500, 1.0, true, true);
    REQUIRE(s.nodes.size() == 4);
    const double sources = distance(s.nodes[0].pos, s.nodes[2].pos);
    const double receivers = distance(s.nodes[1].pos, s.nodes[3].pos);
    CHECK(sources <= 2.2 * prop.ideal_range_m);
    CHECK(receivers > prop.ideal_range_m);
    CHECK(distance(s.nodes[0].pos, s.nodes[1].pos) == doctest::Approx(150.0));
    CHECK(distance(s.nodes[2].pos, s.nodes[3].pos) == doctest::Approx(200.0));

    SimSetup setup;
    setup.duration_s = 2.0;
    UnfairnessGeometry small = g;
    small.varied_distances = {150.0};
    const auto r = exp_unfairness(setup, small, {1, 2, 1});
    const auto& p = r.points.front();
    for (const char* m : {"conn1_normalized", "conn2_normalized"})
    {
        for (double v : p.metric(m).raw)
        {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    bool has_layout = false;
    for (const auto& [k, v] : r.metadata)
    {
        has_layout = has_layout || k == "receiver2";
    }
    CHECK(has_layout);
    const auto t = r.to_table();
    CHECK(t.columns.front() == "varied_distance_m");
    CHECK(t.column("conn1_normalized_mean") < t.column("conn1_normalized_ci95"));
}

TEST_CASE("experiments are reproducible")
{
    SimSetup setup;
    setup.duration_s = 2.0;
    const std::vector<double> d{150.0, 220.0};
    const auto a = exp_capacity(setup, d, {9, 3, 1}).to_table();
    const auto b = exp_capacity(setup, d, {9, 3, 3}).to_table();
    CHECK(to_csv_string(a) == to_csv_string(b));
}

TEST_CASE("adding replications keeps earlier ones")
{
    SimSetup setup;
    setup.duration_s = 2.0;
    const std::vector<double> d{200.0};
    const auto a = exp_one_hop_delay(setup, d, {5, 2, 1});
    const auto b = exp_one_hop_delay(setup, d, {5, 4, 1});
    const auto& ra = a.points[0].metric("delay_s").raw;
    const auto& rb = b.points[0].metric("delay_s").raw;
    CHECK(ra[0] == rb[0]);
    CHECK(ra[1] == rb[1]);
}

TEST_CASE("random deployment")
{
    const auto nodes = random_deployment(50, 1000.0, 1.0, 3);
    CHECK(nodes.size() == 50);
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
        CHECK(nodes[i].pos.x >= 0.0);
        CHECK(nodes[i].pos.x <= 1000.0);
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
        {
            CHECK(distance(nodes[i].pos, nodes[j].pos) >= 1.0);
        }
    }
}

TEST_CASE("flooding with no drops covers a dense field")
{
    FloodingSpec spec;
    spec.node_counts = {200};
    spec.drop_probs = {0.0};
    const auto r = exp_flooding(PropagationParams{}, DcfConfig{}, spec, {1, 3, 1});
    CHECK(r.points[0].metric("coverage").mean == 1.0);
}

TEST_CASE("capture geometry table")
{
    const std::vector<double> d{100.0};
    const auto t = exp_capture_geometry(CaptureParams{}, d);
    CHECK(t.columns ==
          std::vector<std::string>{"d_sr", "capture_line", "ca_bound", "csma_avg_bound", "csma_worst_bound"});
    CHECK(t.rows.size() == 1);
    CHECK(t.number(0, "capture_line") == doctest::Approx(177.8279410038923));
}
