#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fademac/geometry.hpp"

#include <cmath>

using namespace fademac;

TEST_CASE("capture line")
{
    const CaptureParams p;
    CHECK(capture_line(p, 200.0) == doctest::Approx(355.65588200778456025).epsilon(1e-12));
    CHECK(capture_line(p, 100.0) == doctest::Approx(177.82794100389228012).epsilon(1e-12));
    CaptureParams unity = p;
    unity.capture_threshold = 1.0;
    CHECK(capture_line(unity, 123.0) == doctest::Approx(123.0));
    for (double d = 5.0; d < 300.0; d += 17.0)
    {
        CHECK(capture_line(p, 3.0 * d) == doctest::Approx(3.0 * capture_line(p, d)).epsilon(1e-12));
    }
}

TEST_CASE("collision avoidance bound")
{
    const CaptureParams p;
    CHECK(ca_blocks(p, 250.0));
    CHECK_FALSE(ca_blocks(p, 250.1));
    CHECK(ca_blocks(p, 0.0));
}

TEST_CASE("carrier sense bounds")
{
    const CaptureParams p;
    CHECK(p.cs_range_m() == doctest::Approx(550.0));
    CHECK(csma_blocks(p, 250.0, 300.0, CsmaCase::Worst));
    CHECK_FALSE(csma_blocks(p, 250.0, 301.0, CsmaCase::Worst));
    CHECK(csma_blocks(p, 10.0, 550.0, CsmaCase::Average));
    CHECK_FALSE(csma_blocks(p, 10.0, 550.5, CsmaCase::Average));
}

TEST_CASE("region table")
{
    const CaptureParams p;
    const std::vector<double> one{100.0};
    const auto single = region_table(p, one);
    REQUIRE(single.size() == 1);
    CHECK(single[0].capture_line_m == doctest::Approx(177.82794100389228012));
    CHECK(single[0].ca_bound_m == 250.0);
    CHECK(single[0].csma_avg_bound_m == doctest::Approx(550.0));
    CHECK(single[0].csma_worst_bound_m == doctest::Approx(450.0));

    std::vector<double> grid;
    for (double d = 10.0; d <= 300.0; d += 10.0)
    {
        grid.push_back(d);
    }
    for (const auto& row : region_table(p, grid))
    {
        CHECK(row.csma_worst_bound_m >= row.ca_bound_m - 1e-9);
    }
    CHECK_THROWS(region_table(p, std::vector<double>{}));
}

TEST_CASE("validation")
{
    CaptureParams p;
    p.capture_threshold = 0.5;
    CHECK_THROWS(p.validate());
    p = {};
    p.cs_range_factor = 0.9;
    CHECK_THROWS(p.validate());
}
