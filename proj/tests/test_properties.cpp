#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fademac/analytic.hpp"
#include "fademac/config.hpp"
#include "fademac/geometry.hpp"
#include "fademac/propagation.hpp"
#include "fademac/rng.hpp"
#include "fademac/scenarios.hpp"
#include "fademac/table.hpp"

#include <charconv>
#include <cmath>
#include <set>

using namespace fademac;

namespace {

constexpr int kCases = 300;

PropagationParams
random_params(Rng& rng)
{
    PropagationParams p;
    p.beta = rng.uniform(2.0, 5.0);
    p.sigma_db = rng.uniform(0.5, 10.0);
    p.d0_m = rng.uniform(0.5, 5.0);
    p.p_th_dbm = rng.uniform(-90.0, -50.0);
    p.ideal_range_m = rng.uniform(50.0, 500.0);
    return p;
}

} // namespace

TEST_CASE("delivery ratio is a decreasing probability with 0.5 at the ideal range")
{
    Rng rng(101);
    for (int i = 0; i < kCases; ++i)
    {
        const auto params = random_params(rng);
        const double a = rng.uniform(params.d0_m, 3.0 * params.ideal_range_m);
        const double b = a * rng.uniform(1.01, 2.0);
        const double pa = link_delivery_ratio(params, a).value();
        const double pb = link_delivery_ratio(params, b).value();
        CHECK(pa >= 0.0);
        CHECK(pa <= 1.0);
        CHECK(pb <= pa);
        CHECK(link_delivery_ratio(params, params.ideal_range_m).value() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(mean_received_power_dbm(params, params.d0_m) == doctest::Approx(params.p_d0_dbm()));
        if (pa > 1e-9 && pa < 1.0 - 1e-9)
        {
            CHECK(distance_for_delivery_ratio(params, LinkRatio(pa)) == doctest::Approx(a).epsilon(1e-6));
        }
    }
}

TEST_CASE("each doubling of distance costs 10 beta log10(2) dB")
{
    Rng rng(102);
    for (int i = 0; i < kCases; ++i)
    {
        const auto params = random_params(rng);
        const double d = rng.uniform(params.d0_m, 1000.0);
        const double drop = mean_received_power_dbm(params, d) - mean_received_power_dbm(params, 2.0 * d);
        CHECK(drop == doctest::Approx(10.0 * params.beta * std::log10(2.0)));
    }
}

TEST_CASE("packet delivery is a probability, monotone in p and in both limits")
{
    Rng rng(103);
    for (int i = 0; i < kCases; ++i)
    {
        RetryLimits lim;
        lim.srl = static_cast<int>(rng.uniform_int(1, 9));
        lim.lrl = static_cast<int>(rng.uniform_int(1, 9));
        lim.rts_cts = rng.bernoulli(0.5);
        const LinkRatio p(rng.uniform());
        const LinkRatio q(std::min(1.0, p.value() + rng.uniform(0.0, 0.2)));
        const auto tree = enumerate_retry_tree(p, lim);
        CHECK(tree.delivered + tree.dropped == doctest::Approx(1.0).epsilon(1e-12));
        const double d = packet_delivery(p, lim);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0 + 1e-15);
        CHECK(packet_delivery(q, lim) >= d - 1e-12);
        RetryLimits more = lim;
        more.srl += 1;
        more.lrl += 1;
        CHECK(packet_delivery(p, more) >= d - 1e-12);
        CHECK(d >= attempt_probs(p, lim.rts_cts).p_s - 1e-12);
    }
}

TEST_CASE("without RTS the retry process reduces to independent lrl attempts")
{
    Rng rng(104);
    for (int i = 0; i < kCases; ++i)
    {
        RetryLimits lim;
        lim.rts_cts = false;
        lim.srl = static_cast<int>(rng.uniform_int(1, 9));
        lim.lrl = static_cast<int>(rng.uniform_int(1, 9));
        const LinkRatio p(rng.uniform());
        CHECK(packet_delivery(p, lim) == doctest::Approx(packet_delivery_no_rts(p, lim.lrl)).epsilon(1e-12));
    }
}

TEST_CASE("mean backoff lies within the ladder and agrees with the Markov chain")
{
    Rng rng(105);
    for (int i = 0; i < kCases; ++i)
    {
        BackoffParams bp;
        const auto lo = rng.uniform_int(1, 6);
        bp.cw_min_slots = (1 << lo) - 1;
        bp.cw_max_slots = (1 << (lo + rng.uniform_int(0, 5))) - 1;
        const LinkRatio p(rng.uniform(0.05, 1.0));
        const LinkRatio q(std::min(1.0, p.value() + 0.05));
        const double m = expected_backoff_slots(p, bp);
        CHECK(m >= bp.cw_min_slots / 2.0 - 1e-9);
        CHECK(m <= bp.cw_max_slots / 2.0 + 1e-9);
        CHECK(expected_backoff_slots(q, bp) <= m + 1e-9);
        CHECK(backoff_stationary_mean_slots(p, bp) == doctest::Approx(m).epsilon(1e-8));
    }
}

TEST_CASE("blocking regions nest")
{
    Rng rng(106);
    const CaptureParams g;
    for (int i = 0; i < kCases * 3; ++i)
    {
        const double d_sr = rng.uniform(1.0, g.tx_range_m);
        const double d_ir = rng.uniform(1.0, 2.0 * g.cs_range_m());
        if (csma_blocks(g, d_sr, d_ir, CsmaCase::Worst))
        {
            CHECK(csma_blocks(g, d_sr, d_ir, CsmaCase::Average));
        }
        if (ca_blocks(g, d_ir))
        {
            CHECK(csma_blocks(g, d_sr, d_ir, CsmaCase::Average));
        }
        CHECK(capture_line(g, d_sr) > d_sr);
        CHECK(capture_line(g, 2.0 * d_sr) == doctest::Approx(2.0 * capture_line(g, d_sr)));
    }
}

TEST_CASE("derived seeds do not collide")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {1ULL, 2ULL})
    {
        for (const char* tag : {"capacity", "delay"})
        {
            for (std::uint64_t key = 0; key < 50; ++key)
            {
                for (std::uint64_t rep = 0; rep < 10; ++rep)
                {
                    seen.insert(derive_seed(base, tag, key, rep));
                }
            }
        }
    }
    CHECK(seen.size() == 2 * 2 * 50 * 10);
}

TEST_CASE("summary bounds contain the mean and shrink with agreement")
{
    Rng rng(107);
    for (int i = 0; i < kCases; ++i)
    {
        const auto n = static_cast<std::size_t>(rng.uniform_int(2, 30));
        std::vector<double> raw(n);
        for (auto& v : raw)
        {
            v = rng.uniform(-100.0, 100.0);
        }
        const auto s = summarize(raw);
        CHECK(s.lower() <= s.mean);
        CHECK(s.mean <= s.upper());
        const auto flat = summarize(std::vector<double>(n, raw[0]));
        CHECK(flat.mean == doctest::Approx(raw[0]));
        CHECK(*flat.half_width == doctest::Approx(0.0));
    }
}

TEST_CASE("random tables survive a CSV round-trip")
{
    Rng rng(108);
    for (int i = 0; i < 50; ++i)
    {
        Table t;
        t.columns = {"x", "n"};
        std::vector<double> xs;
        for (int r = 0; r < 20; ++r)
        {
            const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.uniform_int(-60, 60)));
            xs.push_back(x);
            t.add_row({x, std::int64_t{r}});
        }
        const auto rows = parse_csv(to_csv_string(t));
        REQUIRE(rows.size() == 21);
        for (int r = 0; r < 20; ++r)
        {
            double back = 0.0;
            const auto& s = rows[r + 1][0];
            std::from_chars(s.data(), s.data() + s.size(), back);
            CHECK(back == xs[r]);
        }
    }
}

TEST_CASE("random configurations round-trip through text")
{
    Rng rng(109);
    for (int i = 0; i < 50; ++i)
    {
        Config c;
        c.propagation = random_params(rng);
        c.mac.rts_cts = rng.bernoulli(0.5);
        c.mac.retry.srl = static_cast<int>(rng.uniform_int(1, 10));
        c.mac.retry.lrl = static_cast<int>(rng.uniform_int(1, 10));
        c.run.seed = static_cast<std::uint64_t>(rng.uniform_int(0, INT64_MAX));
        c.run.replications = static_cast<int>(rng.uniform_int(1, 50));
        c.experiment.capacity_distances = {rng.uniform(10.0, 300.0), rng.uniform(10.0, 300.0)};
        c.experiment.flood_drop_probs = {rng.uniform(), rng.uniform()};
        CHECK(parse_config(to_config_text(c)) == c);
    }
}
