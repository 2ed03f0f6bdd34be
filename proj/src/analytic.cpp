#include "fademac/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace fademac {

namespace {

bool
is_pow2_minus_one(int v)
{
    const unsigned u = static_cast<unsigned>(v) + 1U;
    return v > 0 && (u & (u - 1U)) == 0U;
}

} // namespace

void
RetryLimits::validate() const
{
    if (srl < 1)
    {
        throw std::invalid_argument("retry limits: srl must be >= 1");
    }
    if (lrl < 1)
    {
        throw std::invalid_argument("retry limits: lrl must be >= 1");
    }
}

void
BackoffParams::validate() const
{
    if (!is_pow2_minus_one(cw_min_slots) || !is_pow2_minus_one(cw_max_slots))
    {
        throw std::invalid_argument("backoff: cw_min and cw_max must be of the form 2^k - 1");
    }
    if (cw_min_slots > cw_max_slots)
    {
        throw std::invalid_argument("backoff: cw_min must not exceed cw_max");
    }
}

std::vector<int>
BackoffParams::ladder() const
{
    std::vector<int> cws;
    for (int cw = cw_min_slots; cw < cw_max_slots; cw = 2 * cw + 1)
    {
        cws.push_back(cw);
    }
    cws.push_back(cw_max_slots);
    return cws;
}

AttemptProbabilities
attempt_probs(LinkRatio p, bool rts_cts)
{
    const double p2 = p.value() * p.value();
    AttemptProbabilities a;
    if (rts_cts)
    {
        a.p_s = p2 * p2;
        a.p_sf = 1.0 - p2;
        a.p_lf = p2 * (1.0 - p2);
        a.p_f = a.p_sf + a.p_lf;
    }
    else
    {
        a.p_s = p2;
        a.p_sf = 0.0;
        a.p_lf = 1.0 - p2;
        a.p_f = a.p_lf;
    }
    return a;
}

double
packet_delivery_short_rtscts(LinkRatio p, int srl)
{
    const double p_s = std::pow(p.value(), 4);
    return 1.0 - std::pow(1.0 - p_s, srl);
}

double
packet_delivery_long_rtscts(LinkRatio p, const RetryLimits& limits)
{
    if (limits.srl != 7 || limits.lrl != 4)
    {
        throw std::invalid_argument("closed form is only defined for SRL 7 / LRL 4; use the oracle");
    }
    const auto a = attempt_probs(p, true);
    const double pf = a.p_f;
    const double s = a.p_sf;
    const double l = a.p_lf;
    const double pf2 = pf * pf;
    const double pf4 = pf2 * pf2;
    const double l3 = l * l * l;
    const double l4 = l3 * l;
    const double s3 = s * s * s;

    const double first_four = 1.0 + pf + pf2 + pf2 * pf;
    const double fifth = pf4 - l4;
    const double sixth = 4.0 * s * s * l3 + (pf4 - l4 - 4.0 * s * l3) * pf;
    const double seventh = 16.0 * s3 * l3 + (4.0 * s3 * l + s3 * s) * pf2;
    return a.p_s * (first_four + fifth + sixth + seventh);
}

double
packet_delivery_no_rts(LinkRatio p, int lrl)
{
    const double p2 = p.value() * p.value();
    return 1.0 - std::pow(1.0 - p2, lrl);
}

namespace {

struct TreeWalk
{
    AttemptProbabilities probs;
    RetryLimits limits;
    RetryTreeOutcome out;

    // Counters are checked after every failure; a limit reached is a leaf.
    void visit(int short_count, int long_count, double path_prob)
    {
        if (short_count >= limits.srl || long_count >= limits.lrl)
        {
            out.dropped += path_prob;
            ++out.leaves;
            return;
        }
        out.delivered += path_prob * probs.p_s;
        ++out.leaves;
        if (probs.p_sf > 0.0)
        {
            visit(short_count + 1, long_count, path_prob * probs.p_sf);
        }
        if (probs.p_lf > 0.0)
        {
            visit(limits.rts_cts ? short_count + 1 : short_count, long_count + 1,
                  path_prob * probs.p_lf);
        }
    }
};

} // namespace

RetryTreeOutcome
enumerate_retry_tree(LinkRatio p, const RetryLimits& limits)
{
    limits.validate();
    if (limits.srl > kMaxEnumeratedLimit || limits.lrl > kMaxEnumeratedLimit)
    {
        throw std::invalid_argument("retry limits exceed the enumeration bound of 16");
    }

    AttemptProbabilities probs = attempt_probs(p, limits.rts_cts);
    RetryLimits effective = limits;
    if (limits.rts_cts && !limits.long_packet)
    {
        // Short packet: DATA/ACK losses count against SRL only.
        probs.p_sf = probs.p_f;
        probs.p_lf = 0.0;
    }
    if (!limits.rts_cts)
    {
        // Basic access: the short counter never advances.
        effective.srl = kMaxEnumeratedLimit + 1;
    }
    TreeWalk walk{probs, effective, {}};
    walk.visit(0, 0, 1.0);
    return walk.out;
}

double
retry_process_oracle(LinkRatio p, const RetryLimits& limits)
{
    return enumerate_retry_tree(p, limits).delivered;
}

double
packet_delivery(LinkRatio p, const RetryLimits& limits)
{
    return retry_process_oracle(p, limits);
}

double
expected_backoff_slots(LinkRatio p, const BackoffParams& bp)
{
    bp.validate();
    const auto cws = bp.ladder();
    const double p2 = p.value() * p.value();
    const double q = 1.0 - p2;

    double weighted = 0.0;
    double reach = 0.0;
    double qk = 1.0;
    for (std::size_t k = 0; k + 1 < cws.size(); ++k)
    {
        weighted += cws[k] * qk;
        reach += qk;
        qk *= q;
    }
    return p2 / 2.0 * weighted + bp.cw_max_slots / 2.0 * (1.0 - p2 * reach);
}

double
backoff_stationary_mean_slots(LinkRatio p, const BackoffParams& bp)
{
    bp.validate();
    const auto cws = bp.ladder();
    const std::size_t n = cws.size();
    const double p2 = p.value() * p.value();
    const double q = 1.0 - p2;

    // Balance equations pi = pi * P with the last one replaced by sum(pi) = 1,
    // solved by Gaussian elimination with partial pivoting.
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t to = 0; to < n; ++to)
    {
        for (std::size_t from = 0; from < n; ++from)
        {
            double prob = 0.0;
            if (to == 0)
            {
                prob += p2;
            }
            if (to == std::min(from + 1, n - 1))
            {
                prob += q;
            }
            a[to][from] = prob - (to == from ? 1.0 : 0.0);
        }
    }
    for (std::size_t j = 0; j < n; ++j)
    {
        a[n - 1][j] = 1.0;
    }
    a[n - 1][n] = 1.0;

    for (std::size_t col = 0; col < n; ++col)
    {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
        {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
            {
                pivot = r;
            }
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < n; ++r)
        {
            if (r == col || a[r][col] == 0.0)
            {
                continue;
            }
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= n; ++c)
            {
                a[r][c] -= f * a[col][c];
            }
        }
    }

    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        // uniform integer backoff in [0, CW] has mean CW / 2
        mean += a[k][n] / a[k][k] * cws[k] / 2.0;
    }
    return mean;
}

PacketsPerRouteError
expected_packets_per_route_error(LinkRatio p, const RetryLimits& limits)
{
    if (!(p.value() > 0.0))
    {
        throw std::domain_error("expected_packets_per_route_error: p must be > 0");
    }
    const double failure = 1.0 - retry_process_oracle(p, limits);
    if (failure <= 0.0)
    {
        return PacketsPerRouteError::Never();
    }
    return {false, 1.0 / failure};
}

} // namespace fademac
