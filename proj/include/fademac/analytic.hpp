#pragma once

#include "fademac/propagation.hpp"

#include <vector>

namespace fademac {

/// 802.11 retry limits. With RTS/CTS, failures of the RTS/CTS phase count
/// against the short limit only; DATA/ACK failures of a long packet count
/// against both limits. Without RTS/CTS every failure counts against lrl.
struct RetryLimits
{
    int srl = 7;
    int lrl = 4;
    bool rts_cts = true;
    bool long_packet = true;

    void validate() const;

    bool operator==(const RetryLimits&) const = default;
};

struct AttemptProbabilities
{
    double p_s = 0.0;  ///< whole exchange succeeds
    double p_f = 0.0;  ///< 1 - p_s
    double p_sf = 0.0; ///< RTS or CTS lost
    double p_lf = 0.0; ///< RTS/CTS fine but DATA or ACK lost
};

struct BackoffParams
{
    int cw_min_slots = 31;
    int cw_max_slots = 1023;

    void validate() const;

    /// CW values from cw_min doubling up to and including cw_max.
    std::vector<int> ladder() const;

    bool operator==(const BackoffParams&) const = default;
};

AttemptProbabilities attempt_probs(LinkRatio p, bool rts_cts);

/// 1 - (1 - p^4)^srl: every failure counts against the short limit.
double packet_delivery_short_rtscts(LinkRatio p, int srl);

/// Closed form for a long packet under SRL 7 / LRL 4. Only defined for
/// (7, 4); throws std::invalid_argument otherwise. It diverges from
/// retry_process_oracle (the seven-attempt term is missing
/// 6 p_sf^4 p_lf^2); use packet_delivery() for anything downstream.
double packet_delivery_long_rtscts(LinkRatio p, const RetryLimits& limits);

/// 1 - (1 - p^2)^lrl.
double packet_delivery_no_rts(LinkRatio p, int lrl);

/// Result of walking the whole retry tree.
struct RetryTreeOutcome
{
    double delivered = 0.0;
    double dropped = 0.0;
    std::size_t leaves = 0;
};

inline constexpr int kMaxEnumeratedLimit = 16;

/// Exhaustive enumeration of attempt-outcome sequences under the counter
/// rules of RetryLimits. Limits above kMaxEnumeratedLimit are rejected.
RetryTreeOutcome enumerate_retry_tree(LinkRatio p, const RetryLimits& limits);

/// Probability that a packet is delivered before either retry counter
/// reaches its limit, by exhaustive enumeration.
double retry_process_oracle(LinkRatio p, const RetryLimits& limits);

/// Packet delivery used by everything downstream; alias of the oracle.
double packet_delivery(LinkRatio p, const RetryLimits& limits);

/// Mean backoff (slots) over the CW ladder with per-backoff success p^2.
double expected_backoff_slots(LinkRatio p, const BackoffParams& bp);

/// Same quantity from the stationary distribution of the CW Markov chain
/// (reset on success, double on failure, saturate at the cap), solved as a
/// dense linear system. Independent route for expected_backoff_slots.
double backoff_stationary_mean_slots(LinkRatio p, const BackoffParams& bp);

/// Expected number of packets between MAC-level delivery failures.
struct PacketsPerRouteError
{
    bool never = false;
    double packets = 0.0;

    static PacketsPerRouteError Never() { return {true, 0.0}; }
};

/// 1 / (1 - packet_delivery). Requires p > 0.
PacketsPerRouteError expected_packets_per_route_error(LinkRatio p, const RetryLimits& limits);

} // namespace fademac
