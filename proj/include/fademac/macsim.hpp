#pragma once

#include "fademac/analytic.hpp"
#include "fademac/propagation.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fademac {

/// Simulation time in integer nanoseconds.
using SimTime = std::int64_t;

constexpr SimTime
from_us(double us)
{
    return static_cast<SimTime>(us * 1000.0 + (us >= 0 ? 0.5 : -0.5));
}

constexpr SimTime
from_seconds(double s)
{
    return static_cast<SimTime>(s * 1e9 + (s >= 0 ? 0.5 : -0.5));
}

constexpr double
to_seconds(SimTime t)
{
    return static_cast<double>(t) * 1e-9;
}

struct DcfConfig
{
    RetryLimits retry;
    BackoffParams backoff;
    bool backoff_enabled = true;
    bool rts_cts = false;

    double slot_us = 20.0;
    double sifs_us = 10.0;
    double difs_us = 50.0;
    std::int64_t data_rate_bps = 2'000'000;
    std::int64_t control_rate_bps = 1'000'000;

    int phy_header_bits = 192; ///< preamble + PLCP header, sent at the control rate
    int data_header_bits = 224;
    int rts_bits = 160;
    int cts_bits = 112;
    int ack_bits = 112;

    /// Carrier-sense radius as a multiple of the ideal range, under mean path loss.
    double cs_range_factor = 2.2;
    /// Minimum signal-to-interference ratio for a frame to survive overlap.
    double capture_threshold_db = 10.0;
    /// When false, any overlapping transmission destroys a reception.
    bool capture_enabled = true;
    int queue_capacity = 50;
    double warmup_fraction = 0.1;

    void validate() const;

    bool operator==(const DcfConfig&) const = default;
};

struct Position
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

double distance(Position a, Position b);

struct NodeSpec
{
    int id = 0;
    Position pos;
};

/// Unicast traffic forwarded hop by hop along a static path of node ids.
struct FlowSpec
{
    std::vector<int> path;
    int payload_bytes = 500;
    /// Packets per second; 0 keeps exactly one packet of this flow at the
    /// source MAC at all times (saturated source).
    double rate_pps = 0.0;
    double start_s = 0.0;
};

/// One network-wide blind flood: each node rebroadcasts the first copy it hears.
struct FloodSpec
{
    int origin = 0;
    double start_s = 0.001;
    int payload_bytes = 64;
    double jitter_s = 0.010;
};

struct ChannelSpec
{
    PropagationParams propagation;
    /// When set, reception uses the mean (unfaded) power and each
    /// (transmission, receiver) pair is additionally dropped with this probability.
    std::optional<double> bernoulli_drop;

    bool operator==(const ChannelSpec&) const = default;
};

struct Scenario
{
    std::vector<NodeSpec> nodes;
    std::vector<FlowSpec> flows;
    std::optional<FloodSpec> flood;
    ChannelSpec channel;
    double duration_s = 10.0;

    /// Throws std::invalid_argument on duplicate ids, unknown flow endpoints,
    /// co-located nodes (closer than d0) or a non-positive duration.
    void validate() const;
};

struct NodeMacStats
{
    std::uint64_t enqueued = 0;
    std::uint64_t acked = 0;
    std::uint64_t retry_drops = 0;
    std::uint64_t queue_drops = 0;
    std::uint64_t broadcasts_sent = 0;
    std::uint64_t pending = 0; ///< still queued (including the head in service) at the end
    std::uint64_t transmissions = 0;
    /// attempts_histogram[k] = acked packets that needed k+1 attempts
    std::vector<std::uint64_t> attempts_histogram;
    std::uint64_t backoff_draws = 0;
    double backoff_slots_total = 0.0;
    /// MAC enqueue to ACK, seconds, for acked packets
    std::vector<double> delays_s;
};

struct FlowStats
{
    std::uint64_t offered = 0;
    std::uint64_t received = 0;
    std::uint64_t received_after_warmup = 0;
    double throughput_bps = 0.0; ///< payload bits received after warm-up / measured time
    std::vector<double> delays_s; ///< source enqueue to destination reception
};

struct RunMetrics
{
    std::vector<int> node_ids;
    std::vector<NodeMacStats> nodes;
    std::vector<FlowStats> flows;
    std::vector<bool> flood_reached;
    double coverage = 0.0;
    double duration_s = 0.0;
    double warmup_s = 0.0;
    double channel_busy_s = 0.0;

    double mean_backoff_slots(std::size_t node_index) const;
};

/// Discrete-event 802.11 DCF run. Deterministic for fixed inputs. If `trace`
/// is non-null, a CSV event trace is written to it.
RunMetrics run(const Scenario& scenario, const DcfConfig& config, std::uint64_t seed,
               std::ostream* trace = nullptr);

struct DelayStats
{
    std::size_t count = 0;
    double mean_s = 0.0;
    double p50_s = 0.0;
    double p90_s = 0.0;
    double p99_s = 0.0;
};

/// Enqueue-to-ACK delay statistics of one node's MAC; nullopt when the node
/// delivered nothing.
std::optional<DelayStats> one_hop_delay(const RunMetrics& metrics, std::size_t node_index = 0);

/// Single saturated sender at `distance_m`; payload throughput after warm-up.
double saturation_capacity(double distance_m, const DcfConfig& config,
                           const PropagationParams& propagation, int payload_bytes,
                           double duration_s, std::uint64_t seed);

/// Airtimes implied by a configuration.
struct FrameTimes
{
    SimTime rts;
    SimTime cts;
    SimTime ack;
    SimTime slot;
    SimTime sifs;
    SimTime difs;

    SimTime data(int payload_bytes) const;

    std::int64_t data_rate_bps;
    std::int64_t control_rate_bps;
    int phy_header_bits;
    int data_header_bits;
};

FrameTimes frame_times(const DcfConfig& config);

/// Carrier-sense threshold implied by cs_range_factor and the channel.
double carrier_sense_threshold_dbm(const DcfConfig& config, const PropagationParams& propagation);

} // namespace fademac
