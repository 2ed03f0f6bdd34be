#pragma once

#include "fademac/analytic.hpp"
#include "fademac/geometry.hpp"
#include "fademac/macsim.hpp"
#include "fademac/propagation.hpp"
#include "fademac/table.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fademac {

/// Mean of replicated values with a 95% normal-approximation half-width.
struct Summary
{
    double mean = 0.0;
    std::optional<double> half_width; ///< absent with fewer than two replications
    std::vector<double> raw;

    double lower() const { return mean - half_width.value_or(0.0); }
    double upper() const { return mean + half_width.value_or(0.0); }
};

Summary summarize(std::vector<double> raw);

struct ExperimentResult
{
    struct Point
    {
        std::vector<std::pair<std::string, double>> keys;
        std::string label;
        std::vector<std::pair<std::string, Summary>> metrics;

        const Summary& metric(const std::string& name) const;
        double key(const std::string& name) const;
    };

    std::string name;
    std::vector<Point> points;
    /// Free-form provenance, e.g. the node placement actually simulated.
    std::vector<std::pair<std::string, std::string>> metadata;

    const Point& at_label(const std::string& label) const;

    /// One row per point: key columns, optional label, then `<metric>_mean`
    /// and `<metric>_ci95` for each metric.
    Table to_table() const;
    Table metadata_table() const;
};

struct ReplicationPlan
{
    std::uint64_t base_seed = 1;
    int replications = 10;
    unsigned threads = 0; ///< 0 = hardware concurrency
};

/// Runs fn(0..count-1) on a worker pool; results are returned in index order
/// so the outcome does not depend on scheduling.
std::vector<double> parallel_map(std::size_t count, unsigned threads,
                                 const std::function<double(std::size_t)>& fn);

/// Everything a MAC experiment needs besides its own geometry.
struct SimSetup
{
    PropagationParams propagation;
    DcfConfig mac;
    double duration_s = 60.0;
    int payload_bytes = 500;
};

// ---- analytic / Monte Carlo link experiments ------------------------------

Table exp_power_trace(const PropagationParams& params, double d_m, double duration_s, double interval_s,
                      std::uint64_t seed);

Table exp_delivery_vs_distance(const PropagationParams& params, std::span<const double> grid, int n_samples,
                               std::uint64_t seed);

Table exp_packet_delivery_curves(std::span<const double> p_grid, const RetryLimits& limits);

Table exp_backoff_curve(std::span<const double> p_grid, const BackoffParams& backoff);

/// Evenly spaced grid of `points` values on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int points);

// ---- simulator experiments -------------------------------------------------

ExperimentResult exp_one_hop_delay(const SimSetup& setup, std::span<const double> distances,
                                   const ReplicationPlan& plan);

/// Saturated single-hop throughput with and without RTS/CTS at every distance.
ExperimentResult exp_capacity(const SimSetup& setup, std::span<const double> distances,
                              const ReplicationPlan& plan);

struct UnfairnessGeometry
{
    double fixed_distance_m = 150.0;
    std::vector<double> varied_distances{150.0, 180.0, 200.0, 220.0};
    double source_separation_m = 50.0;

    bool operator==(const UnfairnessGeometry&) const = default;
};

/// Two saturated single-hop connections sharing one contention point.
/// Node placement: S1 (0,0) -> R1 (0, fixed); S2 (sep, 0) -> R2 (sep, -varied).
Scenario unfairness_scenario(const PropagationParams& params, const UnfairnessGeometry& g, double varied_m,
                             int payload_bytes, double duration_s, bool include_conn1, bool include_conn2);

/// Normalised share = contention throughput / solo throughput of the same
/// connection, clamped to 1 (clamps are counted in the metadata).
ExperimentResult exp_unfairness(const SimSetup& setup, const UnfairnessGeometry& geometry,
                                const ReplicationPlan& plan);

struct HopOrderSpec
{
    double strong_m = 100.0;
    double weak_m = 220.0;

    bool operator==(const HopOrderSpec&) const = default;
};

/// Two-hop chain A -> B -> C with a saturated source at A; B forwards.
ExperimentResult exp_hop_order(const SimSetup& setup, const HopOrderSpec& spec, const ReplicationPlan& plan);

struct FloodingSpec
{
    std::vector<int> node_counts{25, 50, 100, 150, 200};
    std::vector<double> drop_probs{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    double area_m = 1000.0;
    double duration_s = 2.0;
    int payload_bytes = 64;
    double jitter_s = 0.010;
    /// Use the log-normal channel instead of Bernoulli drops (drop_probs ignored).
    bool fading_channel = false;
};

/// Uniform random placement in an area x area square, redrawing any node that
/// lands within d0 of another.
std::vector<NodeSpec> random_deployment(int count, double area_m, double min_separation_m, std::uint64_t seed);

ExperimentResult exp_flooding(const PropagationParams& params, const DcfConfig& mac, const FloodingSpec& spec,
                              const ReplicationPlan& plan);

Table exp_capture_geometry(const CaptureParams& params, std::span<const double> d_sr_grid);

} // namespace fademac
