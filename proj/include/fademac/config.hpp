#pragma once

#include "fademac/geometry.hpp"
#include "fademac/macsim.hpp"
#include "fademac/propagation.hpp"
#include "fademac/scenarios.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fademac {

/// Parse or validation failure. `line()` is 0 when the error is not tied to a
/// line of the input.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(const std::string& what, int line = 0);
    int line() const { return m_line; }

  private:
    int m_line;
};

struct RunSettings
{
    std::uint64_t seed = 1;
    int replications = 10;
    unsigned threads = 0;
    std::string out = "results";
    /// Write the event trace of the first simulated run of an experiment.
    bool trace = false;

    bool operator==(const RunSettings&) const = default;
};

/// Per-experiment grids and knobs.
struct ExperimentSettings
{
    double trace_distance_m = 220.0;
    double trace_duration_s = 10.0;
    double trace_interval_s = 0.01;

    std::vector<double> delivery_distances = linear_grid(10.0, 400.0, 40);
    int delivery_samples = 100000;

    int p_grid_points = 101;

    double sim_duration_s = 60.0;
    int payload_bytes = 500;
    std::vector<double> delay_distances{50.0, 100.0, 150.0, 200.0, 220.0, 240.0};
    std::vector<double> capacity_distances = linear_grid(50.0, 240.0, 20);

    UnfairnessGeometry unfairness;
    HopOrderSpec hop_order;

    std::vector<int> flood_node_counts{25, 50, 100, 150, 200};
    std::vector<double> flood_drop_probs{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    double flood_area_m = 1000.0;
    double flood_duration_s = 2.0;
    int flood_payload_bytes = 64;
    double flood_jitter_s = 0.010;
    bool flood_fading = false;

    std::vector<double> geometry_distances = linear_grid(10.0, 250.0, 25);

    bool operator==(const ExperimentSettings&) const = default;
};

struct Config
{
    PropagationParams propagation;
    DcfConfig mac;
    CaptureParams geometry;
    RunSettings run;
    ExperimentSettings experiment;

    /// Throws ConfigError naming the violated invariant.
    void validate() const;

    SimSetup sim_setup() const;
    ReplicationPlan plan() const;
    FloodingSpec flooding() const;

    bool operator==(const Config&) const = default;
};

/// Sectioned `key = value` text. Sections: [propagation], [mac], [geometry],
/// [run], [experiment]. `#` and `;` start comments. Lists are comma
/// separated. Unknown sections or keys are errors. The result is validated.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// Applies one `section.key=value` assignment without validating.
void apply_setting(Config& config, std::string_view assignment);

/// Canonical text listing every key; parse_config(to_config_text(c)) == c.
std::string to_config_text(const Config& config);

} // namespace fademac
