#pragma once

#include "fademac/config.hpp"
#include "fademac/manifest.hpp"
#include "fademac/table.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fademac {

/// Everything an experiment produces before it is written to disk.
struct ExperimentOutput
{
    std::vector<std::pair<std::string, Table>> tables; ///< file name, content
    std::vector<CheckRecord> checks;
    /// Representative run whose event trace is written when tracing is on.
    struct TraceRun
    {
        Scenario scenario;
        DcfConfig mac;
        std::uint64_t seed = 0;
    };
    std::optional<TraceRun> trace_run;
};

struct ExperimentInfo
{
    std::string name;
    std::string description;
    std::function<ExperimentOutput(const Config&)> run;
};

const std::vector<ExperimentInfo>& experiment_registry();

class UnknownExperiment : public std::invalid_argument
{
  public:
    explicit UnknownExperiment(const std::string& name);
};

/// Resolves hyphen/underscore spellings and aliases to a registry entry.
const ExperimentInfo& find_experiment(const std::string& name);

/// Runs the experiment, writes its CSVs (and trace.csv if config.run.trace)
/// plus `<name>.manifest.json` into out_dir, and returns the manifest.
RunManifest run_experiment(const std::string& name, const Config& config, const std::filesystem::path& out_dir);

struct RerunReport
{
    RunManifest original;
    RunManifest rerun;
    /// Files whose digest differs or that are missing from either side.
    std::vector<std::string> mismatched;

    bool identical() const { return mismatched.empty(); }
};

/// Re-executes an experiment from the configuration recorded in a manifest.
RerunReport rerun_from_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

} // namespace fademac
