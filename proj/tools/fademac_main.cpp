#include "fademac/cli.hpp"
#include "fademac/config.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace fademac;

namespace {

struct GlobalOptions
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> replications;
    std::optional<unsigned> threads;
    bool trace = false;
    std::vector<std::string> settings;
};

Config
resolve(const GlobalOptions& g)
{
    Config c = g.config_path.empty() ? Config{} : load_config(g.config_path);
    for (const auto& s : g.settings)
    {
        apply_setting(c, s);
    }
    if (g.seed)
    {
        c.run.seed = *g.seed;
    }
    if (g.out)
    {
        c.run.out = *g.out;
    }
    if (g.replications)
    {
        c.run.replications = *g.replications;
    }
    if (g.threads)
    {
        c.run.threads = *g.threads;
    }
    if (g.trace)
    {
        c.run.trace = true;
    }
    c.validate();
    return c;
}

int
report(const RunManifest& m, const std::string& out_dir)
{
    for (const auto& o : m.outputs)
    {
        std::cout << "wrote " << out_dir << "/" << o.file << "\n";
    }
    for (const auto& c : m.checks)
    {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty())
        {
            std::cout << ": " << c.detail;
        }
        std::cout << "\n";
    }
    std::cout << "manifest digest " << m.digest() << "\n";
    return m.all_checks_passed() ? 0 : 1;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Slow-fading 802.11 MAC models and DCF simulator"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    app.allow_extras();
    app.set_version_flag("--version", std::string(FADEMAC_VERSION));

    GlobalOptions g;
    app.add_option("--config", g.config_path, "Sectioned key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Base seed (run.seed)");
    app.add_option("--out", g.out, "Output directory (run.out)");
    app.add_option("--replications", g.replications, "Replications per point (run.replications)");
    app.add_option("--threads", g.threads, "Worker threads, 0 = all cores (run.threads)");
    app.add_flag("--trace", g.trace, "Also write the event trace of one representative run (run.trace)");
    app.add_option("--set", g.settings, "Override a config value: section.key=value")->take_all();

    std::string selected;
    for (const auto& e : experiment_registry())
    {
        app.add_subcommand(e.name, e.description)->callback([&selected, name = e.name] { selected = name; });
    }

    auto* show = app.add_subcommand("show-config", "Print the fully resolved configuration");
    auto* list = app.add_subcommand("list", "List available experiments");

    std::string manifest_path;
    auto* rerun = app.add_subcommand("rerun", "Re-execute an experiment from its manifest and compare digests");
    rerun->add_option("--manifest", manifest_path, "Manifest written by an earlier run")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try
    {
        const auto extras = app.remaining(true);
        if (app.get_subcommands().empty())
        {
            if (!extras.empty() && extras.front().rfind("-", 0) != 0)
            {
                throw UnknownExperiment(extras.front());
            }
            std::cerr << app.help();
            return 2;
        }
        if (!extras.empty())
        {
            std::string msg = "unrecognised arguments:";
            for (const auto& x : extras)
            {
                msg += " " + x;
            }
            throw std::invalid_argument(msg);
        }
        if (list->parsed())
        {
            for (const auto& e : experiment_registry())
            {
                std::cout << e.name << "\t" << e.description << "\n";
            }
            return 0;
        }
        if (rerun->parsed())
        {
            const std::string out = g.out.value_or("rerun");
            const auto r = rerun_from_manifest(manifest_path, out);
            for (const auto& f : r.mismatched)
            {
                std::cout << "DIFFERS " << f << "\n";
            }
            std::cout << (r.identical() ? "identical outputs" : "outputs differ") << "\n";
            return r.identical() ? 0 : 1;
        }
        const Config config = resolve(g);
        if (show->parsed())
        {
            std::cout << to_config_text(config);
            return 0;
        }
        const auto m = run_experiment(selected, config, config.run.out);
        return report(m, config.run.out);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
