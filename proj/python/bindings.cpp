#include "fademac/analytic.hpp"
#include "fademac/cli.hpp"
#include "fademac/config.hpp"
#include "fademac/geometry.hpp"
#include "fademac/macsim.hpp"
#include "fademac/propagation.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace fademac;

namespace {

py::dict
manifest_dict(const RunManifest& m)
{
    py::dict d;
    d["tool_version"] = m.tool_version;
    d["experiment"] = m.experiment;
    d["seed"] = m.seed;
    d["replications"] = m.replications;
    d["digest"] = m.digest();
    py::dict outputs;
    for (const auto& o : m.outputs)
    {
        outputs[py::str(o.file)] = o.sha256;
    }
    d["outputs"] = outputs;
    py::list checks;
    for (const auto& c : m.checks)
    {
        checks.append(py::make_tuple(c.name, c.passed, c.detail));
    }
    d["checks"] = checks;
    return d;
}

Config
make_config(const std::string& text, const std::vector<std::string>& overrides)
{
    Config c = parse_config(text);
    for (const auto& s : overrides)
    {
        apply_setting(c, s);
    }
    c.validate();
    return c;
}

} // namespace

PYBIND11_MODULE(_fademac, m)
{
    m.doc() = "Fading-aware 802.11 MAC analysis and simulation";
    m.attr("__version__") = FADEMAC_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<UnknownExperiment>(m, "UnknownExperiment", PyExc_KeyError);

    py::class_<PropagationParams>(m, "PropagationParams")
        .def(py::init<>())
        .def_readwrite("beta", &PropagationParams::beta)
        .def_readwrite("sigma_db", &PropagationParams::sigma_db)
        .def_readwrite("d0_m", &PropagationParams::d0_m)
        .def_readwrite("p_th_dbm", &PropagationParams::p_th_dbm)
        .def_readwrite("ideal_range_m", &PropagationParams::ideal_range_m)
        .def("p_d0_dbm", &PropagationParams::p_d0_dbm)
        .def("validate", &PropagationParams::validate);

    m.def("mean_received_power_dbm", &mean_received_power_dbm, py::arg("params"), py::arg("d_m"));
    m.def(
        "link_delivery_ratio",
        [](const PropagationParams& p, double d) { return link_delivery_ratio(p, d).value(); }, py::arg("params"),
        py::arg("d_m"));
    m.def(
        "distance_for_delivery_ratio",
        [](const PropagationParams& p, double ratio) { return distance_for_delivery_ratio(p, LinkRatio(ratio)); },
        py::arg("params"), py::arg("p"));

    py::class_<RetryLimits>(m, "RetryLimits")
        .def(py::init<>())
        .def_readwrite("srl", &RetryLimits::srl)
        .def_readwrite("lrl", &RetryLimits::lrl)
        .def_readwrite("rts_cts", &RetryLimits::rts_cts)
        .def_readwrite("long_packet", &RetryLimits::long_packet);

    py::class_<BackoffParams>(m, "BackoffParams")
        .def(py::init<>())
        .def_readwrite("cw_min_slots", &BackoffParams::cw_min_slots)
        .def_readwrite("cw_max_slots", &BackoffParams::cw_max_slots)
        .def("ladder", &BackoffParams::ladder);

    m.def(
        "packet_delivery", [](double p, const RetryLimits& l) { return packet_delivery(LinkRatio(p), l); },
        py::arg("p"), py::arg("limits") = RetryLimits{});
    m.def(
        "packet_delivery_short_rtscts", [](double p, int srl) { return packet_delivery_short_rtscts(LinkRatio(p), srl); },
        py::arg("p"), py::arg("srl") = 7);
    m.def(
        "packet_delivery_no_rts", [](double p, int lrl) { return packet_delivery_no_rts(LinkRatio(p), lrl); },
        py::arg("p"), py::arg("lrl") = 4);
    m.def(
        "packet_delivery_long_rtscts",
        [](double p, const RetryLimits& l) { return packet_delivery_long_rtscts(LinkRatio(p), l); }, py::arg("p"),
        py::arg("limits") = RetryLimits{});
    m.def(
        "expected_backoff_slots",
        [](double p, const BackoffParams& b) { return expected_backoff_slots(LinkRatio(p), b); }, py::arg("p"),
        py::arg("backoff") = BackoffParams{});
    m.def(
        "backoff_stationary_mean_slots",
        [](double p, const BackoffParams& b) { return backoff_stationary_mean_slots(LinkRatio(p), b); },
        py::arg("p"), py::arg("backoff") = BackoffParams{});

    py::class_<CaptureParams>(m, "CaptureParams")
        .def(py::init<>())
        .def_readwrite("capture_threshold", &CaptureParams::capture_threshold)
        .def_readwrite("path_loss_exponent", &CaptureParams::path_loss_exponent)
        .def_readwrite("tx_range_m", &CaptureParams::tx_range_m)
        .def_readwrite("cs_range_factor", &CaptureParams::cs_range_factor);
    py::enum_<CsmaCase>(m, "CsmaCase").value("AVERAGE", CsmaCase::Average).value("WORST", CsmaCase::Worst);
    m.def("capture_line", &capture_line, py::arg("params"), py::arg("d_sr_m"));
    m.def("ca_blocks", &ca_blocks, py::arg("params"), py::arg("d_ir_m"));
    m.def("csma_blocks", &csma_blocks, py::arg("params"), py::arg("d_sr_m"), py::arg("d_ir_m"), py::arg("case"));

    m.def(
        "saturation_capacity",
        [](double d, bool rts, int payload, double duration, std::uint64_t seed) {
            DcfConfig c;
            c.rts_cts = rts;
            return saturation_capacity(d, c, PropagationParams{}, payload, duration, seed);
        },
        py::arg("distance_m"), py::arg("rts_cts") = false, py::arg("payload_bytes") = 500,
        py::arg("duration_s") = 60.0, py::arg("seed") = 1, py::call_guard<py::gil_scoped_release>());

    m.def("experiments", [] {
        std::vector<std::string> names;
        for (const auto& e : experiment_registry())
        {
            names.push_back(e.name);
        }
        return names;
    });
    m.def("default_config_text", [] { return to_config_text(Config{}); });
    m.def(
        "config_text", [](const std::string& text, const std::vector<std::string>& overrides) {
            return to_config_text(make_config(text, overrides));
        },
        py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});
    m.def(
        "run_experiment",
        [](const std::string& name, const std::filesystem::path& out_dir, const std::string& config_text,
           const std::vector<std::string>& overrides) {
            const Config c = make_config(config_text, overrides);
            RunManifest man;
            {
                py::gil_scoped_release release;
                man = run_experiment(name, c, out_dir);
            }
            return manifest_dict(man);
        },
        py::arg("name"), py::arg("out_dir"), py::arg("config_text") = "",
        py::arg("overrides") = std::vector<std::string>{});
    m.def(
        "rerun",
        [](const std::filesystem::path& manifest, const std::filesystem::path& out_dir) {
            RerunReport r;
            {
                py::gil_scoped_release release;
                r = rerun_from_manifest(manifest, out_dir);
            }
            return py::make_tuple(r.identical(), r.mismatched);
        },
        py::arg("manifest"), py::arg("out_dir"));
}
