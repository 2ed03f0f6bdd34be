#include "fademac/config.hpp"

#include "fademac/table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace fademac {

ConfigError::ConfigError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
    , m_line(line)
{
}

namespace {

std::string_view
trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double
parse_double(std::string_view s)
{
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    {
        throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

template <typename Int>
Int
parse_int(std::string_view s)
{
    s = trim(s);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    {
        throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

bool
parse_bool(std::string_view s)
{
    s = trim(s);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
    {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off")
    {
        return false;
    }
    throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

template <typename T, typename F>
std::vector<T>
parse_list(std::string_view s, F item)
{
    std::vector<T> out;
    s = trim(s);
    if (s.empty())
    {
        return out;
    }
    while (true)
    {
        const auto comma = s.find(',');
        out.push_back(item(s.substr(0, comma)));
        if (comma == std::string_view::npos)
        {
            break;
        }
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::string
show(double v)
{
    return format_double(v);
}

std::string
show(bool v)
{
    return v ? "true" : "false";
}

template <typename Int>
    requires std::is_integral_v<Int>
std::string
show(Int v)
{
    return std::to_string(v);
}

template <typename T>
std::string
show_list(const std::vector<T>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        out += (i ? ", " : "") + show(xs[i]);
    }
    return out;
}

struct Field
{
    std::string section;
    std::string key;
    std::function<void(Config&, std::string_view)> set;
    std::function<std::string(const Config&)> get;
};

template <typename Member>
Field
number_field(std::string section, std::string key, Member member)
{
    return {std::move(section), std::move(key),
            [member](Config& c, std::string_view v) {
                auto& ref = member(c);
                using T = std::remove_reference_t<decltype(ref)>;
                if constexpr (std::is_same_v<T, double>)
                {
                    ref = parse_double(v);
                }
                else if constexpr (std::is_same_v<T, bool>)
                {
                    ref = parse_bool(v);
                }
                else if constexpr (std::is_same_v<T, std::string>)
                {
                    ref = std::string(trim(v));
                }
                else if constexpr (std::is_same_v<T, std::vector<double>>)
                {
                    ref = parse_list<double>(v, parse_double);
                }
                else if constexpr (std::is_same_v<T, std::vector<int>>)
                {
                    ref = parse_list<int>(v, parse_int<int>);
                }
                else
                {
                    ref = parse_int<T>(v);
                }
            },
            [member](const Config& c) {
                auto& ref = member(const_cast<Config&>(c));
                using T = std::remove_reference_t<decltype(ref)>;
                if constexpr (std::is_same_v<T, std::string>)
                {
                    return ref;
                }
                else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>)
                {
                    return show_list(ref);
                }
                else
                {
                    return show(ref);
                }
            }};
}

#define FIELD(section, key, expr) number_field(section, key, [](Config& c) -> auto& { return expr; })

const std::vector<Field>&
fields()
{
    static const std::vector<Field> table = {
        FIELD("propagation", "beta", c.propagation.beta),
        FIELD("propagation", "sigma_db", c.propagation.sigma_db),
        FIELD("propagation", "d0_m", c.propagation.d0_m),
        FIELD("propagation", "p_th_dbm", c.propagation.p_th_dbm),
        FIELD("propagation", "ideal_range_m", c.propagation.ideal_range_m),

        FIELD("mac", "srl", c.mac.retry.srl),
        FIELD("mac", "lrl", c.mac.retry.lrl),
        FIELD("mac", "cw_min_slots", c.mac.backoff.cw_min_slots),
        FIELD("mac", "cw_max_slots", c.mac.backoff.cw_max_slots),
        FIELD("mac", "backoff_enabled", c.mac.backoff_enabled),
        FIELD("mac", "rts_cts", c.mac.rts_cts),
        FIELD("mac", "slot_us", c.mac.slot_us),
        FIELD("mac", "sifs_us", c.mac.sifs_us),
        FIELD("mac", "difs_us", c.mac.difs_us),
        FIELD("mac", "data_rate_bps", c.mac.data_rate_bps),
        FIELD("mac", "control_rate_bps", c.mac.control_rate_bps),
        FIELD("mac", "phy_header_bits", c.mac.phy_header_bits),
        FIELD("mac", "data_header_bits", c.mac.data_header_bits),
        FIELD("mac", "rts_bits", c.mac.rts_bits),
        FIELD("mac", "cts_bits", c.mac.cts_bits),
        FIELD("mac", "ack_bits", c.mac.ack_bits),
        FIELD("mac", "cs_range_factor", c.mac.cs_range_factor),
        FIELD("mac", "capture_threshold_db", c.mac.capture_threshold_db),
        FIELD("mac", "capture_enabled", c.mac.capture_enabled),
        FIELD("mac", "queue_capacity", c.mac.queue_capacity),
        FIELD("mac", "warmup_fraction", c.mac.warmup_fraction),

        FIELD("geometry", "capture_threshold", c.geometry.capture_threshold),
        FIELD("geometry", "path_loss_exponent", c.geometry.path_loss_exponent),
        FIELD("geometry", "tx_range_m", c.geometry.tx_range_m),
        FIELD("geometry", "cs_range_factor", c.geometry.cs_range_factor),

        FIELD("run", "seed", c.run.seed),
        FIELD("run", "replications", c.run.replications),
        FIELD("run", "threads", c.run.threads),
        FIELD("run", "out", c.run.out),
        FIELD("run", "trace", c.run.trace),

        FIELD("experiment", "trace_distance_m", c.experiment.trace_distance_m),
        FIELD("experiment", "trace_duration_s", c.experiment.trace_duration_s),
        FIELD("experiment", "trace_interval_s", c.experiment.trace_interval_s),
        FIELD("experiment", "delivery_distances", c.experiment.delivery_distances),
        FIELD("experiment", "delivery_samples", c.experiment.delivery_samples),
        FIELD("experiment", "p_grid_points", c.experiment.p_grid_points),
        FIELD("experiment", "sim_duration_s", c.experiment.sim_duration_s),
        FIELD("experiment", "payload_bytes", c.experiment.payload_bytes),
        FIELD("experiment", "delay_distances", c.experiment.delay_distances),
        FIELD("experiment", "capacity_distances", c.experiment.capacity_distances),
        FIELD("experiment", "unfair_fixed_m", c.experiment.unfairness.fixed_distance_m),
        FIELD("experiment", "unfair_distances", c.experiment.unfairness.varied_distances),
        FIELD("experiment", "unfair_separation_m", c.experiment.unfairness.source_separation_m),
        FIELD("experiment", "hop_strong_m", c.experiment.hop_order.strong_m),
        FIELD("experiment", "hop_weak_m", c.experiment.hop_order.weak_m),
        FIELD("experiment", "flood_node_counts", c.experiment.flood_node_counts),
        FIELD("experiment", "flood_drop_probs", c.experiment.flood_drop_probs),
        FIELD("experiment", "flood_area_m", c.experiment.flood_area_m),
        FIELD("experiment", "flood_duration_s", c.experiment.flood_duration_s),
        FIELD("experiment", "flood_payload_bytes", c.experiment.flood_payload_bytes),
        FIELD("experiment", "flood_jitter_s", c.experiment.flood_jitter_s),
        FIELD("experiment", "flood_fading", c.experiment.flood_fading),
        FIELD("experiment", "geometry_distances", c.experiment.geometry_distances),
    };
    return table;
}

#undef FIELD

const Field*
find_field(std::string_view section, std::string_view key)
{
    for (const auto& f : fields())
    {
        if (f.section == section && f.key == key)
        {
            return &f;
        }
    }
    return nullptr;
}

bool
known_section(std::string_view s)
{
    return std::any_of(fields().begin(), fields().end(), [s](const Field& f) { return f.section == s; });
}

void
assign(Config& c, std::string_view section, std::string_view key, std::string_view value, int line)
{
    const Field* f = find_field(section, key);
    if (f == nullptr)
    {
        throw ConfigError("unknown key '" + std::string(key) + "' in section [" + std::string(section) + "]", line);
    }
    try
    {
        f->set(c, value);
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(std::string(section) + "." + std::string(key) + ": " + e.what(), line);
    }
}

void
require(bool ok, const std::string& what)
{
    if (!ok)
    {
        throw ConfigError(what);
    }
}

template <typename T, typename Pred>
void
require_all(const std::vector<T>& xs, Pred pred, const std::string& what)
{
    require(!xs.empty() && std::all_of(xs.begin(), xs.end(), pred), what);
}

} // namespace

void
Config::validate() const
{
    try
    {
        propagation.validate();
        mac.validate();
        geometry.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
    const double d0 = propagation.d0_m;
    const auto distance_ok = [d0](double d) { return d >= d0; };
    const auto positive = [](double v) { return v > 0.0; };

    require(run.replications >= 1, "run: replications must be >= 1");
    require(!run.out.empty(), "run: out must not be empty");

    const auto& e = experiment;
    require(e.trace_distance_m >= d0, "experiment: trace_distance_m must be >= d0_m");
    require(e.trace_duration_s > 0.0 && e.trace_interval_s > 0.0,
            "experiment: trace_duration_s and trace_interval_s must be > 0");
    require_all(e.delivery_distances, distance_ok, "experiment: delivery_distances must be non-empty and >= d0_m");
    require(e.delivery_samples >= 1, "experiment: delivery_samples must be >= 1");
    require(e.p_grid_points >= 2, "experiment: p_grid_points must be >= 2");
    require(e.sim_duration_s > 0.0, "experiment: sim_duration_s must be > 0");
    require(e.payload_bytes >= 1, "experiment: payload_bytes must be >= 1");
    require_all(e.delay_distances, distance_ok, "experiment: delay_distances must be non-empty and >= d0_m");
    require_all(e.capacity_distances, distance_ok, "experiment: capacity_distances must be non-empty and >= d0_m");
    require(e.unfairness.fixed_distance_m >= d0, "experiment: unfair_fixed_m must be >= d0_m");
    require_all(e.unfairness.varied_distances, distance_ok,
                "experiment: unfair_distances must be non-empty and >= d0_m");
    require(e.unfairness.source_separation_m >= d0, "experiment: unfair_separation_m must be >= d0_m");
    require(e.hop_order.strong_m >= d0 && e.hop_order.weak_m >= d0,
            "experiment: hop_strong_m and hop_weak_m must be >= d0_m");
    require_all(e.flood_node_counts, [](int n) { return n >= 1; },
                "experiment: flood_node_counts must be non-empty and >= 1");
    require_all(e.flood_drop_probs, [](double p) { return p >= 0.0 && p <= 1.0; },
                "experiment: flood_drop_probs must be non-empty and inside [0, 1]");
    require(e.flood_area_m > 0.0 && e.flood_duration_s > 0.0 && e.flood_jitter_s >= 0.0,
            "experiment: flood_area_m and flood_duration_s must be > 0, flood_jitter_s >= 0");
    require(e.flood_payload_bytes >= 1, "experiment: flood_payload_bytes must be >= 1");
    require_all(e.geometry_distances, positive, "experiment: geometry_distances must be non-empty and > 0");
}

SimSetup
Config::sim_setup() const
{
    return {propagation, mac, experiment.sim_duration_s, experiment.payload_bytes};
}

ReplicationPlan
Config::plan() const
{
    return {run.seed, run.replications, run.threads};
}

FloodingSpec
Config::flooding() const
{
    FloodingSpec s;
    s.node_counts = experiment.flood_node_counts;
    s.drop_probs = experiment.flood_drop_probs;
    s.area_m = experiment.flood_area_m;
    s.duration_s = experiment.flood_duration_s;
    s.payload_bytes = experiment.flood_payload_bytes;
    s.jitter_s = experiment.flood_jitter_s;
    s.fading_channel = experiment.flood_fading;
    return s;
}

Config
parse_config(std::string_view text)
{
    Config c;
    std::string section;
    int line_no = 0;
    while (!text.empty())
    {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

        const auto comment = line.find_first_of("#;");
        line = trim(line.substr(0, comment));
        if (line.empty())
        {
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']')
            {
                throw ConfigError("unterminated section header", line_no);
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_section(section))
            {
                throw ConfigError("unknown section [" + section + "]", line_no);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError("expected 'key = value'", line_no);
        }
        if (section.empty())
        {
            throw ConfigError("key outside of any section", line_no);
        }
        assign(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
    }
    c.validate();
    return c;
}

Config
load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void
apply_setting(Config& config, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
    {
        throw ConfigError("expected section.key=value, got '" + std::string(assignment) + "'");
    }
    assign(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
           trim(assignment.substr(eq + 1)), 0);
}

std::string
to_config_text(const Config& config)
{
    std::string out;
    std::string section;
    for (const auto& f : fields())
    {
        if (f.section != section)
        {
            out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

} // namespace fademac
