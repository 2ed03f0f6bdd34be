#include "fademac/macsim.hpp"

#include "fademac/table.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace fademac {

void
DcfConfig::validate() const
{
    retry.validate();
    backoff.validate();
    if (!(slot_us > 0.0 && sifs_us > 0.0 && difs_us > 0.0))
    {
        throw std::invalid_argument("mac: slot, SIFS and DIFS must be > 0");
    }
    if (!(sifs_us < difs_us))
    {
        throw std::invalid_argument("mac: SIFS must be shorter than DIFS");
    }
    if (data_rate_bps <= 0 || control_rate_bps <= 0)
    {
        throw std::invalid_argument("mac: bit rates must be > 0");
    }
    if (phy_header_bits < 0 || data_header_bits < 0 || rts_bits <= 0 || cts_bits <= 0 || ack_bits <= 0)
    {
        throw std::invalid_argument("mac: frame sizes must be positive");
    }
    if (!(cs_range_factor >= 1.0))
    {
        throw std::invalid_argument(
            "mac: cs_range_factor must be >= 1 (carrier-sense threshold at or below sensitivity)");
    }
    if (!(capture_threshold_db >= 0.0))
    {
        throw std::invalid_argument("mac: capture_threshold_db must be >= 0");
    }
    if (queue_capacity < 1)
    {
        throw std::invalid_argument("mac: queue_capacity must be >= 1");
    }
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    {
        throw std::invalid_argument("mac: warmup_fraction must lie in [0, 1)");
    }
}

double
distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

void
Scenario::validate() const
{
    channel.propagation.validate();
    if (channel.bernoulli_drop && !(*channel.bernoulli_drop >= 0.0 && *channel.bernoulli_drop <= 1.0))
    {
        throw std::invalid_argument("scenario: bernoulli drop probability must lie in [0, 1]");
    }
    if (!(duration_s > 0.0))
    {
        throw std::invalid_argument("scenario: duration must be > 0");
    }
    if (nodes.empty())
    {
        throw std::invalid_argument("scenario: no nodes");
    }
    std::unordered_set<int> ids;
    for (const auto& n : nodes)
    {
        if (!ids.insert(n.id).second)
        {
            throw std::invalid_argument("scenario: duplicate node id " + std::to_string(n.id));
        }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
        {
            if (distance(nodes[i].pos, nodes[j].pos) < channel.propagation.d0_m)
            {
                throw std::invalid_argument("scenario: nodes " + std::to_string(nodes[i].id) + " and " +
                                            std::to_string(nodes[j].id) +
                                            " are closer than the reference distance");
            }
        }
    }
    for (const auto& f : flows)
    {
        if (f.path.size() < 2)
        {
            throw std::invalid_argument("scenario: a flow path needs at least two nodes");
        }
        for (std::size_t i = 0; i < f.path.size(); ++i)
        {
            if (!ids.contains(f.path[i]))
            {
                throw std::invalid_argument("scenario: flow references unknown node " +
                                            std::to_string(f.path[i]));
            }
            if (i > 0 && f.path[i] == f.path[i - 1])
            {
                throw std::invalid_argument("scenario: flow path repeats a node on consecutive hops");
            }
        }
        if (f.payload_bytes <= 0 || !(f.rate_pps >= 0.0) || !(f.start_s >= 0.0))
        {
            throw std::invalid_argument("scenario: invalid flow payload, rate or start time");
        }
    }
    if (flood)
    {
        if (!ids.contains(flood->origin))
        {
            throw std::invalid_argument("scenario: flood origin is not a node");
        }
        if (flood->payload_bytes <= 0 || !(flood->jitter_s >= 0.0) || !(flood->start_s >= 0.0))
        {
            throw std::invalid_argument("scenario: invalid flood parameters");
        }
    }
}

namespace {

SimTime
airtime(std::int64_t bits, std::int64_t rate_bps)
{
    return bits * 1'000'000'000LL / rate_bps;
}

} // namespace

SimTime
FrameTimes::data(int payload_bytes) const
{
    return airtime(phy_header_bits, control_rate_bps) +
           airtime(data_header_bits + 8LL * payload_bytes, data_rate_bps);
}

FrameTimes
frame_times(const DcfConfig& c)
{
    FrameTimes t{};
    const SimTime phy = airtime(c.phy_header_bits, c.control_rate_bps);
    t.rts = phy + airtime(c.rts_bits, c.control_rate_bps);
    t.cts = phy + airtime(c.cts_bits, c.control_rate_bps);
    t.ack = phy + airtime(c.ack_bits, c.control_rate_bps);
    t.slot = from_us(c.slot_us);
    t.sifs = from_us(c.sifs_us);
    t.difs = from_us(c.difs_us);
    t.data_rate_bps = c.data_rate_bps;
    t.control_rate_bps = c.control_rate_bps;
    t.phy_header_bits = c.phy_header_bits;
    t.data_header_bits = c.data_header_bits;
    return t;
}

double
carrier_sense_threshold_dbm(const DcfConfig& config, const PropagationParams& propagation)
{
    return mean_received_power_dbm(propagation, config.cs_range_factor * propagation.ideal_range_m);
}

double
RunMetrics::mean_backoff_slots(std::size_t node_index) const
{
    const auto& n = nodes.at(node_index);
    return n.backoff_draws == 0 ? 0.0 : n.backoff_slots_total / static_cast<double>(n.backoff_draws);
}

namespace {

enum class FrameKind : std::uint8_t
{
    Rts,
    Cts,
    Data,
    Ack,
    Broadcast,
};

const char*
frame_name(FrameKind k)
{
    switch (k)
    {
    case FrameKind::Rts:
        return "RTS";
    case FrameKind::Cts:
        return "CTS";
    case FrameKind::Data:
        return "DATA";
    case FrameKind::Ack:
        return "ACK";
    case FrameKind::Broadcast:
        return "BROADCAST";
    }
    return "?";
}

constexpr int kNoNode = -1;

struct Packet
{
    std::uint64_t uid = 0;
    int flow = -1; ///< -1 for flood packets
    int hop = 0;   ///< index of the current holder within the flow path
    int payload_bytes = 0;
    SimTime created = 0;
    SimTime enqueued = 0;
};

struct Frame
{
    FrameKind kind = FrameKind::Data;
    int src = kNoNode;
    int dst = kNoNode;
    SimTime nav = 0; ///< duration field: medium reserved after this frame ends
    Packet packet;
};

struct Transmission
{
    std::uint64_t id = 0;
    Frame frame;
    SimTime start = 0;
    SimTime end = 0;
    std::vector<double> rx_dbm;
    std::vector<double> rx_mw;
    std::vector<std::uint8_t> sensed;
    std::vector<std::uint8_t> erased;
};

enum class Phase : std::uint8_t
{
    Idle,
    Contend,
    Transmit,
    WaitCts,
    WaitAck,
};

struct NodeState
{
    int id = 0;
    Position pos;
    std::deque<Packet> queue;
    Phase phase = Phase::Idle;

    bool transmitting = false;
    int sensed = 0;
    SimTime nav_end = 0;
    std::uint64_t nav_token = 0;
    SimTime last_rx_start = -1;
    bool medium_idle = true;

    int cw = 31;
    std::int64_t backoff_remaining = -1;
    bool countdown_active = false;
    SimTime countdown_start = 0;
    SimTime backoff_end = 0;
    std::uint64_t backoff_token = 0;

    std::uint64_t exchange_token = 0;
    int peer = kNoNode;
    int short_count = 0;
    int long_count = 0;
    int attempts = 0;

    std::uint64_t decoding = 0;
    bool decoding_ok = false;

    std::unordered_map<int, std::uint64_t> last_uid_from;
    bool reached = false;
};

enum class EventKind : std::uint8_t
{
    TxEnd,
    BackoffDone,
    Timeout,
    SendFrame,
    NavCheck,
    NavReset,
    Generate,
    FloodStart,
    FloodRelay,
};

struct Event
{
    SimTime time;
    std::uint64_t seq;
    EventKind kind;
    int node;
    std::uint64_t arg;

    bool operator>(const Event& o) const
    {
        return time != o.time ? time > o.time : seq > o.seq;
    }
};

class Simulator
{
  public:
    Simulator(const Scenario& scenario, const DcfConfig& config, std::uint64_t seed, std::ostream* trace)
        : m_scenario(scenario)
        , m_config(config)
        , m_prop(scenario.channel.propagation)
        , m_times(frame_times(config))
        , m_rng(seed)
        , m_trace(trace)
    {
        m_cs_threshold_dbm = carrier_sense_threshold_dbm(config, m_prop);
        m_capture_ratio = std::pow(10.0, config.capture_threshold_db / 10.0);
        m_end = from_seconds(scenario.duration_s);
        m_warmup = from_seconds(scenario.duration_s * config.warmup_fraction);

        std::unordered_map<int, int> index_of;
        for (const auto& spec : scenario.nodes)
        {
            NodeState n;
            n.id = spec.id;
            n.pos = spec.pos;
            n.cw = config.backoff.cw_min_slots;
            index_of[spec.id] = static_cast<int>(m_nodes.size());
            m_nodes.push_back(std::move(n));
        }
        const std::size_t n = m_nodes.size();
        m_mean_dbm.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < n; ++j)
            {
                if (i != j)
                {
                    m_mean_dbm[i * n + j] =
                        mean_received_power_dbm(m_prop, distance(m_nodes[i].pos, m_nodes[j].pos));
                }
            }
        }
        for (const auto& f : scenario.flows)
        {
            std::vector<int> path;
            for (int id : f.path)
            {
                path.push_back(index_of.at(id));
            }
            m_paths.push_back(std::move(path));
        }
        if (scenario.flood)
        {
            m_flood_origin = index_of.at(scenario.flood->origin);
        }

        m_metrics.nodes.resize(n);
        m_metrics.flows.resize(scenario.flows.size());
        m_flow_bits_after_warmup.assign(scenario.flows.size(), 0.0);
        for (auto& s : m_metrics.nodes)
        {
            s.attempts_histogram.assign(
                static_cast<std::size_t>(std::max(config.retry.srl, config.retry.lrl)), 0);
        }
        if (m_trace)
        {
            *m_trace << "time_s,node,event,frame,peer,power_dbm\n";
        }
    }

    RunMetrics run()
    {
        for (std::size_t f = 0; f < m_scenario.flows.size(); ++f)
        {
            schedule(from_seconds(m_scenario.flows[f].start_s), EventKind::Generate, m_paths[f][0], f);
        }
        if (m_scenario.flood)
        {
            schedule(from_seconds(m_scenario.flood->start_s), EventKind::FloodStart, m_flood_origin, 0);
        }

        while (!m_events.empty() && m_events.top().time <= m_end)
        {
            const Event ev = m_events.top();
            m_events.pop();
            m_now = ev.time;
            dispatch(ev);
        }
        m_now = m_end;
        if (m_busy_count > 0)
        {
            m_busy_total += m_now - m_busy_since;
        }
        return finish();
    }

  private:
    void schedule(SimTime t, EventKind kind, int node, std::uint64_t arg)
    {
        m_events.push(Event{t, m_seq++, kind, node, arg});
    }

    void dispatch(const Event& ev)
    {
        switch (ev.kind)
        {
        case EventKind::TxEnd:
            end_transmission(ev.arg);
            break;
        case EventKind::BackoffDone:
            backoff_done(ev.node, ev.arg);
            break;
        case EventKind::Timeout:
            response_timeout(ev.node, ev.arg);
            break;
        case EventKind::SendFrame: {
            auto it = m_scheduled_frames.find(ev.arg);
            Frame f = std::move(it->second);
            m_scheduled_frames.erase(it);
            if (!m_nodes[ev.node].transmitting)
            {
                start_transmission(ev.node, std::move(f));
            }
            else if (f.kind == FrameKind::Data)
            {
                // Could not follow the CTS; treat as a lost DATA/ACK exchange.
                m_nodes[ev.node].phase = Phase::WaitAck;
                arm_timeout(ev.node, m_times.sifs + m_times.ack + m_times.slot);
            }
            break;
        }
        case EventKind::NavCheck:
            refresh(ev.node);
            break;
        case EventKind::NavReset:
            nav_reset(ev.node, ev.arg);
            break;
        case EventKind::Generate:
            generate(static_cast<std::size_t>(ev.arg));
            break;
        case EventKind::FloodStart:
            flood_start();
            break;
        case EventKind::FloodRelay:
            enqueue(ev.node, flood_packet());
            break;
        }
    }

    // ---- medium state -------------------------------------------------

    bool compute_idle(const NodeState& n) const
    {
        return !n.transmitting && n.sensed == 0 && m_now >= n.nav_end;
    }

    void refresh(int i)
    {
        NodeState& n = m_nodes[i];
        const bool idle = compute_idle(n);
        if (idle == n.medium_idle)
        {
            return;
        }
        n.medium_idle = idle;
        if (idle)
        {
            resume_countdown(i);
        }
        else
        {
            pause_countdown(i);
        }
    }

    void refresh_all()
    {
        for (int i = 0; i < static_cast<int>(m_nodes.size()); ++i)
        {
            refresh(i);
        }
    }

    void resume_countdown(int i)
    {
        NodeState& n = m_nodes[i];
        if (n.phase != Phase::Contend || !n.medium_idle || n.countdown_active)
        {
            return;
        }
        n.countdown_start = m_now + m_times.difs;
        n.backoff_end = n.countdown_start + n.backoff_remaining * m_times.slot;
        n.countdown_active = true;
        schedule(n.backoff_end, EventKind::BackoffDone, i, ++n.backoff_token);
    }

    void pause_countdown(int i)
    {
        NodeState& n = m_nodes[i];
        if (!n.countdown_active || n.backoff_end == m_now)
        {
            // A countdown expiring in the same instant the medium turns busy
            // still transmits: both stations picked the same slot.
            return;
        }
        const SimTime counted = m_now - n.countdown_start;
        if (counted > 0)
        {
            n.backoff_remaining -= counted / m_times.slot;
        }
        n.countdown_active = false;
        ++n.backoff_token;
    }

    void draw_backoff(int i)
    {
        NodeState& n = m_nodes[i];
        const int cw = m_config.backoff_enabled ? n.cw : m_config.backoff.cw_min_slots;
        n.backoff_remaining = m_rng.uniform_int(0, cw);
        auto& s = m_metrics.nodes[i];
        ++s.backoff_draws;
        s.backoff_slots_total += static_cast<double>(n.backoff_remaining);
    }

    // ---- queue / packet lifecycle --------------------------------------

    void enqueue(int i, Packet p)
    {
        NodeState& n = m_nodes[i];
        if (static_cast<int>(n.queue.size()) >= m_config.queue_capacity)
        {
            ++m_metrics.nodes[i].queue_drops;
            return;
        }
        p.enqueued = m_now;
        n.queue.push_back(p);
        ++m_metrics.nodes[i].enqueued;
        start_next(i);
    }

    void start_next(int i)
    {
        NodeState& n = m_nodes[i];
        if (n.phase != Phase::Idle || n.queue.empty())
        {
            return;
        }
        n.phase = Phase::Contend;
        n.short_count = 0;
        n.long_count = 0;
        n.attempts = 0;
        draw_backoff(i);
        resume_countdown(i);
    }

    void finish_packet(int i)
    {
        NodeState& n = m_nodes[i];
        const Packet done = n.queue.front();
        n.queue.pop_front();
        n.phase = Phase::Idle;
        n.peer = kNoNode;
        if (done.flow >= 0 && done.hop == 0 &&
            m_scenario.flows[static_cast<std::size_t>(done.flow)].rate_pps == 0.0)
        {
            generate(static_cast<std::size_t>(done.flow));
        }
        start_next(i);
    }

    void generate(std::size_t f)
    {
        const FlowSpec& spec = m_scenario.flows[f];
        Packet p;
        p.uid = ++m_uid;
        p.flow = static_cast<int>(f);
        p.hop = 0;
        p.payload_bytes = spec.payload_bytes;
        p.created = m_now;
        ++m_metrics.flows[f].offered;
        enqueue(m_paths[f][0], p);
        if (spec.rate_pps > 0.0)
        {
            schedule(m_now + from_seconds(1.0 / spec.rate_pps), EventKind::Generate, m_paths[f][0], f);
        }
    }

    Packet flood_packet()
    {
        Packet p;
        p.uid = ++m_uid;
        p.flow = -1;
        p.payload_bytes = m_scenario.flood->payload_bytes;
        p.created = m_now;
        return p;
    }

    void flood_start()
    {
        m_nodes[m_flood_origin].reached = true;
        enqueue(m_flood_origin, flood_packet());
    }

    int next_hop(const Packet& p) const
    {
        return m_paths[static_cast<std::size_t>(p.flow)][static_cast<std::size_t>(p.hop) + 1];
    }

    // ---- transmit side -------------------------------------------------

    void backoff_done(int i, std::uint64_t token)
    {
        NodeState& n = m_nodes[i];
        if (token != n.backoff_token || !n.countdown_active)
        {
            return;
        }
        n.countdown_active = false;
        if (n.transmitting)
        {
            // Busy answering someone else; retry the final slot once idle.
            n.backoff_remaining = 0;
            return;
        }
        n.backoff_remaining = -1;
        ++n.attempts;

        const Packet& head = n.queue.front();
        Frame f;
        f.src = i;
        f.packet = head;
        if (head.flow < 0)
        {
            f.kind = FrameKind::Broadcast;
        }
        else
        {
            n.peer = next_hop(head);
            f.dst = n.peer;
            const SimTime data = m_times.data(head.payload_bytes);
            if (m_config.rts_cts)
            {
                f.kind = FrameKind::Rts;
                f.nav = 3 * m_times.sifs + m_times.cts + data + m_times.ack;
            }
            else
            {
                f.kind = FrameKind::Data;
                f.nav = m_times.sifs + m_times.ack;
            }
        }
        n.phase = Phase::Transmit;
        start_transmission(i, std::move(f));
    }

    SimTime frame_airtime(const Frame& f) const
    {
        switch (f.kind)
        {
        case FrameKind::Rts:
            return m_times.rts;
        case FrameKind::Cts:
            return m_times.cts;
        case FrameKind::Ack:
            return m_times.ack;
        case FrameKind::Data:
        case FrameKind::Broadcast:
            return m_times.data(f.packet.payload_bytes);
        }
        return 0;
    }

    Transmission* find_active(std::uint64_t id)
    {
        for (auto& t : m_active)
        {
            if (t.id == id)
            {
                return &t;
            }
        }
        return nullptr;
    }

    double interference_mw(int rx, std::uint64_t except) const
    {
        double sum = 0.0;
        for (const auto& t : m_active)
        {
            if (t.id != except && t.frame.src != rx)
            {
                sum += t.rx_mw[static_cast<std::size_t>(rx)];
            }
        }
        return sum;
    }

    bool survives(double signal_mw, double interference) const
    {
        if (!m_config.capture_enabled)
        {
            return interference == 0.0;
        }
        return signal_mw >= m_capture_ratio * interference;
    }

    void start_transmission(int i, Frame f)
    {
        const std::size_t n = m_nodes.size();
        NodeState& sender = m_nodes[i];

        Transmission tx;
        tx.id = ++m_tx_id;
        tx.start = m_now;
        tx.end = m_now + frame_airtime(f);
        tx.rx_dbm.assign(n, -std::numeric_limits<double>::infinity());
        tx.rx_mw.assign(n, 0.0);
        tx.sensed.assign(n, 0);
        tx.erased.assign(n, 0);
        for (std::size_t j = 0; j < n; ++j)
        {
            if (static_cast<int>(j) == i)
            {
                continue;
            }
            const double mean = m_mean_dbm[static_cast<std::size_t>(i) * n + j];
            if (m_scenario.channel.bernoulli_drop)
            {
                tx.rx_dbm[j] = mean;
                tx.erased[j] = m_rng.bernoulli(*m_scenario.channel.bernoulli_drop) ? 1 : 0;
            }
            else
            {
                tx.rx_dbm[j] = m_prop.sigma_db > 0.0 ? mean + m_prop.sigma_db * m_rng.standard_normal()
                                                      : mean;
            }
            tx.rx_mw[j] = dbm_to_mw(tx.rx_dbm[j]);
        }

        ++m_metrics.nodes[i].transmissions;
        trace(i, "tx_start", f.kind, f.dst, std::nullopt);

        sender.transmitting = true;
        if (sender.decoding != 0)
        {
            sender.decoding = 0;
        }
        if (m_busy_count++ == 0)
        {
            m_busy_since = m_now;
        }

        tx.frame = std::move(f);
        m_active.push_back(std::move(tx));
        Transmission& t = m_active.back();

        for (std::size_t j = 0; j < n; ++j)
        {
            if (static_cast<int>(j) == i)
            {
                continue;
            }
            NodeState& r = m_nodes[j];
            const int rx = static_cast<int>(j);
            if (!r.transmitting)
            {
                if (r.decoding != 0)
                {
                    const Transmission* cur = find_active(r.decoding);
                    if (r.decoding_ok && !survives(cur->rx_mw[j], interference_mw(rx, cur->id)))
                    {
                        r.decoding_ok = false;
                    }
                }
                else if (t.rx_dbm[j] >= m_prop.p_th_dbm && t.erased[j] == 0 &&
                         survives(t.rx_mw[j], interference_mw(rx, t.id)))
                {
                    r.decoding = t.id;
                    r.decoding_ok = true;
                }
            }
            if (t.rx_dbm[j] >= m_cs_threshold_dbm)
            {
                t.sensed[j] = 1;
                ++r.sensed;
                r.last_rx_start = m_now;
            }
        }

        schedule(t.end, EventKind::TxEnd, i, t.id);
        refresh_all();
    }

    void end_transmission(std::uint64_t id)
    {
        auto it = std::find_if(m_active.begin(), m_active.end(),
                               [id](const Transmission& t) { return t.id == id; });
        Transmission tx = std::move(*it);
        m_active.erase(it);
        if (--m_busy_count == 0)
        {
            m_busy_total += m_now - m_busy_since;
        }

        const int src = tx.frame.src;
        m_nodes[src].transmitting = false;

        std::vector<int> decoded;
        for (std::size_t j = 0; j < m_nodes.size(); ++j)
        {
            NodeState& r = m_nodes[j];
            if (tx.sensed[j] != 0)
            {
                --r.sensed;
            }
            if (r.decoding == id)
            {
                r.decoding = 0;
                if (r.decoding_ok)
                {
                    decoded.push_back(static_cast<int>(j));
                }
                else
                {
                    trace(static_cast<int>(j), "rx_collision", tx.frame.kind, src, tx.rx_dbm[j]);
                }
            }
        }

        after_own_transmission(src, tx.frame);
        for (int j : decoded)
        {
            trace(j, "rx_ok", tx.frame.kind, src, tx.rx_dbm[static_cast<std::size_t>(j)]);
            receive(j, tx.frame);
        }
        refresh_all();
    }

    void arm_timeout(int i, SimTime after)
    {
        NodeState& n = m_nodes[i];
        schedule(m_now + after, EventKind::Timeout, i, ++n.exchange_token);
    }

    void after_own_transmission(int i, const Frame& f)
    {
        NodeState& n = m_nodes[i];
        switch (f.kind)
        {
        case FrameKind::Rts:
            n.phase = Phase::WaitCts;
            arm_timeout(i, m_times.sifs + m_times.cts + m_times.slot);
            break;
        case FrameKind::Data:
            if (n.phase == Phase::Transmit)
            {
                n.phase = Phase::WaitAck;
                arm_timeout(i, m_times.sifs + m_times.ack + m_times.slot);
            }
            break;
        case FrameKind::Broadcast:
            ++m_metrics.nodes[i].broadcasts_sent;
            finish_packet(i);
            break;
        case FrameKind::Cts:
        case FrameKind::Ack:
            break;
        }
    }

    void response_timeout(int i, std::uint64_t token)
    {
        NodeState& n = m_nodes[i];
        if (token != n.exchange_token)
        {
            return;
        }
        if (n.phase == Phase::WaitCts)
        {
            trace(i, "cts_timeout", FrameKind::Rts, n.peer, std::nullopt);
            ++n.short_count;
        }
        else if (n.phase == Phase::WaitAck)
        {
            trace(i, "ack_timeout", FrameKind::Data, n.peer, std::nullopt);
            if (m_config.rts_cts)
            {
                ++n.short_count;
            }
            ++n.long_count;
        }
        else
        {
            return;
        }

        if (m_config.backoff_enabled)
        {
            n.cw = std::min(2 * n.cw + 1, m_config.backoff.cw_max_slots);
        }
        const bool short_exhausted = m_config.rts_cts && n.short_count >= m_config.retry.srl;
        if (short_exhausted || n.long_count >= m_config.retry.lrl)
        {
            trace(i, "retry_drop", FrameKind::Data, n.peer, std::nullopt);
            ++m_metrics.nodes[i].retry_drops;
            n.cw = m_config.backoff.cw_min_slots;
            finish_packet(i);
            return;
        }
        n.phase = Phase::Contend;
        draw_backoff(i);
        resume_countdown(i);
    }

    // ---- receive side --------------------------------------------------

    void set_nav(int i, SimTime duration, bool from_rts)
    {
        if (duration <= 0)
        {
            return;
        }
        NodeState& n = m_nodes[i];
        const SimTime until = m_now + duration;
        if (until > n.nav_end)
        {
            n.nav_end = until;
            ++n.nav_token;
            schedule(until, EventKind::NavCheck, i, 0);
            if (from_rts)
            {
                schedule(m_now + 2 * m_times.sifs + m_times.cts + 2 * m_times.slot, EventKind::NavReset, i,
                         n.nav_token);
            }
        }
    }

    // An RTS-set NAV is dropped when the exchange it announced never started.
    void nav_reset(int i, std::uint64_t token)
    {
        NodeState& n = m_nodes[i];
        const SimTime rts_end = m_now - 2 * m_times.sifs - m_times.cts - 2 * m_times.slot;
        if (token != n.nav_token || n.last_rx_start > rts_end || n.nav_end <= m_now)
        {
            return;
        }
        n.nav_end = m_now;
        trace(i, "nav_reset", FrameKind::Rts, kNoNode, std::nullopt);
        refresh(i);
    }

    void send_after_sifs(int i, Frame f)
    {
        const std::uint64_t key = ++m_frame_key;
        m_scheduled_frames.emplace(key, std::move(f));
        schedule(m_now + m_times.sifs, EventKind::SendFrame, i, key);
    }

    void receive(int i, const Frame& f)
    {
        NodeState& n = m_nodes[i];
        if (f.kind == FrameKind::Broadcast)
        {
            receive_broadcast(i);
            return;
        }
        if (f.dst != i)
        {
            set_nav(i, f.nav, f.kind == FrameKind::Rts);
            return;
        }
        switch (f.kind)
        {
        case FrameKind::Rts:
            if (m_now >= n.nav_end)
            {
                Frame cts;
                cts.kind = FrameKind::Cts;
                cts.src = i;
                cts.dst = f.src;
                cts.nav = f.nav - m_times.sifs - m_times.cts;
                send_after_sifs(i, std::move(cts));
            }
            break;
        case FrameKind::Cts:
            if (n.phase == Phase::WaitCts && n.peer == f.src)
            {
                ++n.exchange_token;
                n.cw = m_config.backoff.cw_min_slots;
                n.phase = Phase::Transmit;
                Frame data;
                data.kind = FrameKind::Data;
                data.src = i;
                data.dst = f.src;
                data.packet = n.queue.front();
                data.nav = m_times.sifs + m_times.ack;
                send_after_sifs(i, std::move(data));
            }
            break;
        case FrameKind::Data: {
            Frame ack;
            ack.kind = FrameKind::Ack;
            ack.src = i;
            ack.dst = f.src;
            send_after_sifs(i, std::move(ack));
            accept_packet(i, f.src, f.packet);
            break;
        }
        case FrameKind::Ack:
            if (n.phase == Phase::WaitAck && n.peer == f.src)
            {
                ++n.exchange_token;
                auto& s = m_metrics.nodes[i];
                ++s.acked;
                const auto slot = static_cast<std::size_t>(std::max(n.attempts, 1) - 1);
                if (slot >= s.attempts_histogram.size())
                {
                    s.attempts_histogram.resize(slot + 1, 0);
                }
                ++s.attempts_histogram[slot];
                s.delays_s.push_back(to_seconds(m_now - n.queue.front().enqueued));
                n.cw = m_config.backoff.cw_min_slots;
                finish_packet(i);
            }
            break;
        case FrameKind::Broadcast:
            break;
        }
    }

    void accept_packet(int i, int from, Packet p)
    {
        auto [it, fresh] = m_nodes[i].last_uid_from.try_emplace(from, p.uid);
        if (!fresh)
        {
            if (p.uid <= it->second)
            {
                return; // retransmission of something already accepted
            }
            it->second = p.uid;
        }
        const auto& path = m_paths[static_cast<std::size_t>(p.flow)];
        ++p.hop;
        if (static_cast<std::size_t>(p.hop) + 1 == path.size())
        {
            auto& fs = m_metrics.flows[static_cast<std::size_t>(p.flow)];
            ++fs.received;
            fs.delays_s.push_back(to_seconds(m_now - p.created));
            if (m_now >= m_warmup)
            {
                ++fs.received_after_warmup;
                m_flow_bits_after_warmup[static_cast<std::size_t>(p.flow)] +=
                    8.0 * static_cast<double>(p.payload_bytes);
            }
            return;
        }
        enqueue(i, p);
    }

    void receive_broadcast(int i)
    {
        NodeState& n = m_nodes[i];
        if (!m_scenario.flood || n.reached)
        {
            return;
        }
        n.reached = true;
        const SimTime jitter = from_seconds(m_rng.uniform(0.0, m_scenario.flood->jitter_s));
        schedule(m_now + jitter, EventKind::FloodRelay, i, 0);
    }

    // ---- output --------------------------------------------------------

    void trace(int node, const char* what, FrameKind kind, int peer, std::optional<double> power)
    {
        if (!m_trace)
        {
            return;
        }
        *m_trace << format_double(to_seconds(m_now)) << ',' << m_nodes[node].id << ',' << what << ','
                 << frame_name(kind) << ',';
        if (peer != kNoNode)
        {
            *m_trace << m_nodes[peer].id;
        }
        *m_trace << ',';
        if (power)
        {
            *m_trace << format_double(*power);
        }
        *m_trace << '\n';
    }

    RunMetrics finish()
    {
        RunMetrics& m = m_metrics;
        m.duration_s = m_scenario.duration_s;
        m.warmup_s = to_seconds(m_warmup);
        m.channel_busy_s = to_seconds(m_busy_total);
        const double measured = to_seconds(m_end - m_warmup);
        for (std::size_t f = 0; f < m.flows.size(); ++f)
        {
            m.flows[f].throughput_bps = measured > 0.0 ? m_flow_bits_after_warmup[f] / measured : 0.0;
        }
        std::size_t reached = 0;
        for (std::size_t i = 0; i < m_nodes.size(); ++i)
        {
            m.node_ids.push_back(m_nodes[i].id);
            m.nodes[i].pending = m_nodes[i].queue.size();
            m.flood_reached.push_back(m_nodes[i].reached);
            reached += m_nodes[i].reached ? 1 : 0;
        }
        m.coverage = m_scenario.flood ? static_cast<double>(reached) / static_cast<double>(m_nodes.size())
                                      : 0.0;
        return std::move(m_metrics);
    }

    const Scenario& m_scenario;
    const DcfConfig& m_config;
    const PropagationParams& m_prop;
    FrameTimes m_times;
    Rng m_rng;
    std::ostream* m_trace;

    double m_cs_threshold_dbm = 0.0;
    double m_capture_ratio = 1.0;
    SimTime m_now = 0;
    SimTime m_end = 0;
    SimTime m_warmup = 0;

    std::vector<NodeState> m_nodes;
    std::vector<double> m_mean_dbm;
    std::vector<std::vector<int>> m_paths;
    int m_flood_origin = kNoNode;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> m_events;
    std::uint64_t m_seq = 0;
    std::vector<Transmission> m_active;
    std::uint64_t m_tx_id = 0;
    std::uint64_t m_uid = 0;
    std::unordered_map<std::uint64_t, Frame> m_scheduled_frames;
    std::uint64_t m_frame_key = 0;

    int m_busy_count = 0;
    SimTime m_busy_since = 0;
    SimTime m_busy_total = 0;

    RunMetrics m_metrics;
    std::vector<double> m_flow_bits_after_warmup;
};

} // namespace

RunMetrics
run(const Scenario& scenario, const DcfConfig& config, std::uint64_t seed, std::ostream* trace)
{
    scenario.validate();
    config.validate();
    Simulator sim(scenario, config, seed, trace);
    return sim.run();
}

std::optional<DelayStats>
one_hop_delay(const RunMetrics& metrics, std::size_t node_index)
{
    std::vector<double> d = metrics.nodes.at(node_index).delays_s;
    if (d.empty())
    {
        return std::nullopt;
    }
    std::sort(d.begin(), d.end());
    const auto pct = [&d](double q) {
        const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(d.size()))) ;
        return d[std::clamp<std::size_t>(k, 1, d.size()) - 1];
    };
    DelayStats s;
    s.count = d.size();
    double sum = 0.0;
    for (double v : d)
    {
        sum += v;
    }
    s.mean_s = sum / static_cast<double>(d.size());
    s.p50_s = pct(0.5);
    s.p90_s = pct(0.9);
    s.p99_s = pct(0.99);
    return s;
}

double
saturation_capacity(double distance_m, const DcfConfig& config, const PropagationParams& propagation,
                    int payload_bytes, double duration_s, std::uint64_t seed)
{
    Scenario s;
    s.nodes = {{0, {0.0, 0.0}}, {1, {distance_m, 0.0}}};
    s.flows = {{{0, 1}, payload_bytes, 0.0, 0.0}};
    s.channel.propagation = propagation;
    s.duration_s = duration_s;
    return run(s, config, seed).flows[0].throughput_bps;
}

} // namespace fademac
