#pragma once

#include <span>
#include <vector>

namespace fademac {

/// Single-interferer capture analysis under ideal power-law propagation
/// (no fading, no noise).
struct CaptureParams
{
    double capture_threshold = 10.0; ///< linear power ratio
    double path_loss_exponent = 4.0;
    double tx_range_m = 250.0;
    double cs_range_factor = 2.2;

    double cs_range_m() const { return cs_range_factor * tx_range_m; }

    void validate() const;

    bool operator==(const CaptureParams&) const = default;
};

enum class CsmaCase
{
    Average, ///< interferer-sender distance equals interferer-receiver distance
    Worst,   ///< interferer on the far side of the receiver
};

/// Interferer-receiver distance at which P_sender / P_interferer equals the
/// capture threshold. Closer interferers collide.
double capture_line(const CaptureParams& params, double d_sr_m);

/// An interferer is silenced by RTS/CTS only if it can hear the receiver's CTS.
bool ca_blocks(const CaptureParams& params, double d_ir_m);

bool csma_blocks(const CaptureParams& params, double d_sr_m, double d_ir_m, CsmaCase c);

struct RegionRow
{
    double d_sr_m;
    double capture_line_m;
    double ca_bound_m;
    double csma_avg_bound_m;
    double csma_worst_bound_m;
};

/// Bounds per sender-receiver distance: interferers at d_ir at or below a
/// bound are blocked by that mechanism. The worst-case bound is clamped at 0.
std::vector<RegionRow> region_table(const CaptureParams& params, std::span<const double> d_sr_grid);

} // namespace fademac
