#include "fademac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fademac {

void
CaptureParams::validate() const
{
    if (!(capture_threshold >= 1.0))
    {
        throw std::invalid_argument("geometry: capture_threshold must be >= 1");
    }
    if (!(path_loss_exponent > 0.0))
    {
        throw std::invalid_argument("geometry: path_loss_exponent must be > 0");
    }
    if (!(tx_range_m > 0.0))
    {
        throw std::invalid_argument("geometry: tx_range_m must be > 0");
    }
    if (!(cs_range_factor >= 1.0))
    {
        throw std::invalid_argument("geometry: cs_range_factor must be >= 1");
    }
}

double
capture_line(const CaptureParams& params, double d_sr_m)
{
    if (!(d_sr_m > 0.0))
    {
        throw std::domain_error("capture_line: sender-receiver distance must be > 0");
    }
    return d_sr_m * std::pow(params.capture_threshold, 1.0 / params.path_loss_exponent);
}

bool
ca_blocks(const CaptureParams& params, double d_ir_m)
{
    return d_ir_m <= params.tx_range_m;
}

bool
csma_blocks(const CaptureParams& params, double d_sr_m, double d_ir_m, CsmaCase c)
{
    switch (c)
    {
    case CsmaCase::Average:
        return d_ir_m <= params.cs_range_m();
    case CsmaCase::Worst:
        return d_sr_m + d_ir_m <= params.cs_range_m();
    }
    return false;
}

std::vector<RegionRow>
region_table(const CaptureParams& params, std::span<const double> d_sr_grid)
{
    if (d_sr_grid.empty())
    {
        throw std::invalid_argument("region_table: grid must not be empty");
    }
    std::vector<RegionRow> rows;
    rows.reserve(d_sr_grid.size());
    for (double d : d_sr_grid)
    {
        rows.push_back({d, capture_line(params, d), params.tx_range_m, params.cs_range_m(),
                        std::max(0.0, params.cs_range_m() - d)});
    }
    return rows;
}

} // namespace fademac
