#pragma once

#include "fademac/rng.hpp"

#include <cmath>

namespace fademac {

/// Log-distance path loss with log-normal shadowing.
///
/// The reference power at d0 is not a free parameter: it is calibrated so
/// that the mean received power at `ideal_range_m` equals the receiver
/// sensitivity `p_th_dbm`. Only the margin above threshold influences
/// delivery, so the absolute dBm level is arbitrary.
struct PropagationParams
{
    double beta = 3.0;
    double sigma_db = 4.0;
    double d0_m = 1.0;
    double p_th_dbm = -64.0;
    double ideal_range_m = 250.0;

    /// Mean received power at d0, derived from the calibration constraint.
    double p_d0_dbm() const;

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    bool operator==(const PropagationParams&) const = default;
};

/// Single-transmission delivery probability, always in [0, 1].
class LinkRatio
{
  public:
    LinkRatio() = default;
    explicit LinkRatio(double p);

    double value() const { return m_p; }

  private:
    double m_p = 0.0;
};

double mean_received_power_dbm(const PropagationParams& params, double d_m);

/// One shadowed power draw; slow fading keeps this value for a whole packet.
double sample_received_power_dbm(const PropagationParams& params, double d_m, Rng& rng);

/// P(received power >= threshold) at distance d_m.
LinkRatio link_delivery_ratio(const PropagationParams& params, double d_m);

/// Inverse of link_delivery_ratio. Requires sigma_db > 0 and 0 < p < 1.
double distance_for_delivery_ratio(const PropagationParams& params, LinkRatio p);

/// Distance at which the mean received power equals `power_dbm`.
double distance_for_mean_power(const PropagationParams& params, double power_dbm);

inline double
dbm_to_mw(double dbm)
{
    return std::pow(10.0, dbm / 10.0);
}

} // namespace fademac
