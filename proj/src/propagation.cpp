#include "fademac/propagation.hpp"

#include "fademac/normal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fademac {

double
PropagationParams::p_d0_dbm() const
{
    return p_th_dbm + 10.0 * beta * std::log10(ideal_range_m / d0_m);
}

void
PropagationParams::validate() const
{
    if (!(beta > 0.0))
    {
        throw std::invalid_argument("propagation: beta must be > 0");
    }
    if (!(sigma_db >= 0.0))
    {
        throw std::invalid_argument("propagation: sigma_db must be >= 0");
    }
    if (!(d0_m > 0.0))
    {
        throw std::invalid_argument("propagation: d0_m must be > 0");
    }
    if (!(ideal_range_m > d0_m))
    {
        throw std::invalid_argument("propagation: ideal_range_m must exceed d0_m");
    }
    if (!std::isfinite(p_th_dbm))
    {
        throw std::invalid_argument("propagation: p_th_dbm must be finite");
    }
}

LinkRatio::LinkRatio(double p)
    : m_p(p)
{
    if (!(p >= 0.0 && p <= 1.0))
    {
        throw std::invalid_argument("LinkRatio must lie in [0, 1], got " + std::to_string(p));
    }
}

namespace {

void
require_distance(const PropagationParams& params, double d_m)
{
    if (!(d_m >= params.d0_m))
    {
        throw std::domain_error("distance " + std::to_string(d_m) +
                                " m is below the reference distance " +
                                std::to_string(params.d0_m) + " m");
    }
}

} // namespace

double
mean_received_power_dbm(const PropagationParams& params, double d_m)
{
    require_distance(params, d_m);
    return params.p_d0_dbm() - 10.0 * params.beta * std::log10(d_m / params.d0_m);
}

double
sample_received_power_dbm(const PropagationParams& params, double d_m, Rng& rng)
{
    const double mean = mean_received_power_dbm(params, d_m);
    if (params.sigma_db == 0.0)
    {
        return mean;
    }
    return mean + params.sigma_db * rng.standard_normal();
}

LinkRatio
link_delivery_ratio(const PropagationParams& params, double d_m)
{
    const double margin = mean_received_power_dbm(params, d_m) - params.p_th_dbm;
    if (params.sigma_db == 0.0)
    {
        return LinkRatio(margin >= 0.0 ? 1.0 : 0.0);
    }
    return LinkRatio(normal_cdf(margin / params.sigma_db));
}

double
distance_for_delivery_ratio(const PropagationParams& params, LinkRatio p)
{
    if (!(p.value() > 0.0 && p.value() < 1.0))
    {
        throw std::domain_error("distance_for_delivery_ratio: p must lie strictly inside (0, 1)");
    }
    if (!(params.sigma_db > 0.0))
    {
        throw std::domain_error("distance_for_delivery_ratio: sigma_db must be > 0");
    }
    const double margin = params.sigma_db * normal_quantile(p.value());
    return distance_for_mean_power(params, params.p_th_dbm + margin);
}

double
distance_for_mean_power(const PropagationParams& params, double power_dbm)
{
    return params.d0_m * std::pow(10.0, (params.p_d0_dbm() - power_dbm) / (10.0 * params.beta));
}

} // namespace fademac
