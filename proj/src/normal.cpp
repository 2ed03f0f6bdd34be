#include "fademac/normal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fademac {

double
normal_upper_tail(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double
normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace {

double
acklam_initial_guess(double prob)
{
    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                            1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                            6.680131188771972e+01,  -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                            -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                            3.754408661907416e+00};
    constexpr double low = 0.02425;

    if (prob < low)
    {
        const double q = std::sqrt(-2.0 * std::log(prob));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (prob > 1.0 - low)
    {
        const double q = std::sqrt(-2.0 * std::log1p(-prob));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = prob - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double
normal_quantile(double prob)
{
    if (!(prob > 0.0 && prob < 1.0))
    {
        throw std::domain_error("normal_quantile: probability must lie in (0, 1)");
    }
    double x = acklam_initial_guess(prob);
    for (int i = 0; i < 2; ++i)
    {
        // Work on the tail that is closest to zero to avoid cancellation.
        const double err = prob < 0.5 ? normal_cdf(x) - prob : (1.0 - prob) - normal_upper_tail(x);
        const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        if (density == 0.0)
        {
            break;
        }
        const double u = err / density;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

} // namespace fademac
