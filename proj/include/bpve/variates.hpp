// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/variates.hpp
//! Exact discrete and continuous variate generators over a bpve::Stream.
//!
//! Algorithms are fixed so that a given stream position always yields the same
//! variate across releases:
//!   - Poisson: inversion by recurrence for mean <= 30, PTRS (Hoermann 1993)
//!     above.
//!   - Binomial: single-uniform inversion started at the mode. One uniform per
//!     draw, and the result is nondecreasing in the success probability for a
//!     fixed uniform, which the selection engine relies on for coupling.
//!   - Gamma: Marsaglia-Tsang with polar-method normals.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rng.hpp"

namespace bpve {

using Count = std::uint64_t;

inline constexpr Count count_max = std::numeric_limits<Count>::max();

namespace detail {

//! Clamp a nonnegative double to Count, saturating at count_max.
[[nodiscard]] inline Count saturate(double x) noexcept
{
    if (!(x > 0.0)) {
        return 0;
    }
    if (x >= 18446744073709549568.0) {
        return count_max;
    }
    return static_cast<Count>(x);
}

[[nodiscard]] inline Count saturating_add(Count a, Count b) noexcept
{
    return (a > count_max - b) ? count_max : a + b;
}

[[nodiscard]] inline Count saturating_mul(Count a, Count b) noexcept
{
    if (a == 0 || b == 0) {
        return 0;
    }
    return (a > count_max / b) ? count_max : a * b;
}

}  // namespace detail

[[nodiscard]] inline double standard_normal(Stream& s)
{
    for (;;) {
        double const u = 2.0 * s.uniform() - 1.0;
        double const v = 2.0 * s.uniform() - 1.0;
        double const r = u * u + v * v;
        if (r > 0.0 && r < 1.0) {
            return u * std::sqrt(-2.0 * std::log(r) / r);
        }
    }
}

//! Gamma(shape, 1) variate, shape > 0.
[[nodiscard]] inline double gamma_variate(double shape, Stream& s)
{
    if (shape < 1.0) {
        double const boost = std::pow(s.uniform(), 1.0 / shape);
        return gamma_variate(shape + 1.0, s) * boost;
    }
    double const d = shape - 1.0 / 3.0;
    double const c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = standard_normal(s);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double const u = s.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

//! Number of failures before the first success, P(k) = (1-p)^k p, where the
//! law is parameterized by its mean m = (1-p)/p.
[[nodiscard]] inline Count geometric_variate(double mean, Stream& s)
{
    // log(m/(1+m)) = -log1p(1/m)
    double const log_q = -std::log1p(1.0 / mean);
    return detail::saturate(std::floor(std::log(s.uniform()) / log_q));
}

[[nodiscard]] inline Count poisson_variate(double mean, Stream& s)
{
    if (!(mean > 0.0)) {
        return 0;
    }
    if (mean <= 30.0) {
        double p = std::exp(-mean);
        double cdf = p;
        double const u = s.uniform();
        Count k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            double const next = cdf + p;
            if (next == cdf) {
                break;  // remaining mass below double resolution
            }
            cdf = next;
        }
        return k;
    }
    // PTRS: transformed rejection with squeeze.
    double const slam = std::sqrt(mean);
    double const loglam = std::log(mean);
    double const b = 0.931 + 2.53 * slam;
    double const a = -0.059 + 0.02483 * b;
    double const inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    double const vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double const u = s.uniform() - 0.5;
        double const v = s.uniform();
        double const us = 0.5 - std::fabs(u);
        double const k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) {
            return detail::saturate(k);
        }
        if (k < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b)
            <= -mean + k * loglam - std::lgamma(k + 1.0)) {
            return detail::saturate(k);
        }
    }
}

//! Standard normal quantile (Acklam's rational approximation, relative error
//! below 1.2e-9).
[[nodiscard]] inline double normal_quantile(double u)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;
    if (u < low) {
        double const q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
               / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - low) {
        double const q = std::sqrt(-2.0 * std::log1p(-u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
               / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double const q = u - 0.5;
    double const r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
           / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

//! Variance above which binomial_inverse switches to the normal quantile.
//! Such draws are at least 10^12 and only arise far beyond any population cap.
inline constexpr double binomial_exact_variance_limit = 1e12;

//! Binomial(trials, p) by inversion of the uniform `u`, searching outward from
//! the mode. Cost is O(sd) per draw.
[[nodiscard]] inline Count binomial_inverse(Count trials, double p, double u)
{
    if (trials == 0 || !(p > 0.0)) {
        return 0;
    }
    if (p >= 1.0) {
        return trials;
    }
    double const n = static_cast<double>(trials);
    if (n * p * (1.0 - p) > binomial_exact_variance_limit) {
        double const x = n * p + normal_quantile(u) * std::sqrt(n * p * (1.0 - p));
        return std::min(trials, detail::saturate(std::nearbyint(x)));
    }
    double const odds = p / (1.0 - p);
    auto const mode = static_cast<Count>(
        std::min(std::floor((n + 1.0) * p), n));
    double const md = static_cast<double>(mode);
    double const log_pmf_mode = std::lgamma(n + 1.0) - std::lgamma(md + 1.0)
                                - std::lgamma(n - md + 1.0) + md * std::log(p)
                                + (n - md) * std::log1p(-p);
    double const pmf_mode = std::exp(log_pmf_mode);

    // Mass strictly below the mode, summed until terms stop registering.
    double below = 0.0;
    {
        double term = pmf_mode;
        for (Count k = mode; k > 0; --k) {
            double const kd = static_cast<double>(k);
            term *= kd / ((n - kd + 1.0) * odds);
            double const next = below + term;
            if (next == below && term < 1e-300 + 1e-18 * pmf_mode) {
                break;
            }
            below = next;
        }
    }

    if (u < below) {
        double cdf = below;
        double term = pmf_mode;
        Count k = mode;
        while (k > 0) {
            double const kd = static_cast<double>(k);
            term *= kd / ((n - kd + 1.0) * odds);  // pmf(k-1)
            cdf -= term;                           // F(k-2)
            --k;
            if (u >= cdf || term == 0.0) {
                return k;
            }
        }
        return 0;
    }

    double cdf = below + pmf_mode;
    double term = pmf_mode;
    Count k = mode;
    while (u >= cdf && k < trials) {
        double const kd = static_cast<double>(k);
        term *= (n - kd) / (kd + 1.0) * odds;
        ++k;
        double const next = cdf + term;
        if (next == cdf && term < 1e-300 + 1e-18 * pmf_mode) {
            break;  // u fell in the rounding gap at the top of the cdf
        }
        cdf = next;
    }
    return k;
}

[[nodiscard]] inline Count binomial_variate(Count trials, double p, Stream& s)
{
    return binomial_inverse(trials, p, s.uniform());
}

}  // namespace bpve
