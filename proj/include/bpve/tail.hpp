// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/tail.hpp
//! Declared tail behaviour of nonnegative series, and its numerical
//! re-verification on the computed range.
//!
//! A finite computation cannot decide whether a series converges. A TailModel
//! is the caller's claim about the terms beyond some index; the claim is
//! checked on [from, horizon] and, when it holds there, combined with the
//! partial sum into a bound on (or a divergence proof for) the whole series.
//!
//! Supported claims, for terms t_n >= 0:
//!   - geometric_ratio: t_{n+1} <= r t_n for n >= from, r < 1.
//!     Tail bound t_H r / (1 - r).
//!   - monotone nonincreasing with exponent p > 1: w_n = (n+1)^p t_n is
//!     nonincreasing for n >= from. Tail bound w_H (H+1)^(1-p) / (p-1).
//!   - monotone nondecreasing with exponent p <= 1: w_n is nondecreasing and
//!     w_H > 0, so t_n >= w_H (n+1)^(-p) and the series diverges.
//! With dyadic_blocks the claim is about block sums over [2^k, 2^(k+1)),
//! indexed by k, instead of the raw terms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace bpve {

struct TailModel
{
    enum class Kind { none, geometric_ratio, monotone };
    enum class Direction { nonincreasing, nondecreasing };

    Kind kind = Kind::none;
    std::size_t from = 0;
    double ratio = 0.0;
    Direction direction = Direction::nonincreasing;
    double exponent = 0.0;
    bool dyadic_blocks = false;

    static TailModel none() { return {}; }
    static TailModel geometric(std::size_t from, double ratio)
    {
        TailModel t;
        t.kind = Kind::geometric_ratio;
        t.from = from;
        t.ratio = ratio;
        return t;
    }
    static TailModel monotone(std::size_t from, Direction direction, double exponent = 0.0)
    {
        TailModel t;
        t.kind = Kind::monotone;
        t.from = from;
        t.direction = direction;
        t.exponent = exponent;
        return t;
    }
    [[nodiscard]] TailModel blocks() const
    {
        TailModel t = *this;
        t.dyadic_blocks = true;
        return t;
    }

    [[nodiscard]] bool declared() const { return kind != Kind::none; }
};

//! Relative slack allowed when re-verifying declared inequalities.
inline constexpr double tail_check_tolerance = 1e-12;

struct TailCheck
{
    bool holds = false;
    //! Convergent: log of the bound on the sum of the unseen terms.
    double log_tail_bound = std::numeric_limits<double>::infinity();
    std::string reason;
};

namespace detail {

inline double log_add_exp(double a, double b)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (a == neg_inf) {
        return b;
    }
    if (b == neg_inf) {
        return a;
    }
    double const hi = a > b ? a : b;
    double const lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

//! Log block sums over [2^k, 2^(k+1)) of log-terms indexed from `first`.
//! Only blocks lying entirely inside the computed range are returned; index k
//! of the output is block k.
inline std::vector<double> dyadic_block_sums(std::vector<double> const& log_terms,
                                             std::size_t first)
{
    std::size_t const last = first + log_terms.size();  // one past
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        std::size_t const lo = std::size_t{1} << k;
        std::size_t const hi = std::size_t{1} << (k + 1);
        if (hi > last || k > 60) {
            break;
        }
        double acc = -std::numeric_limits<double>::infinity();
        if (lo >= first) {
            for (std::size_t n = lo; n < hi; ++n) {
                acc = log_add_exp(acc, log_terms[n - first]);
            }
        }
        out.push_back(acc);
    }
    return out;
}

struct Indexed
{
    std::vector<double> log_terms;
    std::size_t first = 0;
};

inline Indexed view(std::vector<double> const& log_terms, std::size_t first, bool blocks)
{
    if (!blocks) {
        return {log_terms, first};
    }
    return {dyadic_block_sums(log_terms, first), 0};
}

}  // namespace detail

//! Checks a convergence claim for the series with terms exp(log_terms[t]) at
//! index first + t. The returned bound covers terms beyond the last index
//! (beyond the last complete block with dyadic_blocks; the caller adds the
//! partial block itself).
[[nodiscard]] inline TailCheck certify_convergent(std::vector<double> const& log_terms,
                                                  std::size_t first, TailModel const& model)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    TailCheck out;
    if (!model.declared()) {
        out.reason = "no tail model declared";
        return out;
    }
    auto const v = detail::view(log_terms, first, model.dyadic_blocks);
    std::size_t const count = v.log_terms.size();
    std::size_t const from = std::max(model.from, v.first);
    if (count == 0 || from >= v.first + count) {
        out.reason = "tail model start lies beyond the computed range";
        return out;
    }
    std::size_t const h = v.first + count - 1;
    auto term = [&](std::size_t n) { return v.log_terms[n - v.first]; };
    double const slack = std::log1p(tail_check_tolerance);

    if (model.kind == TailModel::Kind::geometric_ratio) {
        if (!(model.ratio > 0.0 && model.ratio < 1.0)) {
            out.reason = "geometric tail needs a ratio in (0,1)";
            return out;
        }
        double const log_r = std::log(model.ratio);
        for (std::size_t n = from; n < h; ++n) {
            double const a = term(n);
            double const b = term(n + 1);
            if (b == neg_inf) {
                continue;
            }
            if (a == neg_inf || b - a > log_r + slack) {
                out.reason = "ratio bound fails at n = " + std::to_string(n);
                return out;
            }
        }
        out.holds = true;
        out.log_tail_bound = term(h) + log_r - std::log1p(-model.ratio);
        return out;
    }

    if (model.direction != TailModel::Direction::nonincreasing || !(model.exponent > 1.0)) {
        out.reason = "convergence needs a nonincreasing monotone model with exponent > 1";
        return out;
    }
    double const p = model.exponent;
    auto weighted = [&](std::size_t n) {
        return term(n) + p * std::log(static_cast<double>(n) + 1.0);
    };
    for (std::size_t n = from; n < h; ++n) {
        double const a = weighted(n);
        double const b = weighted(n + 1);
        if (b == neg_inf) {
            continue;
        }
        if (a == neg_inf || b > a + slack) {
            out.reason = "weighted terms increase at n = " + std::to_string(n);
            return out;
        }
    }
    out.holds = true;
    out.log_tail_bound =
        weighted(h) + (1.0 - p) * std::log(static_cast<double>(h) + 1.0) - std::log(p - 1.0);
    return out;
}

//! Checks a divergence claim (monotone nondecreasing, exponent <= 1).
[[nodiscard]] inline TailCheck certify_divergent(std::vector<double> const& log_terms,
                                                 std::size_t first, TailModel const& model)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    TailCheck out;
    if (!model.declared()) {
        out.reason = "no tail model declared";
        return out;
    }
    if (model.kind != TailModel::Kind::monotone
        || model.direction != TailModel::Direction::nondecreasing || model.exponent > 1.0) {
        out.reason = "divergence needs a nondecreasing monotone model with exponent <= 1";
        return out;
    }
    auto const v = detail::view(log_terms, first, model.dyadic_blocks);
    std::size_t const count = v.log_terms.size();
    std::size_t const from = std::max(model.from, v.first);
    if (count == 0 || from >= v.first + count) {
        out.reason = "tail model start lies beyond the computed range";
        return out;
    }
    std::size_t const h = v.first + count - 1;
    double const slack = std::log1p(tail_check_tolerance);
    auto weighted = [&](std::size_t n) {
        return v.log_terms[n - v.first] + model.exponent * std::log(static_cast<double>(n) + 1.0);
    };
    for (std::size_t n = from; n < h; ++n) {
        double const a = weighted(n);
        double const b = weighted(n + 1);
        if (a == neg_inf) {
            continue;
        }
        if (b == neg_inf || b < a - slack) {
            out.reason = "weighted terms decrease at n = " + std::to_string(n);
            return out;
        }
    }
    if (weighted(h) == neg_inf || std::isnan(weighted(h))) {
        out.reason = "terms vanish at the horizon";
        return out;
    }
    out.holds = true;
    out.log_tail_bound = std::numeric_limits<double>::infinity();
    return out;
}

//! Checks that the sequence `values` (indexed from `first`) is monotone in
//! the declared direction on [from, end]. Used for claims about sequences
//! rather than series terms.
[[nodiscard]] inline TailCheck certify_monotone_sequence(std::vector<double> const& values,
                                                         std::size_t first,
                                                         TailModel const& model)
{
    TailCheck out;
    if (model.kind != TailModel::Kind::monotone) {
        out.reason = "no monotone model declared";
        return out;
    }
    std::size_t const count = values.size();
    std::size_t const from = std::max(model.from, first);
    if (count == 0 || from >= first + count) {
        out.reason = "tail model start lies beyond the computed range";
        return out;
    }
    for (std::size_t n = from; n + 1 < first + count; ++n) {
        double const a = values[n - first];
        double const b = values[n + 1 - first];
        double const tol = tail_check_tolerance * std::max(1.0, std::fabs(a));
        bool const bad = model.direction == TailModel::Direction::nondecreasing ? b < a - tol
                                                                                : b > a + tol;
        if (bad || std::isnan(b)) {
            out.reason = "sequence is not monotone at n = " + std::to_string(n);
            return out;
        }
    }
    out.holds = true;
    return out;
}

}  // namespace bpve
