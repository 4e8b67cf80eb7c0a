// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/genfun.hpp
//! Generating-function analysis of a schedule: finite-horizon extinction
//! curves, the two-moment fractional-linear upper bound on a pgf, beta
//! sequences and survival certificates q(n) = 1 - 1/b_n for the associated
//! branching random walk on the generation index.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "laws.hpp"
#include "schedule.hpp"

namespace bpve {

struct ExtinctionCurve
{
    std::size_t horizon = 0;
    //! e[j] = P(extinct by generation N | one particle at generation j)
    std::vector<double> values;
    //! e_N[0] - e_{N/2}[0]
    double gap = 0.0;

    //! The extinction probability from generation 0 lies in [lower(), 1].
    [[nodiscard]] double lower() const { return values.front(); }
};

namespace detail {

inline double extinction_from_zero(Schedule const& schedule, std::size_t horizon)
{
    double e = 0.0;
    for (std::size_t j = horizon; j-- > 0;) {
        e = schedule.law(j).pgf(e);
    }
    return e;
}

}  // namespace detail

//! Backward recursion e[N] = 0, e[j] = Phi_j(e[j+1]).
[[nodiscard]] inline ExtinctionCurve extinction_curve(Schedule const& schedule,
                                                      std::size_t horizon)
{
    if (horizon < 1) {
        throw std::invalid_argument("extinction curve horizon must be at least 1");
    }
    ExtinctionCurve curve;
    curve.horizon = horizon;
    curve.values.assign(horizon + 1, 0.0);
    for (std::size_t j = horizon; j-- > 0;) {
        curve.values[j] = schedule.law(j).pgf(curve.values[j + 1]);
    }
    curve.gap = curve.values[0] - detail::extinction_from_zero(schedule, horizon / 2);
    return curve;
}

//! f(x) = 1 - b/(1-c) + b x/(1-c x) with b = m^3/m2^2, c = (m2-m)/m2.
struct AgrestiBound
{
    double b = 0.0;
    double c = 0.0;
    //! m^2 / m2 = b / (1 - c), kept separately for accuracy when c ~ 1
    double scale = 0.0;
};

[[nodiscard]] inline AgrestiBound agresti_bound(OffspringLaw const& law)
{
    double const log_m = law.log_mean();
    double const log_m2 = law.log_second_moment();
    if (!std::isfinite(log_m2)) {
        throw OverflowError("second moment is not representable");
    }
    AgrestiBound out;
    out.b = std::exp(3.0 * log_m - 2.0 * log_m2);
    out.c = -std::expm1(log_m - log_m2);
    out.scale = std::exp(2.0 * log_m - log_m2);
    return out;
}

[[nodiscard]] inline double agresti_eval(AgrestiBound const& f, double x)
{
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("bound argument must lie in [0,1]");
    }
    // 1 - (m^2/m2) (1-x) / (1-cx)
    return 1.0 - f.scale * (1.0 - x) / (1.0 - f.c * x);
}

//! xi(s) = s/m + (m2 - m)/m^2, the map with f(x) = 1 - 1/xi(1/(1-x)).
[[nodiscard]] inline double xi(OffspringLaw const& law, double s)
{
    return s * std::exp(-law.log_mean()) + std::exp(law.log_excess());
}

struct BetaSequence
{
    std::size_t anchor = 0;
    //! Entry t refers to l = anchor + t.
    std::vector<double> partial_sums;  // S_{n,l}
    std::vector<double> beta;          // beta_{n,l}
    std::vector<double> log_beta;
    //! log prod_{i=n}^{l} m_i
    std::vector<double> log_product;

    [[nodiscard]] std::size_t last() const { return anchor + beta.size() - 1; }
};

//! beta_{n,l} = S_{n,l} + (prod_{i=n}^l m_i)^{-1} for l = n..n+length, with
//! S_{n,l} = sum_{j=n}^l (m2_j - m_j)/m_j (prod_{i=n}^j m_i)^{-1}.
[[nodiscard]] inline BetaSequence beta_sequence(Schedule const& schedule, std::size_t anchor,
                                                std::size_t length)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    BetaSequence seq;
    seq.anchor = anchor;
    seq.partial_sums.reserve(length + 1);
    seq.beta.reserve(length + 1);
    seq.log_beta.reserve(length + 1);
    seq.log_product.reserve(length + 1);

    double log_prev_product = 0.0;  // log prod_{i=n}^{j-1} m_i
    double log_s = neg_inf;
    for (std::size_t t = 0; t <= length; ++t) {
        OffspringLaw const law = schedule.law(anchor + t);
        // (m2_j - m_j)/m_j / prod_{i=n}^{j} m_i = excess_j / prod_{i=n}^{j-1} m_i
        log_s = OffspringLaw::log_add(log_s, law.log_excess() - log_prev_product);
        double const log_product = log_prev_product + law.log_mean();
        if (!std::isfinite(log_product) || std::isnan(log_s)) {
            throw OverflowError("running product leaves log-space at l = "
                                + std::to_string(anchor + t));
        }
        double const log_beta = OffspringLaw::log_add(log_s, -log_product);
        seq.partial_sums.push_back(std::exp(log_s));
        seq.log_beta.push_back(log_beta);
        seq.beta.push_back(std::exp(log_beta));
        seq.log_product.push_back(log_product);
        log_prev_product = log_product;
    }
    return seq;
}

struct SurvivalCertificate
{
    std::size_t n0 = 0;
    std::size_t horizon = 0;  // K
    double tolerance = 1e-10;
    //! Entry t refers to n = n0 + t, for n = n0..K.
    std::vector<double> b;
    std::vector<double> log_b;
    std::vector<double> q;
    //! slack[t] = q[n] - Phi_n(q[n+1]) for n = n0..K-1
    std::vector<double> slack;
    //! (beta_{n0,K} - beta_{n0,K-1}) / beta_{n0,K}
    double truncation = 0.0;
    bool valid = false;

    [[nodiscard]] double worst_slack() const
    {
        return slack.empty() ? 0.0 : *std::min_element(slack.begin(), slack.end());
    }
    [[nodiscard]] double q_at(std::size_t n) const { return q.at(n - n0); }
};

[[nodiscard]] inline std::size_t default_certificate_horizon(std::size_t n0)
{
    return 10 * n0 + 200;
}

//! Builds q(n) = 1 - 1/beta_{n,K} by the exact backward recursion
//! beta_{n,K} = xi_n(beta_{n+1,K}), beta_{K,K} = m2_K/m_K^2.
//!
//! The certificate is VALID when every slack is >= -tolerance, q(n0) < 1 and
//! the last increment of beta_{n0,.} relative to beta_{n0,K} is at most the
//! tolerance, so that the truncated sequence is a faithful stand-in for the
//! limit b_n beyond the covered range.
[[nodiscard]] inline SurvivalCertificate
build_survival_certificate(Schedule const& schedule, std::size_t n0, std::size_t horizon = 0,
                           double tolerance = 1e-10)
{
    if (horizon == 0) {
        horizon = default_certificate_horizon(n0);
    }
    if (horizon <= n0) {
        throw std::invalid_argument("certificate horizon must exceed n0");
    }
    std::size_t const size = horizon - n0 + 1;
    std::vector<OffspringLaw> laws;
    laws.reserve(size);
    for (std::size_t n = n0; n <= horizon; ++n) {
        laws.push_back(schedule.law(n));
    }

    SurvivalCertificate cert;
    cert.n0 = n0;
    cert.horizon = horizon;
    cert.tolerance = tolerance;
    cert.log_b.assign(size, 0.0);
    cert.log_b[size - 1] = laws[size - 1].log_second_ratio();
    for (std::size_t t = size - 1; t-- > 0;) {
        cert.log_b[t] = OffspringLaw::log_add(cert.log_b[t + 1] - laws[t].log_mean(),
                                              laws[t].log_excess());
    }
    cert.b.resize(size);
    cert.q.resize(size);
    for (std::size_t t = 0; t < size; ++t) {
        cert.b[t] = std::exp(cert.log_b[t]);
        cert.q[t] = -std::expm1(-cert.log_b[t]);
    }
    cert.slack.resize(size - 1);
    for (std::size_t t = 0; t + 1 < size; ++t) {
        cert.slack[t] = cert.q[t] - laws[t].pgf(cert.q[t + 1]);
    }

    // beta_{n0,K} - beta_{n0,K-1} = (m2_K/m_K^2 - 1) / prod_{i=n0}^{K-1} m_i
    double log_prefix = 0.0;
    for (std::size_t t = 0; t + 1 < size; ++t) {
        log_prefix += laws[t].log_mean();
    }
    double const ratio = std::exp(laws[size - 1].log_second_ratio());
    double const log_increment = std::log(std::max(ratio - 1.0, 0.0)) - log_prefix;
    cert.truncation = std::exp(log_increment - cert.log_b[0]);

    bool const slack_ok = cert.worst_slack() >= -tolerance;
    bool const strict = cert.q[0] < 1.0;
    bool const truncated_ok = !(cert.truncation > tolerance);
    cert.valid = slack_ok && strict && truncated_ok && std::isfinite(cert.log_b[0]);
    return cert;
}

struct CertificateCheck
{
    bool ok = false;
    double worst_slack = 0.0;
    std::size_t worst_index = 0;
};

//! Recomputes every slack from q alone.
[[nodiscard]] inline CertificateCheck verify_certificate(Schedule const& schedule,
                                                         SurvivalCertificate const& cert)
{
    CertificateCheck out;
    if (cert.q.empty()) {
        return out;
    }
    bool in_range = true;
    out.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < cert.q.size(); ++t) {
        double const q = cert.q[t];
        if (!(q >= 0.0 && q <= 1.0)) {
            in_range = false;
            continue;
        }
        if (t + 1 < cert.q.size()) {
            double const next = cert.q[t + 1];
            if (!(next >= 0.0 && next <= 1.0)) {
                continue;
            }
            double const s = q - schedule.law(cert.n0 + t).pgf(next);
            if (s < out.worst_slack) {
                out.worst_slack = s;
                out.worst_index = cert.n0 + t;
            }
        }
    }
    if (cert.q.size() == 1) {
        out.worst_slack = 0.0;
    }
    out.ok = in_range && cert.q.front() < 1.0 && out.worst_slack >= -cert.tolerance;
    return out;
}

}  // namespace bpve
