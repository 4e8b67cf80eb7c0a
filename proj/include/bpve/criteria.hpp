// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/criteria.hpp
//! Survival and extinction criteria for branching processes in varying
//! environment (BPVE) and their selection variant (BPWS), each returning a
//! three-valued Verdict.
//!
//! Qualifiers:
//!   - Certified: the finite computation together with a TailModel that was
//!     re-verified on the computed range proves the outcome.
//!   - AtHorizon: the outcome is what the computed range indicates (a series
//!     that stopped moving, a log-product below the underflow threshold, a
//!     root-test inequality on the second half of the range).
//!
//! Criterion tags:
//!   prop_main0ext         inf prod m_i = 0                      -> BPVE extinct
//!   thm_main0             bounded beta_{n,.}                     -> BPVE survives
//!   cor_main0_1..4        series / root-test / g-ratio / kM^n    -> BPVE survives
//!   prop_bpws_extinction  liminf prod m_i / (n+n0+1)! = 0        -> BPWS extinct
//!   thm_main1             witness c_i, C                         -> BPWS survives locally
//!   cor_main1_1..4        witness analogues of cor_main0         -> BPWS survives locally

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "genfun.hpp"
#include "laws.hpp"
#include "param_function.hpp"
#include "schedule.hpp"
#include "tail.hpp"

namespace bpve {

enum class Outcome { extinct, survives, inconclusive };
enum class Qualifier { certified, at_horizon };
enum class Process { bpve, bpws };

[[nodiscard]] inline char const* to_string(Outcome o) noexcept
{
    switch (o) {
    case Outcome::extinct: return "Extinct";
    case Outcome::survives: return "Survives";
    case Outcome::inconclusive: return "Inconclusive";
    }
    return "?";
}

[[nodiscard]] inline char const* to_string(Qualifier q) noexcept
{
    return q == Qualifier::certified ? "Certified" : "AtHorizon";
}

[[nodiscard]] inline char const* to_string(Process p) noexcept
{
    return p == Process::bpve ? "bpve" : "bpws";
}

struct Evidence
{
    std::map<std::string, double> values;
    //! Partial sums and running quantities, indexed from trace_first.
    std::map<std::string, std::vector<double>> traces;
    std::size_t trace_first = 0;
    std::optional<SurvivalCertificate> certificate;
    std::vector<std::string> notes;
};

struct Verdict
{
    std::string criterion;
    Process process = Process::bpve;
    Outcome outcome = Outcome::inconclusive;
    Qualifier qualifier = Qualifier::at_horizon;
    std::size_t horizon = 0;
    Evidence evidence;
};

//! A Certified Extinct and a Certified Survives verdict for the same process.
class ContradictionError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

struct CriteriaOptions
{
    std::size_t horizon = 10000;
    //! Relative increment over the last 10% of indices below which a series
    //! counts as stabilized.
    double stabilization = 1e-12;
    //! Log-product level treated as "tends to minus infinity" at the horizon.
    double divergence_threshold = -700.0;
    //! Survival certificate: horizon K (0 = 10 n0 + 200) and slack tolerance.
    std::size_t certificate_horizon = 0;
    double certificate_tolerance = 1e-10;
};

struct Main1Witness
{
    ParamFunction c = ParamFunction::constant(1.0);
    double C = 1.0;
};

//! Declared tails for the three parts of the local-survival criterion.
struct Main1Tails
{
    TailModel witness_series;     // sum c_i / m_i
    TailModel dispersion_series;  // sum (m2_j - m_j)/m_j^2 (C^j prod c_i)^{-1}
    TailModel growth;             // C^n prod_{j<=n} c_j (monotone nondecreasing)
};

//! Parameters for the root-test style variants 3 and 4.
struct RootTestParams
{
    std::optional<ParamFunction> g;
    double M = 1.0;
    double k = 1.0;
};

inline std::vector<double> const default_C_search{1.5, 2.0, 4.0};

//! Largest truncation horizon check_main0 tries when building a certificate.
inline constexpr std::size_t max_certificate_horizon = std::size_t{1} << 20;

namespace detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

struct Moments
{
    std::size_t first = 0;
    std::vector<double> log_m;
    std::vector<double> log_excess;  // log((m2 - m)/m^2)
    std::vector<double> log_ratio;   // log(m2/m^2)

    [[nodiscard]] double lm(std::size_t n) const { return log_m[n - first]; }
    [[nodiscard]] double le(std::size_t n) const { return log_excess[n - first]; }
    [[nodiscard]] double lr(std::size_t n) const { return log_ratio[n - first]; }
};

inline Moments moments(Schedule const& schedule, std::size_t first, std::size_t last)
{
    Moments out;
    out.first = first;
    std::size_t const size = last - first + 1;
    out.log_m.reserve(size);
    out.log_excess.reserve(size);
    out.log_ratio.reserve(size);
    for (std::size_t n = first; n <= last; ++n) {
        OffspringLaw const law = schedule.law(n);
        out.log_m.push_back(law.log_mean());
        out.log_excess.push_back(law.log_excess());
        out.log_ratio.push_back(law.log_second_ratio());
    }
    return out;
}

enum class SeriesStatus { certified, stabilized, open };

struct SeriesSummary
{
    std::vector<double> log_partial;
    double log_sum = neg_inf;
    double relative_increment = 0.0;
    SeriesStatus status = SeriesStatus::open;
    TailCheck tail;
};

//! Partial sums of a nonnegative series given by log-terms, plus its
//! convergence status under `tail`.
inline SeriesSummary convergent_series(std::vector<double> const& log_terms, std::size_t first,
                                       TailModel const& tail, double stabilization)
{
    SeriesSummary out;
    out.log_partial.reserve(log_terms.size());
    double acc = neg_inf;
    for (double t : log_terms) {
        acc = log_add_exp(acc, t);
        out.log_partial.push_back(acc);
    }
    out.log_sum = acc;
    if (log_terms.empty()) {
        out.status = SeriesStatus::stabilized;
        return out;
    }
    std::size_t const last = log_terms.size() - 1;
    auto const mark = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(last)));
    if (acc != neg_inf && std::isfinite(acc)) {
        out.relative_increment = -std::expm1(out.log_partial[mark] - acc);
    } else if (acc != neg_inf) {
        out.relative_increment = std::numeric_limits<double>::infinity();
    }
    out.tail = certify_convergent(log_terms, first, tail);
    if (out.tail.holds && acc < std::numeric_limits<double>::infinity()) {
        out.status = SeriesStatus::certified;
    } else if (out.relative_increment < stabilization) {
        out.status = SeriesStatus::stabilized;
    }
    return out;
}

inline void record_series(Evidence& ev, std::string const& name, SeriesSummary const& s)
{
    ev.values[name + ".log_partial_sum"] = s.log_sum;
    ev.values[name + ".relative_increment"] = s.relative_increment;
    if (s.tail.holds) {
        ev.values[name + ".log_total_bound"] = log_add_exp(s.log_sum, s.tail.log_tail_bound);
    } else if (!s.tail.reason.empty()) {
        ev.notes.push_back(name + ": " + s.tail.reason);
    }
    ev.traces[name + ".log_partial_sums"] = s.log_partial;
}

inline Verdict make(std::string criterion, Process process, std::size_t horizon)
{
    Verdict v;
    v.criterion = std::move(criterion);
    v.process = process;
    v.horizon = horizon;
    return v;
}

inline void settle(Verdict& v, Outcome outcome, bool certified)
{
    v.outcome = outcome;
    v.qualifier = certified ? Qualifier::certified : Qualifier::at_horizon;
}

inline double window_max(std::vector<double> const& xs, std::size_t first, std::size_t lo,
                         std::size_t hi)
{
    double out = neg_inf;
    for (std::size_t n = lo; n <= hi; ++n) {
        out = std::max(out, xs[n - first]);
    }
    return out;
}

inline double window_min(std::vector<double> const& xs, std::size_t first, std::size_t lo,
                         std::size_t hi)
{
    double out = std::numeric_limits<double>::infinity();
    for (std::size_t n = lo; n <= hi; ++n) {
        out = std::min(out, xs[n - first]);
    }
    return out;
}

//! Root-test comparison limsup A_n < liminf B_n, optionally with the
//! domination sequence D_n = log g(n) - log(m2_n/m_n^2) that must stay >= 0.
//! Sequences are indexed from 1 to H.
struct RootTest
{
    std::vector<double> a;
    std::vector<double> b;
    std::optional<std::vector<double>> d;
};

struct RootTestResult
{
    bool at_horizon = false;
    bool certified = false;
};

inline RootTestResult evaluate_root_test(RootTest const& rt, std::size_t horizon,
                                         TailModel const& tail, Evidence& ev)
{
    RootTestResult out;
    std::size_t const lo = std::max<std::size_t>(1, horizon / 2);
    double const sup_a = window_max(rt.a, 1, lo, horizon);
    double const inf_b = window_min(rt.b, 1, lo, horizon);
    ev.values["limsup_lhs"] = sup_a;
    ev.values["liminf_rhs"] = inf_b;
    ev.traces["lhs"] = rt.a;
    ev.traces["rhs"] = rt.b;
    ev.trace_first = 1;
    bool dominated = true;
    if (rt.d) {
        double const worst = window_min(*rt.d, 1, lo, horizon);
        ev.values["domination_margin"] = worst;
        dominated = worst >= -1e-12;
        if (!dominated) {
            ev.notes.push_back("m2/m^2 exceeds g on the second half of the horizon");
        }
    }
    out.at_horizon = dominated && sup_a < inf_b;

    if (!tail.declared()) {
        return out;
    }
    std::size_t const from = std::max<std::size_t>(tail.from, 1);
    if (tail.kind != TailModel::Kind::monotone || from > horizon) {
        ev.notes.push_back("root test certification needs a monotone tail model");
        return out;
    }
    TailModel dec = TailModel::monotone(from, TailModel::Direction::nonincreasing);
    TailModel inc = TailModel::monotone(from, TailModel::Direction::nondecreasing);
    TailCheck const ca = certify_monotone_sequence(rt.a, 1, dec);
    TailCheck const cb = certify_monotone_sequence(rt.b, 1, inc);
    bool ok = ca.holds && cb.holds && rt.a.back() < rt.b.back();
    if (!ca.holds) {
        ev.notes.push_back("lhs: " + ca.reason);
    }
    if (!cb.holds) {
        ev.notes.push_back("rhs: " + cb.reason);
    }
    if (rt.d) {
        TailCheck const cd = certify_monotone_sequence(*rt.d, 1, inc);
        double const dmin = window_min(*rt.d, 1, from, horizon);
        ok = ok && cd.holds && dmin >= -1e-12;
        if (!cd.holds) {
            ev.notes.push_back("domination: " + cd.reason);
        }
    }
    out.certified = ok;
    return out;
}

//! Shared series part of the variant-1 style criteria:
//! sum_{j>=n} exp(log_weight_j) (C^j prod_{i=n}^{j-1} c_i)^{-1}.
inline std::vector<double> weighted_series_terms(Moments const& mom, std::size_t anchor,
                                                 std::size_t horizon, bool excess,
                                                 ParamFunction const* c, double log_C)
{
    std::vector<double> terms;
    terms.reserve(horizon - anchor + 1);
    double log_prod = 0.0;  // prod_{i=n}^{j-1} (m_i or c_i)
    for (std::size_t j = anchor; j <= horizon; ++j) {
        double const weight = excess ? mom.le(j) : mom.lr(j);
        double const scale = c != nullptr ? static_cast<double>(j) * log_C : 0.0;
        terms.push_back(weight - scale - log_prod);
        log_prod += c != nullptr ? c->log_value(j) : mom.lm(j);
    }
    return terms;
}

}  // namespace detail

//! inf_n prod_{i<=n} m_i = 0 implies extinction.
[[nodiscard]] inline Verdict check_prodm_extinction(Schedule const& schedule,
                                                    CriteriaOptions const& opt = {},
                                                    TailModel const& tail = {})
{
    std::size_t const h = std::max<std::size_t>(opt.horizon, 1);
    Verdict v = detail::make("prop_main0ext", Process::bpve, h);
    auto const mom = detail::moments(schedule, 0, h);

    std::vector<double> log_product(h + 1);
    std::vector<double> neg_log_m(h + 1);  // log(-log m_n), -inf when m_n >= 1
    double acc = 0.0;
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n <= h; ++n) {
        acc += mom.lm(n);
        log_product[n] = acc;
        running_min = std::min(running_min, acc);
        neg_log_m[n] = mom.lm(n) < 0.0 ? std::log(-mom.lm(n)) : detail::neg_inf;
    }
    v.evidence.values["log_product"] = acc;
    v.evidence.values["running_min"] = running_min;
    v.evidence.traces["log_product"] = log_product;

    TailCheck const check = certify_divergent(neg_log_m, 0, tail);
    if (check.holds) {
        detail::settle(v, Outcome::extinct, true);
        v.evidence.notes.push_back("sum of -log m_n diverges under the verified tail model");
        return v;
    }
    if (tail.declared()) {
        v.evidence.notes.push_back(check.reason);
    }
    if (running_min <= opt.divergence_threshold) {
        detail::settle(v, Outcome::extinct, false);
    }
    return v;
}

//! Bounded beta_{n,.} implies survival.
[[nodiscard]] inline Verdict check_main0(Schedule const& schedule, std::size_t anchor = 0,
                                         CriteriaOptions const& opt = {},
                                         TailModel const& tail = {})
{
    std::size_t const h = std::max(opt.horizon, anchor + 1);
    Verdict v = detail::make("thm_main0", Process::bpve, h);
    BetaSequence const beta = beta_sequence(schedule, anchor, h - anchor);
    auto const mom = detail::moments(schedule, anchor, h);

    // beta_{n,l} - beta_{n,l-1} = (m2_l/m_l^2 - 1) / prod_{i=n}^{l-1} m_i
    std::vector<double> increments;
    increments.reserve(h - anchor);
    for (std::size_t l = anchor + 1; l <= h; ++l) {
        double const excess_ratio = std::expm1(mom.lr(l));
        double const lead = excess_ratio > 0.0 ? std::log(excess_ratio) : detail::neg_inf;
        increments.push_back(lead - beta.log_product[l - 1 - anchor]);
    }
    auto const series = detail::convergent_series(increments, anchor + 1, tail, opt.stabilization);
    double const log_b0 = beta.log_beta.front();
    double const log_bh = beta.log_beta.back();
    std::size_t const mark = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(h - anchor)));
    double const rel = -std::expm1(beta.log_beta[mark] - log_bh);

    v.evidence.values["anchor"] = static_cast<double>(anchor);
    v.evidence.values["log_beta_first"] = log_b0;
    v.evidence.values["log_beta"] = log_bh;
    v.evidence.values["relative_increment"] = rel;
    v.evidence.traces["log_beta"] = beta.log_beta;
    v.evidence.trace_first = anchor;
    if (series.tail.holds) {
        v.evidence.values["log_beta_bound"] =
            detail::log_add_exp(log_bh, series.tail.log_tail_bound);
    } else if (tail.declared()) {
        v.evidence.notes.push_back(series.tail.reason);
    }

    bool const certified = series.status == detail::SeriesStatus::certified;
    bool const stabilized = std::isfinite(log_bh) && rel < opt.stabilization;
    if (!certified && !stabilized) {
        return v;
    }
    SurvivalCertificate cert = build_survival_certificate(
        schedule, anchor, opt.certificate_horizon, opt.certificate_tolerance);
    if (!cert.valid && opt.certificate_horizon == 0) {
        // Slowly converging beta sequences need a longer truncation.
        std::size_t K = std::max(h, cert.horizon * 4);
        while (K <= max_certificate_horizon) {
            try {
                SurvivalCertificate next =
                    build_survival_certificate(schedule, anchor, K, opt.certificate_tolerance);
                bool const truncation_only = next.truncation > next.tolerance
                                             && next.worst_slack() >= -next.tolerance;
                cert = std::move(next);
                if (cert.valid || !truncation_only) {
                    break;
                }
            } catch (OverflowError const&) {
                break;
            } catch (LawError const&) {
                break;
            }
            K *= 4;
        }
    }
    v.evidence.values["certificate_worst_slack"] = cert.worst_slack();
    v.evidence.values["certificate_q0"] = cert.q.front();
    bool const valid = cert.valid;
    v.evidence.certificate = std::move(cert);
    if (!valid) {
        v.evidence.notes.push_back("beta sequence looks bounded but no valid certificate was built");
        return v;
    }
    detail::settle(v, Outcome::survives, certified);
    return v;
}

//! Corollary variants 1-4 of the beta criterion.
[[nodiscard]] inline Verdict check_cor_main0(Schedule const& schedule, int variant,
                                             RootTestParams const& params = {},
                                             std::size_t anchor = 0,
                                             CriteriaOptions const& opt = {},
                                             TailModel const& tail = {})
{
    if (variant < 1 || variant > 4) {
        throw std::invalid_argument("corollary variant must be 1..4");
    }
    std::size_t const h = std::max<std::size_t>(opt.horizon, anchor + 2);
    Verdict v = detail::make("cor_main0_" + std::to_string(variant), Process::bpve, h);

    if (variant == 1) {
        auto const mom = detail::moments(schedule, anchor, h);
        auto const terms = detail::weighted_series_terms(mom, anchor, h, false, nullptr, 0.0);
        auto const s = detail::convergent_series(terms, anchor, tail, opt.stabilization);
        detail::record_series(v.evidence, "series", s);
        v.evidence.trace_first = anchor;
        if (s.status != detail::SeriesStatus::open) {
            detail::settle(v, Outcome::survives, s.status == detail::SeriesStatus::certified);
        }
        return v;
    }

    auto const mom = detail::moments(schedule, 0, h);
    detail::RootTest rt;
    rt.a.resize(h);
    rt.b.resize(h);
    double log_prod = 0.0;
    for (std::size_t n = 1; n <= h; ++n) {
        log_prod += mom.lm(n - 1);
        double const nd = static_cast<double>(n);
        rt.b[n - 1] = log_prod / nd;
        rt.a[n - 1] = mom.lr(n) / nd;
    }
    if (variant == 2) {
        auto const r = detail::evaluate_root_test(rt, h, tail, v.evidence);
        if (r.at_horizon || r.certified) {
            detail::settle(v, Outcome::survives, r.certified);
        }
        return v;
    }

    ParamFunction g = ParamFunction::constant(1.0);
    if (variant == 3) {
        if (!params.g) {
            throw std::invalid_argument("variant 3 needs a comparison function g");
        }
        g = *params.g;
    } else {
        if (!(params.M >= 1.0 && params.k >= 1.0)) {
            throw std::invalid_argument("variant 4 needs M, k >= 1");
        }
        g = ParamFunction::exponential(params.k, params.M);
        // m_n -> infinity, judged on the computed range.
        double const early = detail::window_max(mom.log_m, 0, 0, h / 4);
        double const late = detail::window_min(mom.log_m, 0, h / 2, h);
        v.evidence.values["log_m_early_max"] = early;
        v.evidence.values["log_m_late_min"] = late;
        if (!(late > early)) {
            v.evidence.notes.push_back("m_n does not grow over the horizon");
            return v;
        }
    }
    // A_n := log(g(n+1)/g(n)) replaces the n-th root of m2/m^2.
    std::vector<double> d(h);
    for (std::size_t n = 1; n <= h; ++n) {
        double const lg = g.log_value(n);
        if (lg < -1e-12) {
            v.evidence.notes.push_back("g drops below 1 at n = " + std::to_string(n));
            return v;
        }
        rt.a[n - 1] = g.log_value(n + 1) - lg;
        d[n - 1] = lg - mom.lr(n);
    }
    rt.d = std::move(d);
    auto const r = detail::evaluate_root_test(rt, h, tail, v.evidence);
    if (r.at_horizon || r.certified) {
        detail::settle(v, Outcome::survives, r.certified);
    }
    return v;
}

//! liminf prod_{i<n} m_i / (n+n0+1)! = 0 implies BPWS extinction from every
//! starting label.
[[nodiscard]] inline Verdict check_bpws_extinction(Schedule const& schedule, std::size_t n0 = 0,
                                                   CriteriaOptions const& opt = {},
                                                   TailModel const& tail = {})
{
    std::size_t const h = std::max<std::size_t>(opt.horizon, 1);
    Verdict v = detail::make("prop_bpws_extinction", Process::bpws, h);
    auto const mom = detail::moments(schedule, 0, h);
    double const shift = static_cast<double>(n0);

    std::vector<double> log_ratio(h + 1);
    std::vector<double> gaps(h + 1);  // log of log(n+n0+2) - log m_n
    double log_prod = 0.0;
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n <= h; ++n) {
        double const nd = static_cast<double>(n);
        log_ratio[n] = log_prod - std::lgamma(nd + shift + 2.0);
        running_min = std::min(running_min, log_ratio[n]);
        double const gap = std::log(nd + shift + 2.0) - mom.lm(n);
        gaps[n] = gap > 0.0 ? std::log(gap) : detail::neg_inf;
        log_prod += mom.lm(n);
    }
    v.evidence.values["n0"] = shift;
    v.evidence.values["log_ratio"] = log_ratio.back();
    v.evidence.values["running_min"] = running_min;
    v.evidence.traces["log_ratio"] = log_ratio;

    TailCheck const check = certify_divergent(gaps, 0, tail);
    if (check.holds) {
        detail::settle(v, Outcome::extinct, true);
        return v;
    }
    if (tail.declared()) {
        v.evidence.notes.push_back(check.reason);
    }
    if (running_min <= opt.divergence_threshold) {
        detail::settle(v, Outcome::extinct, false);
    }
    return v;
}

namespace detail {

//! sum_i c_i / m_i, from i = 0.
inline SeriesSummary witness_series(Moments const& mom, ParamFunction const& c, std::size_t h,
                                    TailModel const& tail, double stabilization)
{
    std::vector<double> terms(h + 1);
    for (std::size_t i = 0; i <= h; ++i) {
        terms[i] = c.log_value(i) - mom.lm(i);
    }
    return convergent_series(terms, 0, tail, stabilization);
}

enum class Status { certified, at_horizon, failed };

inline Status combine(Status a, Status b)
{
    if (a == Status::failed || b == Status::failed) {
        return Status::failed;
    }
    return (a == Status::certified && b == Status::certified) ? Status::certified
                                                              : Status::at_horizon;
}

inline Status status_of(SeriesSummary const& s)
{
    switch (s.status) {
    case SeriesStatus::certified: return Status::certified;
    case SeriesStatus::stabilized: return Status::at_horizon;
    case SeriesStatus::open: return Status::failed;
    }
    return Status::failed;
}

inline void settle_local(Verdict& v, Status s)
{
    if (s != Status::failed) {
        settle(v, Outcome::survives, s == Status::certified);
        v.evidence.notes.push_back("local survival in every interval of positive measure");
    }
}

}  // namespace detail

//! Local survival from a witness sequence c_i and constant C.
[[nodiscard]] inline Verdict check_main1(Schedule const& schedule, Main1Witness const& witness,
                                         std::size_t anchor = 0, CriteriaOptions const& opt = {},
                                         Main1Tails const& tails = {})
{
    if (!(witness.C > 0.0)) {
        throw std::invalid_argument("witness constant C must be positive");
    }
    std::size_t const h = std::max<std::size_t>(opt.horizon, anchor + 1);
    Verdict v = detail::make("thm_main1", Process::bpws, h);
    auto const mom = detail::moments(schedule, 0, h);
    double const log_C = std::log(witness.C);
    v.evidence.values["C"] = witness.C;
    v.evidence.values["anchor"] = static_cast<double>(anchor);

    auto const ws = detail::witness_series(mom, witness.c, h, tails.witness_series, opt.stabilization);
    detail::record_series(v.evidence, "witness", ws);

    std::vector<double> disp_terms;
    disp_terms.reserve(h - anchor + 1);
    double log_prod = 0.0;  // prod_{i=n}^{j-1} c_i
    for (std::size_t j = anchor; j <= h; ++j) {
        disp_terms.push_back(mom.le(j) - static_cast<double>(j) * log_C - log_prod);
        log_prod += witness.c.log_value(j);
    }
    auto const ds = detail::convergent_series(disp_terms, anchor, tails.dispersion_series,
                                              opt.stabilization);
    detail::record_series(v.evidence, "dispersion", ds);

    // log(C^n prod_{j<=n} c_j)
    std::vector<double> growth(h + 1);
    double acc = 0.0;
    for (std::size_t n = 0; n <= h; ++n) {
        acc += witness.c.log_value(n);
        growth[n] = static_cast<double>(n) * log_C + acc;
    }
    v.evidence.traces["log_growth"] = growth;
    double const early_min = detail::window_min(growth, 0, 0, h / 2);
    double const late_min = detail::window_min(growth, 0, h / 2, h);
    v.evidence.values["log_growth_min"] = std::min(early_min, late_min);

    detail::Status growth_status = detail::Status::failed;
    TailCheck const gc = certify_monotone_sequence(growth, 0, tails.growth);
    if (tails.growth.declared() && tails.growth.direction == TailModel::Direction::nondecreasing
        && gc.holds) {
        growth_status = detail::Status::certified;
    } else {
        if (tails.growth.declared()) {
            v.evidence.notes.push_back("growth: " + gc.reason);
        }
        if (late_min >= early_min) {
            growth_status = detail::Status::at_horizon;
        }
    }

    auto const s = detail::combine(detail::combine(detail::status_of(ws), detail::status_of(ds)),
                                   growth_status);
    detail::settle_local(v, s);
    return v;
}

//! Runs check_main1 for each C in `search` and returns the first Survives
//! verdict, or the verdict for the last C.
[[nodiscard]] inline Verdict check_main1_search(Schedule const& schedule, ParamFunction const& c,
                                                std::vector<double> const& search,
                                                std::size_t anchor = 0,
                                                CriteriaOptions const& opt = {},
                                                Main1Tails const& tails = {})
{
    if (search.empty()) {
        throw std::invalid_argument("empty C search list");
    }
    Verdict last;
    for (double C : search) {
        last = check_main1(schedule, Main1Witness{c, C}, anchor, opt, tails);
        if (last.outcome == Outcome::survives) {
            break;
        }
    }
    return last;
}

//! Witness analogues of the corollary variants.
[[nodiscard]] inline Verdict check_cor_main1(Schedule const& schedule, Main1Witness const& witness,
                                             int variant, RootTestParams const& params = {},
                                             std::size_t anchor = 0,
                                             CriteriaOptions const& opt = {},
                                             TailModel const& witness_tail = {},
                                             TailModel const& tail = {})
{
    if (variant < 1 || variant > 4) {
        throw std::invalid_argument("corollary variant must be 1..4");
    }
    if (!(witness.C > 0.0)) {
        throw std::invalid_argument("witness constant C must be positive");
    }
    std::size_t const h = std::max<std::size_t>(opt.horizon, anchor + 2);
    Verdict v = detail::make("cor_main1_" + std::to_string(variant), Process::bpws, h);
    auto const mom = detail::moments(schedule, 0, h);
    double const log_C = std::log(witness.C);
    v.evidence.values["C"] = witness.C;

    auto const ws = detail::witness_series(mom, witness.c, h, witness_tail, opt.stabilization);
    detail::record_series(v.evidence, "witness", ws);
    detail::Status const witness_status = detail::status_of(ws);

    if (variant == 1) {
        auto const terms = detail::weighted_series_terms(mom, anchor, h, false, &witness.c, log_C);
        auto const s = detail::convergent_series(terms, anchor, tail, opt.stabilization);
        detail::record_series(v.evidence, "series", s);
        detail::settle_local(v, detail::combine(witness_status, detail::status_of(s)));
        return v;
    }

    detail::RootTest rt;
    rt.a.resize(h);
    rt.b.resize(h);
    std::vector<double> log_c(h + 1);
    double log_prod = 0.0;
    for (std::size_t n = 0; n <= h; ++n) {
        log_c[n] = witness.c.log_value(n);
    }
    for (std::size_t n = 1; n <= h; ++n) {
        log_prod += log_c[n - 1];
        double const nd = static_cast<double>(n);
        rt.b[n - 1] = log_C + log_prod / nd;
        rt.a[n - 1] = mom.lr(n) / nd;
    }
    if (variant == 3 || variant == 4) {
        ParamFunction g = ParamFunction::constant(1.0);
        if (variant == 3) {
            if (!params.g) {
                throw std::invalid_argument("variant 3 needs a comparison function g");
            }
            g = *params.g;
        } else {
            if (!(params.M >= 1.0 && params.k >= 1.0)) {
                throw std::invalid_argument("variant 4 needs M, k >= 1");
            }
            g = ParamFunction::exponential(params.k, params.M);
            double const early = detail::window_max(log_c, 0, 0, h / 4);
            double const late = detail::window_min(log_c, 0, h / 2, h);
            v.evidence.values["log_c_early_max"] = early;
            v.evidence.values["log_c_late_min"] = late;
            if (!(late > early)) {
                v.evidence.notes.push_back("c_n does not grow over the horizon");
                return v;
            }
        }
        std::vector<double> d(h);
        for (std::size_t n = 1; n <= h; ++n) {
            double const lg = g.log_value(n);
            if (lg < -1e-12) {
                v.evidence.notes.push_back("g drops below 1 at n = " + std::to_string(n));
                return v;
            }
            rt.a[n - 1] = g.log_value(n + 1) - lg;
            d[n - 1] = lg - mom.lr(n);
        }
        rt.d = std::move(d);
    }
    auto const r = detail::evaluate_root_test(rt, h, tail, v.evidence);
    detail::Status const rs = r.certified    ? detail::Status::certified
                              : r.at_horizon ? detail::Status::at_horizon
                                             : detail::Status::failed;
    detail::settle_local(v, detail::combine(witness_status, rs));
    return v;
}

//! Declared tails for every criterion of the battery.
struct BatteryTails
{
    TailModel prodm;
    TailModel main0;
    TailModel cor_main0[4];
    TailModel bpws_extinction;
    Main1Tails main1;
    TailModel cor_main1[4];
};

struct BatteryOptions
{
    CriteriaOptions criteria;
    std::size_t anchor = 0;
    std::vector<std::size_t> bpws_n0{0};
    RootTestParams root;
    bool has_Mk = false;
    ParamFunction witness_c = ParamFunction::constant(1.0);
    //! Fixed C, or search over C_search when empty.
    std::optional<double> witness_C;
    std::vector<double> C_search = default_C_search;
    BatteryTails tails;
};

//! Tail models that are exact for constant schedules.
[[nodiscard]] inline BatteryTails constant_schedule_tails(OffspringLaw const& law)
{
    BatteryTails t;
    double const m = law.mean();
    using D = TailModel::Direction;
    if (m < 1.0) {
        t.prodm = TailModel::monotone(0, D::nondecreasing, 0.0);
    }
    if (m > 1.0) {
        t.main0 = TailModel::geometric(0, 1.0 / m);
        t.cor_main0[0] = TailModel::geometric(0, 1.0 / m);
    }
    for (int i = 1; i < 4; ++i) {
        t.cor_main0[i] = TailModel::monotone(1, D::nonincreasing);
    }
    t.bpws_extinction = TailModel::monotone(0, D::nondecreasing, 0.0);
    return t;
}

namespace detail {

inline void fill_missing(TailModel& dst, TailModel const& src)
{
    if (!dst.declared()) {
        dst = src;
    }
}

inline Verdict guarded(std::string const& tag, Process process, std::size_t horizon,
                       auto&& run)
{
    try {
        return run();
    } catch (OverflowError const& e) {
        Verdict v = make(tag, process, horizon);
        v.evidence.notes.push_back(std::string{"not evaluated: "} + e.what());
        return v;
    } catch (LawError const& e) {
        Verdict v = make(tag, process, horizon);
        v.evidence.notes.push_back(std::string{"not evaluated: "} + e.what());
        return v;
    }
}

}  // namespace detail

//! Throws ContradictionError when certified verdicts disagree. BPWS survival
//! implies BPVE survival, so a certified BPVE extinction also contradicts a
//! certified BPWS survival.
inline void check_consistency(std::vector<Verdict> const& verdicts)
{
    auto certified = [](Verdict const& v, Outcome o) {
        return v.outcome == o && v.qualifier == Qualifier::certified;
    };
    for (auto const& e : verdicts) {
        if (!certified(e, Outcome::extinct)) {
            continue;
        }
        for (auto const& s : verdicts) {
            if (!certified(s, Outcome::survives)) {
                continue;
            }
            if (e.process == Process::bpve || s.process == Process::bpws) {
                throw ContradictionError("certified " + e.criterion + " extinction contradicts certified "
                                         + s.criterion + " survival");
            }
        }
    }
}

//! All applicable criteria in fixed order.
[[nodiscard]] inline std::vector<Verdict> run_battery(Schedule const& schedule,
                                                      BatteryOptions const& options = {})
{
    BatteryTails tails = options.tails;
    if (auto const* law = schedule.constant_law()) {
        BatteryTails const auto_tails = constant_schedule_tails(*law);
        detail::fill_missing(tails.prodm, auto_tails.prodm);
        detail::fill_missing(tails.main0, auto_tails.main0);
        for (int i = 0; i < 4; ++i) {
            detail::fill_missing(tails.cor_main0[i], auto_tails.cor_main0[i]);
        }
        detail::fill_missing(tails.bpws_extinction, auto_tails.bpws_extinction);
    }
    CriteriaOptions const& opt = options.criteria;
    std::size_t const h = opt.horizon;
    std::size_t const n = options.anchor;

    std::vector<Verdict> out;
    out.push_back(detail::guarded("prop_main0ext", Process::bpve, h,
                                  [&] { return check_prodm_extinction(schedule, opt, tails.prodm); }));
    out.push_back(detail::guarded("thm_main0", Process::bpve, h,
                                  [&] { return check_main0(schedule, n, opt, tails.main0); }));
    for (int variant = 1; variant <= 4; ++variant) {
        if (variant == 3 && !options.root.g) {
            continue;
        }
        if (variant == 4 && !options.has_Mk) {
            continue;
        }
        out.push_back(detail::guarded("cor_main0_" + std::to_string(variant), Process::bpve, h, [&] {
            return check_cor_main0(schedule, variant, options.root, n, opt,
                                   tails.cor_main0[variant - 1]);
        }));
    }
    for (std::size_t n0 : options.bpws_n0) {
        out.push_back(detail::guarded("prop_bpws_extinction", Process::bpws, h, [&] {
            return check_bpws_extinction(schedule, n0, opt, tails.bpws_extinction);
        }));
    }
    std::vector<double> const search =
        options.witness_C ? std::vector<double>{*options.witness_C} : options.C_search;
    out.push_back(detail::guarded("thm_main1", Process::bpws, h, [&] {
        return check_main1_search(schedule, options.witness_c, search, n, opt, tails.main1);
    }));
    for (int variant = 1; variant <= 4; ++variant) {
        if (variant == 3 && !options.root.g) {
            continue;
        }
        if (variant == 4 && !options.has_Mk) {
            continue;
        }
        out.push_back(detail::guarded("cor_main1_" + std::to_string(variant), Process::bpws, h, [&] {
            Verdict last;
            for (double C : search) {
                last = check_cor_main1(schedule, Main1Witness{options.witness_c, C}, variant,
                                       options.root, n, opt, tails.main1.witness_series,
                                       tails.cor_main1[variant - 1]);
                if (last.outcome == Outcome::survives) {
                    break;
                }
            }
            return last;
        }));
    }
    check_consistency(out);
    return out;
}

}  // namespace bpve
