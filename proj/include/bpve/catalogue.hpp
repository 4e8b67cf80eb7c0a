// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/catalogue.hpp
//! Pre-configured analysis and simulation runs for the reference examples,
//! each judged against its expected qualitative outcome.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "genfun.hpp"
#include "io.hpp"
#include "schedule.hpp"
#include "sim.hpp"

namespace bpve {

struct ReproduceOptions
{
    std::uint64_t seed = 1;
    //! Multiplies every replica budget (minimum one replica).
    double replica_scale = 1.0;
    unsigned threads = 0;
};

struct CheckLine
{
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report
{
    std::string id;
    std::string title;
    std::vector<CheckLine> checks;
    json data = json::object();

    [[nodiscard]] bool pass() const
    {
        for (auto const& c : checks) {
            if (!c.pass) {
                return false;
            }
        }
        return !checks.empty();
    }
};

[[nodiscard]] inline json to_json(Report const& r)
{
    json checks = json::array();
    for (auto const& c : r.checks) {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    return json{{"id", r.id},
                {"title", r.title},
                {"result", r.pass() ? "PASS" : "FAIL"},
                {"checks", checks},
                {"data", r.data}};
}

namespace detail {

inline std::size_t scaled(std::size_t replicas, ReproduceOptions const& o)
{
    double const r = std::round(static_cast<double>(replicas) * o.replica_scale);
    return r < 1.0 ? 1 : static_cast<std::size_t>(r);
}

inline std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline json verdict_rows(std::vector<Verdict> const& vs)
{
    json rows = json::array();
    for (auto const& v : vs) {
        rows.push_back({{"criterion", v.criterion},
                        {"outcome", to_string(v.outcome)},
                        {"qualifier", to_string(v.qualifier)}});
    }
    return rows;
}

inline SimConfig sim_config(std::size_t horizon, std::size_t replicas, ReproduceOptions const& o)
{
    SimConfig cfg;
    cfg.horizon = horizon;
    cfg.replicas = scaled(replicas, o);
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    return cfg;
}

inline ParamFunction squares()
{
    return ParamFunction::power(1.0, 2.0, 1.0);
}

// ---------------------------------------------------------------------------

inline Report continuous(ReproduceOptions const& o)
{
    Report r;
    r.id = "exm:continuous";
    r.title = "geometric offspring with m_n = (n+1)^2";
    Schedule const s = Schedule::geometric(squares());
    CriteriaOptions opt;
    opt.horizon = 1000;
    // beta increments are 1/prod_{i<l} m_i, with ratio 1/(l+1)^2 <= 1/4 for l >= 1.
    Verdict const v = check_main0(s, 0, opt, TailModel::geometric(1, 0.25));
    r.checks.push_back({"thm_main0 survives", v.outcome == Outcome::survives,
                        std::string{to_string(v.outcome)} + "/" + to_string(v.qualifier)});
    double q0 = 1.0;
    if (v.evidence.certificate) {
        auto const& cert = *v.evidence.certificate;
        auto const check = verify_certificate(s, cert);
        q0 = cert.q.front();
        r.checks.push_back({"certificate valid", cert.valid && check.ok,
                            "worst slack " + fmt(check.worst_slack) + ", q(0) = " + fmt(q0)});
        r.data["certificate_q0"] = q0;
    } else {
        r.checks.push_back({"certificate valid", false, "no certificate"});
    }
    SimConfig const cfg = sim_config(200, 10000, o);
    auto const est = estimate_survival(s, cfg);
    double const se = std::sqrt(0.25 / static_cast<double>(cfg.replicas));
    // alive + cap-hit bounds P(alive at 200) from above, and survival is at
    // least 1 - q(0).
    r.checks.push_back({"simulation consistent with 1 - q(0)", est.upper >= 1.0 - q0 - 4.0 * se,
                        "(alive + cap_hit)/R = " + fmt(est.upper) + ", 1 - q(0) = " + fmt(1.0 - q0)});
    r.data["simulation"] = to_json(est);
    return r;
}

inline Report less1surv(ReproduceOptions const& o)
{
    Report r;
    r.id = "exmp:less1surv";
    r.title = "Bernoulli offspring with failure probability a_n = (n+2)^-2";
    Schedule const s = Schedule::bernoulli_failure(ParamFunction::power(1.0, -2.0, 2.0));
    std::size_t const horizon = 1000;
    // P(alive at N) = prod_{k=2}^{N+1} (1 - 1/k^2) = (N+2)/(2(N+1))
    double const exact = (static_cast<double>(horizon) + 2.0) / (2.0 * (static_cast<double>(horizon) + 1.0));
    auto const curve = extinction_curve(s, horizon);
    double const analytic = 1.0 - curve.values.front();
    r.checks.push_back({"extinction curve", std::fabs(analytic - exact) < 1e-4,
                        "1 - e[0] = " + fmt(analytic) + ", exact " + fmt(exact)});
    auto const est = estimate_survival(s, sim_config(horizon, 100000, o));
    r.checks.push_back({"simulated survival ~ 0.5", std::fabs(est.p_hat - exact) <= 0.01,
                        "p_hat = " + fmt(est.p_hat) + " [" + fmt(est.ci_low) + ", " + fmt(est.ci_high) + "]"});
    r.data["simulation"] = to_json(est);

    CriteriaOptions opt;
    opt.horizon = 2000;
    Schedule const divergent = Schedule::bernoulli_failure(ParamFunction::power(1.0, -1.0, 2.0));
    Verdict const v = check_prodm_extinction(
        divergent, opt, TailModel::monotone(0, TailModel::Direction::nondecreasing, 1.0));
    r.checks.push_back({"a_n = 1/(n+2) dies out", v.outcome == Outcome::extinct,
                        std::string{to_string(v.outcome)} + "/" + to_string(v.qualifier)});
    return r;
}

inline Report largem(ReproduceOptions const& o)
{
    Report r;
    r.id = "exmp:largem_nextinction";
    r.title = "two-point offspring with m_n = 2 and atom k_n = 4^(2^(n-1))";
    Schedule const s = Schedule::two_point_mean(ParamFunction::constant(2.0), ParamFunction::doubling(4.0));
    // (1 - 2/k)^k = exp(k log1p(-2/k)); with u = 1/k the exponent is
    // -2 - 2u - (8/3)u^2 - ..., evaluated directly from log k.
    double const log_k = std::ldexp(std::log(4.0), 9);
    double const u = std::exp(-log_k);
    double const exponent = u > 1e-4 ? std::log1p(-2.0 * u) / u : -2.0 - 2.0 * u - (8.0 / 3.0) * u * u;
    double const term = std::exp(exponent);
    r.checks.push_back({"(1 - 2/k_10)^k_10 ~ e^-2", std::fabs(term - std::exp(-2.0)) < 1e-3,
                        fmt(term) + " vs " + fmt(std::exp(-2.0))});
    BatteryOptions bo;
    bo.criteria.horizon = 200;
    auto const verdicts = run_battery(s, bo);
    bool any_survives = false;
    for (auto const& v : verdicts) {
        any_survives = any_survives || v.outcome == Outcome::survives;
    }
    r.checks.push_back({"no criterion claims survival", !any_survives, ""});
    r.data["verdicts"] = verdict_rows(verdicts);
    auto const est = estimate_survival(s, sim_config(50, 10000, o));
    r.checks.push_back({"all replicas extinct by generation 50",
                        est.extinct == est.replicas,
                        std::to_string(est.extinct) + "/" + std::to_string(est.replicas)});
    r.data["simulation"] = to_json(est);
    return r;
}

inline Report ci(ReproduceOptions const& o)
{
    Report r;
    r.id = "exmp:ci";
    r.title = "local survival with sum 1/m_n divergent and sum c_n/m_n convergent";
    Schedule const s = Schedule::geometric(
        ParamFunction::dyadic(ParamFunction::power(1.0, 1.0, 1.0), squares()));
    ParamFunction const c =
        ParamFunction::dyadic(ParamFunction::power(1.0, -1.0, 1.0), ParamFunction::constant(2.0));
    CriteriaOptions opt;
    opt.horizon = 4096;
    using D = TailModel::Direction;
    Main1Tails tails;
    tails.witness_series = TailModel::monotone(3, D::nonincreasing, 2.0).blocks();
    tails.dispersion_series = TailModel::geometric(3, 0.75).blocks();
    Verdict const v = check_main1_search(s, c, default_C_search, 0, opt, tails);
    r.checks.push_back({"thm_main1 survives locally", v.outcome == Outcome::survives,
                        std::string{to_string(v.outcome)} + "/" + to_string(v.qualifier)});
    Verdict const plain = check_main1_search(s, ParamFunction::constant(1.0), default_C_search, 0, opt,
                                             Main1Tails{});
    r.checks.push_back({"witness c = 1 does not apply", plain.outcome != Outcome::survives,
                        std::string{to_string(plain.outcome)} + "/" + to_string(plain.qualifier)});
    SimConfig cfg = sim_config(64, 1000, o);
    cfg.cap_policy = CapPolicy::prune_to_cap;
    cfg.population_cap = 32;
    auto const est = estimate_bpws_survival(s, 0.0, cfg);
    r.checks.push_back({"selection process survives in simulation", est.alive > 0,
                        "alive " + std::to_string(est.alive) + "/" + std::to_string(est.replicas)
                            + " (pruned to 32, a lower bound)"});
    r.data["simulation"] = to_json(est);
    return r;
}

inline Report nalpha(ReproduceOptions const& o)
{
    Report r;
    r.id = "rem:nalpha-sweep";
    r.title = "phase transition in m_n = (n+1)^alpha at alpha = 1";
    using D = TailModel::Direction;
    json table = json::array();
    for (double alpha : {0.5, 0.9, 1.5, 2.0}) {
        Schedule const s = Schedule::geometric(ParamFunction::power(1.0, alpha, 1.0));
        CriteriaOptions opt;
        opt.horizon = 2000;
        Verdict v;
        SimConfig cfg = sim_config(200, 10000, o);
        bool const sub = alpha < 1.0;
        if (sub) {
            v = check_bpws_extinction(s, 0, opt, TailModel::monotone(16, D::nondecreasing, 0.0));
        } else {
            Main1Tails tails;
            tails.witness_series = TailModel::monotone(0, D::nonincreasing, alpha);
            tails.dispersion_series = TailModel::geometric(1, 0.9);
            tails.growth = TailModel::monotone(0, D::nondecreasing);
            v = check_main1_search(s, ParamFunction::constant(1.0), default_C_search, 0, opt, tails);
            cfg.cap_policy = CapPolicy::prune_to_cap;
            cfg.population_cap = 32;
        }
        auto const est = estimate_bpws_survival(s, 0.0, cfg);
        Outcome const want = sub ? Outcome::extinct : Outcome::survives;
        std::string const a = fmt(alpha);
        r.checks.push_back({"alpha " + a + " verdict", v.outcome == want,
                            v.criterion + " " + to_string(v.outcome) + "/" + to_string(v.qualifier)});
        bool const sim_ok = sub ? est.alive + est.cap_hit == 0 : est.alive > 0;
        r.checks.push_back({"alpha " + a + " simulation", sim_ok,
                            "alive " + std::to_string(est.alive) + ", cap_hit "
                                + std::to_string(est.cap_hit) + " of " + std::to_string(est.replicas)});
        table.push_back({{"alpha", alpha},
                         {"criterion", v.criterion},
                         {"outcome", to_string(v.outcome)},
                         {"qualifier", to_string(v.qualifier)},
                         {"simulation", to_json(est)},
                         {"cap_policy", to_string(cfg.cap_policy)},
                         {"population_cap", cfg.population_cap}});
    }
    r.data["sweep"] = table;
    return r;
}

struct Entry
{
    char const* id;
    Report (*run)(ReproduceOptions const&);
};

inline constexpr Entry catalogue[] = {
    {"exm:continuous", continuous},
    {"exmp:less1surv", less1surv},
    {"exmp:largem_nextinction", largem},
    {"exmp:ci", ci},
    {"rem:nalpha-sweep", nalpha},
};

}  // namespace detail

[[nodiscard]] inline std::vector<std::string> catalogue_ids()
{
    std::vector<std::string> out;
    for (auto const& e : detail::catalogue) {
        out.emplace_back(e.id);
    }
    return out;
}

//! Throws std::out_of_range for an unknown id.
[[nodiscard]] inline Report reproduce(std::string const& id, ReproduceOptions const& options = {})
{
    for (auto const& e : detail::catalogue) {
        if (id == e.id) {
            return e.run(options);
        }
    }
    throw std::out_of_range("unknown example id \"" + id + "\"");
}

}  // namespace bpve
