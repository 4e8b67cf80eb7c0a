// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/io.hpp
//! JSON configuration parsing and result serialization.
//!
//! Parsing is strict: every object has a fixed key set and unknown keys are
//! rejected with a SchemaError that names the offending path. The accepted
//! format is described by schemas/schedule.schema.json.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "criteria.hpp"
#include "genfun.hpp"
#include "laws.hpp"
#include "param_function.hpp"
#include "schedule.hpp"
#include "sim.hpp"
#include "tail.hpp"

namespace bpve {

using json = nlohmann::json;

class SchemaError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void expect_keys(json const& j, std::string const& path,
                        std::set<std::string> const& required,
                        std::set<std::string> const& optional = {})
{
    if (!j.is_object()) {
        throw SchemaError(path + ": expected an object");
    }
    for (auto const& [key, _] : j.items()) {
        if (required.count(key) == 0 && optional.count(key) == 0) {
            throw SchemaError(path + ": unknown key \"" + key + "\"");
        }
    }
    for (auto const& key : required) {
        if (!j.contains(key)) {
            throw SchemaError(path + ": missing key \"" + key + "\"");
        }
    }
}

inline double number(json const& j, std::string const& path)
{
    if (!j.is_number()) {
        throw SchemaError(path + ": expected a number");
    }
    double const x = j.get<double>();
    if (!std::isfinite(x)) {
        throw SchemaError(path + ": expected a finite number");
    }
    return x;
}

inline std::size_t index(json const& j, std::string const& path)
{
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw SchemaError(path + ": expected a nonnegative integer");
    }
    return j.get<std::size_t>();
}

inline std::string text(json const& j, std::string const& path)
{
    if (!j.is_string()) {
        throw SchemaError(path + ": expected a string");
    }
    return j.get<std::string>();
}

}  // namespace detail

//! Parameter function: a number, or {"kind": ...}.
[[nodiscard]] inline ParamFunction parse_param(json const& j, std::string const& path)
{
    using detail::expect_keys;
    using detail::number;
    if (j.is_number()) {
        return ParamFunction::constant(number(j, path));
    }
    if (!j.is_object() || !j.contains("kind")) {
        throw SchemaError(path + ": expected a number or an object with \"kind\"");
    }
    std::string const kind = detail::text(j["kind"], path + ".kind");
    if (kind == "constant") {
        expect_keys(j, path, {"kind", "value"});
        return ParamFunction::constant(number(j["value"], path + ".value"));
    }
    if (kind == "power") {
        expect_keys(j, path, {"kind", "exponent"}, {"scale", "shift"});
        double const scale = j.contains("scale") ? number(j["scale"], path + ".scale") : 1.0;
        double const shift = j.contains("shift") ? number(j["shift"], path + ".shift") : 0.0;
        return ParamFunction::power(scale, number(j["exponent"], path + ".exponent"), shift);
    }
    if (kind == "exponential") {
        expect_keys(j, path, {"kind", "base"}, {"scale"});
        double const scale = j.contains("scale") ? number(j["scale"], path + ".scale") : 1.0;
        return ParamFunction::exponential(scale, number(j["base"], path + ".base"));
    }
    if (kind == "polynomial") {
        expect_keys(j, path, {"kind", "coefficients"});
        auto const& cs = j["coefficients"];
        if (!cs.is_array() || cs.empty()) {
            throw SchemaError(path + ".coefficients: expected a nonempty array");
        }
        std::vector<double> coefficients;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            coefficients.push_back(number(cs[i], path + ".coefficients[" + std::to_string(i) + "]"));
        }
        return ParamFunction::polynomial(std::move(coefficients));
    }
    if (kind == "doubling") {
        expect_keys(j, path, {"kind", "base"});
        double const base = number(j["base"], path + ".base");
        if (!(base > 0.0)) {
            throw SchemaError(path + ".base: must be positive");
        }
        return ParamFunction::doubling(base);
    }
    if (kind == "dyadic") {
        expect_keys(j, path, {"kind", "at_power", "otherwise"});
        return ParamFunction::dyadic(parse_param(j["at_power"], path + ".at_power"),
                                     parse_param(j["otherwise"], path + ".otherwise"));
    }
    throw SchemaError(path + ".kind: unknown parameter kind \"" + kind + "\"");
}

namespace detail {

inline OffspringLaw law_from_constants(Schedule const& s, std::string const& path)
{
    if (auto const* law = s.constant_law()) {
        return *law;
    }
    throw SchemaError(path + ": table prefix entries must have constant parameters");
}

}  // namespace detail

//! Schedule object; see schemas/schedule.schema.json.
[[nodiscard]] inline Schedule parse_schedule(json const& j, std::string const& path = "schedule")
{
    using detail::expect_keys;
    if (!j.is_object() || !j.contains("family")) {
        throw SchemaError(path + ": expected an object with \"family\"");
    }
    std::string const family = detail::text(j["family"], path + ".family");
    try {
        if (family == "geometric" || family == "poisson") {
            expect_keys(j, path, {"family", "mean"});
            auto mean = parse_param(j["mean"], path + ".mean");
            return family == "geometric" ? Schedule::geometric(std::move(mean))
                                         : Schedule::poisson(std::move(mean));
        }
        if (family == "binomial") {
            expect_keys(j, path, {"family", "trials", "success_prob"});
            return Schedule::binomial(parse_param(j["trials"], path + ".trials"),
                                      parse_param(j["success_prob"], path + ".success_prob"));
        }
        if (family == "bernoulli") {
            if (j.contains("a")) {
                expect_keys(j, path, {"family", "a"});
                return Schedule::bernoulli_failure(parse_param(j["a"], path + ".a"));
            }
            expect_keys(j, path, {"family", "success_prob"});
            return Schedule::bernoulli(parse_param(j["success_prob"], path + ".success_prob"));
        }
        if (family == "twopoint") {
            if (j.contains("prob")) {
                expect_keys(j, path, {"family", "k", "prob"});
                return Schedule::two_point_prob(parse_param(j["prob"], path + ".prob"),
                                                parse_param(j["k"], path + ".k"));
            }
            expect_keys(j, path, {"family", "k", "mean"});
            return Schedule::two_point_mean(parse_param(j["mean"], path + ".mean"),
                                            parse_param(j["k"], path + ".k"));
        }
        if (family == "explicit") {
            expect_keys(j, path, {"family", "pmf"});
            auto const& pmf = j["pmf"];
            if (!pmf.is_array() || pmf.empty()) {
                throw SchemaError(path + ".pmf: expected a nonempty array of [i, p] pairs");
            }
            std::vector<std::pair<Count, double>> entries;
            for (std::size_t t = 0; t < pmf.size(); ++t) {
                std::string const at = path + ".pmf[" + std::to_string(t) + "]";
                if (!pmf[t].is_array() || pmf[t].size() != 2) {
                    throw SchemaError(at + ": expected an [i, p] pair");
                }
                entries.emplace_back(detail::index(pmf[t][0], at + "[0]"),
                                     detail::number(pmf[t][1], at + "[1]"));
            }
            return Schedule::constant(OffspringLaw::explicit_pmf(std::move(entries)));
        }
        if (family == "table") {
            expect_keys(j, path, {"family", "prefix", "tail"});
            auto const& prefix = j["prefix"];
            if (!prefix.is_array()) {
                throw SchemaError(path + ".prefix: expected an array");
            }
            std::vector<OffspringLaw> laws;
            for (std::size_t t = 0; t < prefix.size(); ++t) {
                std::string const at = path + ".prefix[" + std::to_string(t) + "]";
                laws.push_back(detail::law_from_constants(parse_schedule(prefix[t], at), at));
            }
            return Schedule::table(std::move(laws), parse_schedule(j["tail"], path + ".tail"));
        }
    } catch (LawError const& e) {
        throw SchemaError(path + ": " + e.what());
    } catch (std::domain_error const& e) {
        throw SchemaError(path + ": " + e.what());
    }
    throw SchemaError(path + ".family: unknown family \"" + family + "\"");
}

[[nodiscard]] inline TailModel parse_tail(json const& j, std::string const& path)
{
    using detail::expect_keys;
    if (!j.is_object() || !j.contains("kind")) {
        throw SchemaError(path + ": expected an object with \"kind\"");
    }
    std::string const kind = detail::text(j["kind"], path + ".kind");
    TailModel t;
    if (kind == "none") {
        expect_keys(j, path, {"kind"});
        return t;
    }
    if (kind == "geometric_ratio") {
        expect_keys(j, path, {"kind", "ratio"}, {"from", "dyadic_blocks"});
        t = TailModel::geometric(0, detail::number(j["ratio"], path + ".ratio"));
        if (!(t.ratio > 0.0 && t.ratio < 1.0)) {
            throw SchemaError(path + ".ratio: must lie in (0,1)");
        }
    } else if (kind == "monotone") {
        expect_keys(j, path, {"kind", "direction"}, {"from", "exponent", "dyadic_blocks"});
        std::string const dir = detail::text(j["direction"], path + ".direction");
        if (dir != "nonincreasing" && dir != "nondecreasing") {
            throw SchemaError(path + ".direction: expected nonincreasing or nondecreasing");
        }
        t = TailModel::monotone(0,
                                dir == "nonincreasing" ? TailModel::Direction::nonincreasing
                                                       : TailModel::Direction::nondecreasing,
                                j.contains("exponent") ? detail::number(j["exponent"], path + ".exponent")
                                                       : 0.0);
    } else {
        throw SchemaError(path + ".kind: unknown tail kind \"" + kind + "\"");
    }
    if (j.contains("from")) {
        t.from = detail::index(j["from"], path + ".from");
    }
    if (j.contains("dyadic_blocks")) {
        if (!j["dyadic_blocks"].is_boolean()) {
            throw SchemaError(path + ".dyadic_blocks: expected a boolean");
        }
        t.dyadic_blocks = j["dyadic_blocks"].get<bool>();
    }
    return t;
}

//! Generations evaluated at load time so that invalid parameter values are
//! reported as input errors rather than midway through an analysis.
inline constexpr std::size_t schedule_probe_depth = 64;

inline void probe_schedule(Schedule const& schedule, std::string const& path = "schedule")
{
    for (std::size_t n = 0; n < schedule_probe_depth; ++n) {
        try {
            (void)schedule.law(n);
        } catch (OverflowError const&) {
            return;
        } catch (LawError const& e) {
            throw SchemaError(path + ": generation " + std::to_string(n) + ": " + e.what());
        } catch (std::domain_error const& e) {
            throw SchemaError(path + ": generation " + std::to_string(n) + ": " + e.what());
        }
    }
}

//! A run configuration: one schedule plus optional witness, comparison
//! function and tail declarations.
struct RunConfig
{
    json document;         // the whole input as given
    json source;           // the schedule object as given
    Schedule schedule = Schedule::constant(OffspringLaw::bernoulli(0.5));
    BatteryOptions battery;
};

//! Accepts a bare schedule object or {"schedule": ..., "witness": ...,
//! "cor_main0": ..., "tails": ..., "bpws_n0": [...], "anchor": n}.
[[nodiscard]] inline RunConfig parse_config(json const& j)
{
    using detail::expect_keys;
    RunConfig cfg;
    cfg.document = j;
    if (j.is_object() && j.contains("family")) {
        cfg.source = j;
        cfg.schedule = parse_schedule(j);
        probe_schedule(cfg.schedule);
        return cfg;
    }
    expect_keys(j, "config", {"schedule"}, {"witness", "cor_main0", "tails", "bpws_n0", "anchor"});
    cfg.source = j["schedule"];
    cfg.schedule = parse_schedule(j["schedule"]);
    probe_schedule(cfg.schedule);
    BatteryOptions& b = cfg.battery;
    if (j.contains("anchor")) {
        b.anchor = detail::index(j["anchor"], "config.anchor");
    }
    if (j.contains("bpws_n0")) {
        auto const& n0 = j["bpws_n0"];
        if (!n0.is_array() || n0.empty()) {
            throw SchemaError("config.bpws_n0: expected a nonempty array");
        }
        b.bpws_n0.clear();
        for (std::size_t t = 0; t < n0.size(); ++t) {
            b.bpws_n0.push_back(detail::index(n0[t], "config.bpws_n0[" + std::to_string(t) + "]"));
        }
    }
    if (j.contains("witness")) {
        auto const& w = j["witness"];
        expect_keys(w, "config.witness", {"c"}, {"C", "C_search"});
        b.witness_c = parse_param(w["c"], "config.witness.c");
        if (w.contains("C")) {
            double const C = detail::number(w["C"], "config.witness.C");
            if (!(C > 0.0)) {
                throw SchemaError("config.witness.C: must be positive");
            }
            b.witness_C = C;
        }
        if (w.contains("C_search")) {
            auto const& cs = w["C_search"];
            if (!cs.is_array() || cs.empty()) {
                throw SchemaError("config.witness.C_search: expected a nonempty array");
            }
            b.C_search.clear();
            for (std::size_t t = 0; t < cs.size(); ++t) {
                double const C = detail::number(cs[t], "config.witness.C_search");
                if (!(C > 0.0)) {
                    throw SchemaError("config.witness.C_search: entries must be positive");
                }
                b.C_search.push_back(C);
            }
        }
    }
    if (j.contains("cor_main0")) {
        auto const& c = j["cor_main0"];
        expect_keys(c, "config.cor_main0", {}, {"g", "M", "k"});
        if (c.contains("g")) {
            b.root.g = parse_param(c["g"], "config.cor_main0.g");
        }
        if (c.contains("M") != c.contains("k")) {
            throw SchemaError("config.cor_main0: M and k must be given together");
        }
        if (c.contains("M")) {
            b.root.M = detail::number(c["M"], "config.cor_main0.M");
            b.root.k = detail::number(c["k"], "config.cor_main0.k");
            if (!(b.root.M >= 1.0 && b.root.k >= 1.0)) {
                throw SchemaError("config.cor_main0: M and k must be >= 1");
            }
            b.has_Mk = true;
        }
    }
    if (j.contains("tails")) {
        auto const& t = j["tails"];
        expect_keys(t, "config.tails", {},
                    {"prodm", "main0", "cor_main0_1", "cor_main0_2", "cor_main0_3", "cor_main0_4",
                     "bpws_extinction", "main1_witness", "main1_dispersion", "main1_growth",
                     "cor_main1_1", "cor_main1_2", "cor_main1_3", "cor_main1_4"});
        auto get = [&](char const* key, TailModel& dst) {
            if (t.contains(key)) {
                dst = parse_tail(t[key], std::string{"config.tails."} + key);
            }
        };
        BatteryTails& bt = b.tails;
        get("prodm", bt.prodm);
        get("main0", bt.main0);
        get("bpws_extinction", bt.bpws_extinction);
        get("main1_witness", bt.main1.witness_series);
        get("main1_dispersion", bt.main1.dispersion_series);
        get("main1_growth", bt.main1.growth);
        for (int i = 0; i < 4; ++i) {
            get(("cor_main0_" + std::to_string(i + 1)).c_str(), bt.cor_main0[i]);
            get(("cor_main1_" + std::to_string(i + 1)).c_str(), bt.cor_main1[i]);
        }
    }
    return cfg;
}

[[nodiscard]] inline RunConfig load_config(std::string const& path)
{
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (f == nullptr) {
        throw SchemaError(path + ": cannot open file");
    }
    std::string body;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) {
        body.append(buf, got);
    }
    std::fclose(f);
    json j;
    try {
        j = json::parse(body);
    } catch (json::parse_error const& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return parse_config(j);
}

//! FNV-1a over the canonical (key-sorted, compact) JSON text.
[[nodiscard]] inline std::string schedule_hash(json const& schedule)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : schedule.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

//! Non-finite values become null, which JSON cannot otherwise carry.
inline json num(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

inline json nums(std::vector<double> const& xs)
{
    json out = json::array();
    for (double x : xs) {
        out.push_back(num(x));
    }
    return out;
}

inline constexpr std::size_t max_trace_points = 256;

}  // namespace detail

[[nodiscard]] inline json to_json(SurvivalCertificate const& c)
{
    return json{{"n0", c.n0},
                {"K", c.horizon},
                {"tolerance", c.tolerance},
                {"b", detail::nums(c.b)},
                {"log_b", detail::nums(c.log_b)},
                {"q", detail::nums(c.q)},
                {"slack", detail::nums(c.slack)},
                {"worst_slack", detail::num(c.worst_slack())},
                {"truncation", detail::num(c.truncation)},
                {"valid", c.valid}};
}

[[nodiscard]] inline json to_json(Verdict const& v, bool full_traces = false)
{
    json cert = json::object();
    json values = json::object();
    for (auto const& [k, x] : v.evidence.values) {
        values[k] = detail::num(x);
    }
    cert["values"] = values;
    if (!v.evidence.traces.empty()) {
        std::size_t const len = v.evidence.traces.begin()->second.size();
        std::size_t stride = 1;
        if (!full_traces && len > detail::max_trace_points) {
            stride = (len + detail::max_trace_points - 1) / detail::max_trace_points;
        }
        json traces = json::object();
        for (auto const& [k, xs] : v.evidence.traces) {
            json arr = json::array();
            json idx = json::array();
            for (std::size_t t = 0; t < xs.size(); t += stride) {
                arr.push_back(detail::num(xs[t]));
                idx.push_back(v.evidence.trace_first + t);
            }
            if (!xs.empty() && (xs.size() - 1) % stride != 0) {
                arr.push_back(detail::num(xs.back()));
                idx.push_back(v.evidence.trace_first + xs.size() - 1);
            }
            traces[k] = json{{"index", idx}, {"value", arr}};
        }
        cert["traces"] = traces;
    }
    cert["notes"] = v.evidence.notes;
    if (v.evidence.certificate) {
        cert["survival_certificate"] = to_json(*v.evidence.certificate);
    }
    return json{{"criterion", v.criterion},
                {"process", to_string(v.process)},
                {"outcome", to_string(v.outcome)},
                {"qualifier", to_string(v.qualifier)},
                {"horizon", v.horizon},
                {"certificate", cert}};
}

[[nodiscard]] inline json to_json(SurvivalEstimate const& e)
{
    return json{{"horizon", e.horizon},
                {"replicas", e.replicas},
                {"alive", e.alive},
                {"extinct", e.extinct},
                {"cap_hit", e.cap_hit},
                {"pruned", e.pruned},
                {"p_hat", e.p_hat},
                {"ci", {{"level", 0.95}, {"low", e.ci_low}, {"high", e.ci_high}}},
                {"upper", e.upper}};
}

[[nodiscard]] inline json to_json(ExtinctionCurve const& c)
{
    return json{{"horizon", c.horizon},
                {"e0", c.values.front()},
                {"bracket", {c.values.front(), 1.0}},
                {"gap", c.gap},
                {"values", detail::nums(c.values)}};
}

[[nodiscard]] inline json to_json(PathCountResult const& p)
{
    return json{{"depth", p.depth},
                {"replicas", p.replicas},
                {"mean", p.mean},
                {"standard_error", p.standard_error},
                {"p_accessible", p.p_accessible},
                {"p_standard_error", p.p_standard_error}};
}

[[nodiscard]] inline char const* to_string(CapPolicy p) noexcept
{
    return p == CapPolicy::stop_record_cap_hit ? "stop_record_cap_hit" : "prune_to_cap";
}

}  // namespace bpve
