// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end.
//
// Exit codes: 0 success, 1 a reproduction reported FAIL, 2 input or schema
// error, 3 contradictory certified verdicts.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <bpve/bpve.hpp>

namespace {

using bpve::json;

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_input = 2;
constexpr int exit_contradiction = 3;

struct Common
{
    std::string config_path;
    std::string out;
    std::string format = "json";
    bool timing = false;
};

struct SimFlags
{
    std::size_t horizon = 100;
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    double cap = 1e7;
    std::string cap_policy = "stop";
    unsigned threads = 0;
    std::size_t trajectories = 0;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true)
{
    if (needs_config) {
        cmd->add_option("config", c.config_path, "Schedule or run configuration (JSON)")->required();
    }
    cmd->add_option("--out,-o", c.out, "Write output to this file instead of stdout");
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_flag("--timing", c.timing, "Include wall-clock time in the output metadata");
}

void add_sim(CLI::App* cmd, SimFlags& s)
{
    cmd->add_option("--horizon", s.horizon, "Generations to simulate")->capture_default_str();
    cmd->add_option("--replicas", s.replicas, "Independent replicas")->capture_default_str();
    cmd->add_option("--seed", s.seed, "Master seed")->capture_default_str();
    cmd->add_option("--cap", s.cap, "Population cap")->capture_default_str();
    cmd->add_option("--cap-policy", s.cap_policy, "What to do at the cap: stop or prune")
        ->check(CLI::IsMember({"stop", "prune"}))
        ->capture_default_str();
    cmd->add_option("--threads", s.threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--trajectories", s.trajectories, "Per-generation dumps for the first replicas")
        ->capture_default_str();
}

bpve::SimConfig sim_config(SimFlags const& s)
{
    bpve::SimConfig cfg;
    cfg.horizon = s.horizon;
    cfg.replicas = s.replicas;
    cfg.seed = s.seed;
    if (!(s.cap >= 1.0 && s.cap <= 1.8e19)) {
        throw bpve::SchemaError("--cap must lie in [1, 1.8e19]");
    }
    cfg.population_cap = static_cast<bpve::Count>(s.cap);
    cfg.cap_policy = s.cap_policy == "prune" ? bpve::CapPolicy::prune_to_cap
                                             : bpve::CapPolicy::stop_record_cap_hit;
    cfg.threads = s.threads;
    cfg.validate();
    return cfg;
}

json sim_echo(bpve::SimConfig const& cfg)
{
    return json{{"horizon", cfg.horizon},
                {"replicas", cfg.replicas},
                {"population_cap", cfg.population_cap},
                {"cap_policy", bpve::to_string(cfg.cap_policy)}};
}

json meta(std::string const& command, bpve::RunConfig const* cfg,
          std::optional<std::uint64_t> seed, json options)
{
    json m{{"tool", "bpve"},
           {"version", BPVE_VERSION},
           {"command", command},
           {"seed", seed ? json(*seed) : json(nullptr)},
           {"options", std::move(options)}};
    if (cfg != nullptr) {
        m["schedule_hash"] = bpve::schedule_hash(cfg->source);
        m["config"] = cfg->document;
    }
    return m;
}

// Output is assembled in memory and written only once the command succeeds.
void emit(Common const& c, std::string const& body)
{
    if (c.out.empty()) {
        std::cout << body;
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
        throw bpve::SchemaError(c.out + ": cannot open for writing");
    }
    f << body;
}

std::string dump(json doc, Common const& c, std::chrono::steady_clock::time_point start)
{
    if (c.timing) {
        doc["meta"]["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return doc.dump(2) + "\n";
}

std::string num(double x)
{
    if (!std::isfinite(x)) {
        return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bpve::Interval parse_interval(std::string const& text)
{
    auto const comma = text.find(',');
    if (comma == std::string::npos) {
        throw bpve::SchemaError("--interval expects a,b");
    }
    try {
        std::size_t used = 0;
        std::string const a = text.substr(0, comma);
        std::string const b = text.substr(comma + 1);
        bpve::Interval out{std::stod(a, &used), 0.0};
        if (used != a.size()) {
            throw std::invalid_argument(a);
        }
        out.hi = std::stod(b, &used);
        if (used != b.size()) {
            throw std::invalid_argument(b);
        }
        return out;
    } catch (std::exception const&) {
        throw bpve::SchemaError("--interval expects two numbers a,b");
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Branching processes in varying environment: criteria, certificates and simulation"};
    app.set_version_flag("--version", std::string{BPVE_VERSION});
    app.require_subcommand(1);

    Common common;
    SimFlags simf;

    std::size_t horizon = 0;
    std::vector<std::size_t> n0_list;
    std::size_t n0 = 0;
    std::size_t K = 0;
    double tolerance = 1e-10;
    double x0 = 0.0;
    std::string interval_text;
    std::size_t depth = 6;
    std::string example;
    bool list = false;
    double replica_scale = 1.0;

    auto* analyze = app.add_subcommand("analyze", "Run every applicable criterion");
    add_common(analyze, common);
    analyze->add_option("--horizon", horizon, "Computation horizon (default 10000)");
    analyze->add_option("--n0", n0_list, "Shifts tested by the selection extinction criterion");

    auto* curve = app.add_subcommand("extinction-curve", "Finite-horizon extinction probabilities");
    add_common(curve, common);
    curve->add_option("--horizon", horizon, "N (default 1000)");

    auto* certificate = app.add_subcommand("certificate", "Build and verify a survival certificate");
    add_common(certificate, common);
    certificate->add_option("--n0", n0, "First generation covered")->capture_default_str();
    certificate->add_option("--K", K, "Truncation horizon (0 = 10 n0 + 200)")->capture_default_str();
    certificate->add_option("--tolerance", tolerance, "Slack and truncation tolerance")
        ->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo survival of the plain process");
    add_common(simulate, common);
    add_sim(simulate, simf);

    auto* select = app.add_subcommand("select", "Monte Carlo for the process with selection");
    add_common(select, common);
    add_sim(select, simf);
    select->add_option("--x0", x0, "Label of the initial particle in [0,1)")->capture_default_str();
    select->add_option("--interval", interval_text, "Watch interval a,b for local survival");

    auto* percolate = app.add_subcommand("percolate", "Count accessible paths in random trees");
    add_common(percolate, common);
    percolate->add_option("--depth", depth, "Tree depth")->capture_default_str();
    percolate->add_option("--replicas", simf.replicas, "Trees")->capture_default_str();
    percolate->add_option("--seed", simf.seed, "Master seed")->capture_default_str();
    percolate->add_option("--threads", simf.threads, "Worker threads (0 = all cores)");

    auto* repro = app.add_subcommand("reproduce", "Re-run a catalogued example and judge it");
    add_common(repro, common, false);
    repro->add_option("id", example, "Example id");
    repro->add_flag("--list", list, "List catalogued ids");
    repro->add_option("--seed", simf.seed, "Master seed")->capture_default_str();
    repro->add_option("--replica-scale", replica_scale, "Multiply every replica budget")
        ->capture_default_str();
    repro->add_option("--threads", simf.threads, "Worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForVersion const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return exit_input;
    }

    auto const start = std::chrono::steady_clock::now();
    try {
        std::optional<bpve::RunConfig> cfg;
        if (!common.config_path.empty()) {
            cfg = bpve::load_config(common.config_path);
        }
        bool const csv = common.format == "csv";
        std::ostringstream out;

        if (analyze->parsed()) {
            bpve::BatteryOptions opt = cfg->battery;
            opt.criteria.horizon = horizon > 0 ? horizon : 10000;
            if (!n0_list.empty()) {
                opt.bpws_n0 = n0_list;
            }
            std::vector<bpve::Verdict> verdicts;
            try {
                verdicts = bpve::run_battery(cfg->schedule, opt);
            } catch (bpve::ContradictionError const& e) {
                std::cerr << "bpve: contradiction: " << e.what() << "\n";
                return exit_contradiction;
            }
            if (csv) {
                out << "criterion,process,outcome,qualifier,horizon\n";
                for (auto const& v : verdicts) {
                    out << v.criterion << ',' << bpve::to_string(v.process) << ','
                        << bpve::to_string(v.outcome) << ',' << bpve::to_string(v.qualifier) << ','
                        << v.horizon << '\n';
                }
                emit(common, out.str());
                return exit_ok;
            }
            json vs = json::array();
            for (auto const& v : verdicts) {
                vs.push_back(bpve::to_json(v));
            }
            json doc{{"meta", meta("analyze", &*cfg, std::nullopt,
                                   {{"horizon", opt.criteria.horizon}, {"bpws_n0", opt.bpws_n0}})},
                     {"verdicts", vs}};
            emit(common, dump(std::move(doc), common, start));
            return exit_ok;
        }

        if (curve->parsed()) {
            std::size_t const n = horizon > 0 ? horizon : 1000;
            auto const c = bpve::extinction_curve(cfg->schedule, n);
            if (csv) {
                out << "generation,e\n";
                for (std::size_t j = 0; j < c.values.size(); ++j) {
                    out << j << ',' << num(c.values[j]) << '\n';
                }
                emit(common, out.str());
                return exit_ok;
            }
            json doc{{"meta", meta("extinction-curve", &*cfg, std::nullopt, {{"horizon", n}})},
                     {"curve", bpve::to_json(c)}};
            emit(common, dump(std::move(doc), common, start));
            return exit_ok;
        }

        if (certificate->parsed()) {
            auto const cert = bpve::build_survival_certificate(cfg->schedule, n0, K, tolerance);
            auto const check = bpve::verify_certificate(cfg->schedule, cert);
            if (csv) {
                out << "n,b,q,slack\n";
                for (std::size_t t = 0; t < cert.q.size(); ++t) {
                    out << cert.n0 + t << ',' << num(cert.b[t]) << ',' << num(cert.q[t]) << ','
                        << (t < cert.slack.size() ? num(cert.slack[t]) : std::string{}) << '\n';
                }
                emit(common, out.str());
                return exit_ok;
            }
            json doc{{"meta", meta("certificate", &*cfg, std::nullopt,
                                   {{"n0", n0}, {"K", cert.horizon}, {"tolerance", tolerance}})},
                     {"certificate", bpve::to_json(cert)},
                     {"verification",
                      {{"ok", check.ok},
                       {"worst_slack", bpve::detail::num(check.worst_slack)},
                       {"worst_index", check.worst_index}}}};
            emit(common, dump(std::move(doc), common, start));
            return exit_ok;
        }

        if (simulate->parsed()) {
            auto const sc = sim_config(simf);
            std::size_t const dumps = std::min(simf.trajectories == 0 && csv ? 1 : simf.trajectories,
                                               sc.replicas);
            if (csv) {
                out << "replica,generation,Z\n";
                for (std::size_t r = 0; r < dumps; ++r) {
                    auto const t = bpve::run_bpve(cfg->schedule, sc, r);
                    for (std::size_t n = 0; n < t.sizes.size(); ++n) {
                        out << r << ',' << n << ',' << t.sizes[n] << '\n';
                    }
                }
                emit(common, out.str());
                return exit_ok;
            }
            auto const est = bpve::estimate_survival(cfg->schedule, sc);
            json doc{{"meta", meta("simulate", &*cfg, sc.seed, sim_echo(sc))},
                     {"estimate", bpve::to_json(est)}};
            if (dumps > 0) {
                json ts = json::array();
                for (std::size_t r = 0; r < dumps; ++r) {
                    auto const t = bpve::run_bpve(cfg->schedule, sc, r);
                    ts.push_back({{"replica", r},
                                  {"sizes", t.sizes},
                                  {"terminal", bpve::to_string(t.terminal)},
                                  {"at", t.at}});
                }
                doc["trajectories"] = ts;
            }
            emit(common, dump(std::move(doc), common, start));
            return exit_ok;
        }

        if (select->parsed()) {
            auto const sc = sim_config(simf);
            if (!(x0 >= 0.0 && x0 < 1.0)) {
                throw bpve::SchemaError("--x0 must lie in [0,1)");
            }
            std::optional<bpve::Interval> interval;
            if (!interval_text.empty()) {
                interval = parse_interval(interval_text);
                if (interval->lo < x0 || interval->hi > 1.0 || interval->lo > interval->hi) {
                    throw bpve::SchemaError("--interval must lie inside [x0, 1]");
                }
            }
            bpve::BpwsOptions bo;
            if (interval) {
                bo.watch = *interval;
            }
            std::size_t const dumps = std::min(simf.trajectories == 0 && csv ? 1 : simf.trajectories,
                                               sc.replicas);
            if (csv) {
                out << "replica,generation,N,l,count_in_I\n";
                for (std::size_t r = 0; r < dumps; ++r) {
                    auto const run = bpve::run_bpws(cfg->schedule, x0, sc, bo, r);
                    for (std::size_t n = 0; n < run.sizes.size(); ++n) {
                        out << r << ',' << n << ',' << run.sizes[n] << ',' << num(run.leftmost(n)) << ','
                            << run.watch_counts[n] << '\n';
                    }
                }
                emit(common, out.str());
                return exit_ok;
            }
            json options = sim_echo(sc);
            options["x0"] = x0;
            if (interval) {
                options["interval"] = {interval->lo, interval->hi};
            }
            json doc{{"meta", meta("select", &*cfg, sc.seed, options)},
                     {"estimate", bpve::to_json(bpve::estimate_bpws_survival(cfg->schedule, x0, sc))}};
            if (interval) {
                doc["local_estimate"] =
                    bpve::to_json(bpve::estimate_local_survival(cfg->schedule, x0, *interval, sc));
                doc["local_estimate"]["proxy"] = "occupied during the last horizon/4 generations";
            }
            if (dumps > 0) {
                json ts = json::array();
                for (std::size_t r = 0; r < dumps; ++r) {
                    auto const run = bpve::run_bpws(cfg->schedule, x0, sc, bo, r);
                    json left = json::array();
                    for (std::size_t n = 0; n < run.sizes.size(); ++n) {
                        left.push_back(bpve::detail::num(run.leftmost(n)));
                    }
                    ts.push_back({{"replica", r},
                                  {"sizes", run.sizes},
                                  {"leftmost", left},
                                  {"count_in_interval", run.watch_counts},
                                  {"terminal", bpve::to_string(run.terminal)},
                                  {"at", run.at}});
                }
                doc["trajectories"] = ts;
            }
            emit(common, dump(std::move(doc), common, start));
            return exit_ok;
        }

        if (percolate->parsed()) {
            if (simf.replicas < 1) {
                throw bpve::SchemaError("--replicas must be >= 1");
            }
            auto const p = bpve::count_accessible_paths(cfg->schedule, depth, simf.replicas, simf.seed,
                                                        simf.threads);
            if (csv) {
                out << "depth,replicas,mean,standard_error,p_accessible,p_standard_error\n"
                    << p.depth << ',' << p.replicas << ',' << num(p.mean) << ','
                    << num(p.standard_error) << ',' << num(p.p_accessible) << ','
                    << num(p.p_standard_error) << '\n';
                emit(common, out.str());
                return exit_ok;
            }
            json doc{{"meta", meta("percolate", &*cfg, simf.seed,
                                   {{"depth", depth}, {"replicas", simf.replicas}})},
                     {"paths", bpve::to_json(p)}};
            emit(common, dump(std::move(doc), common, start));
            return exit_ok;
        }

        if (repro->parsed()) {
            if (list) {
                for (auto const& id : bpve::catalogue_ids()) {
                    out << id << '\n';
                }
                emit(common, out.str());
                return exit_ok;
            }
            if (example.empty()) {
                throw bpve::SchemaError("reproduce needs an example id (see --list)");
            }
            bpve::ReproduceOptions ro;
            ro.seed = simf.seed;
            ro.replica_scale = replica_scale;
            ro.threads = simf.threads;
            bpve::Report report;
            try {
                report = bpve::reproduce(example, ro);
            } catch (std::out_of_range const& e) {
                throw bpve::SchemaError(e.what());
            }
            if (csv) {
                out << "check,result,detail\n";
                for (auto const& c : report.checks) {
                    out << '"' << c.name << "\"," << (c.pass ? "PASS" : "FAIL") << ",\"" << c.detail
                        << "\"\n";
                }
            } else {
                json doc{{"meta", meta("reproduce", nullptr, ro.seed,
                                       {{"id", example}, {"replica_scale", replica_scale}})},
                         {"report", bpve::to_json(report)}};
                out << dump(std::move(doc), common, start);
            }
            emit(common, out.str());
            return report.pass() ? exit_ok : exit_failed;
        }
    } catch (bpve::SchemaError const& e) {
        std::cerr << "bpve: " << e.what() << "\n";
        return exit_input;
    } catch (bpve::ContradictionError const& e) {
        std::cerr << "bpve: contradiction: " << e.what() << "\n";
        return exit_contradiction;
    } catch (std::invalid_argument const& e) {
        std::cerr << "bpve: " << e.what() << "\n";
        return exit_input;
    } catch (std::domain_error const& e) {
        std::cerr << "bpve: " << e.what() << "\n";
        return exit_input;
    } catch (bpve::OverflowError const& e) {
        std::cerr << "bpve: " << e.what() << "\n";
        return exit_input;
    }
    return exit_ok;
}
