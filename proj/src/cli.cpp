#include "bdm/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bdm/error.hpp"
#include "bdm/stats.hpp"

namespace bdm {

namespace {

using nlohmann::json;

// Errors raised before any simulation starts are configuration errors.
struct SetupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void validate_model(const ModelSpec& m, const RunConfig& rc)
{
    if (!rc.run.validate) {
        return;
    }
    try {
        m.validate(rc.seed, rc.run.validate_probes, rc.run.validate_max_count);
    } catch (const Error& e) {
        throw SetupError(e.what());
    }
}

std::string fmt(double v, int precision = 6)
{
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

json report_header(const RunConfig& rc, const char* record)
{
    json j;
    j["kind"] = record;
    j["command"] = command_name(rc.command);
    j["model_hash"] = rc.model_hash;
    j["seed"] = rc.seed;
    return j;
}

// ---------------------------------------------------------------------------

struct TrajectorySummary {
    std::optional<TrajectoryLog> log;
    std::size_t births = 0;
    std::size_t deaths = 0;
    std::size_t final_count = 0;
};

int cmd_simulate(const RunConfig& rc, std::ostream* rec, std::ostream& out)
{
    const ModelSpec& m = *rc.model;
    validate_model(m, rc);
    const Configuration x0 = rc.initial_state();
    SimulateOptions opts{rc.run.state_budget};
    auto runs = run_batch(rc.run.trials, rc.seed, [&](std::size_t i, std::uint64_t s) {
        TrajectoryLog log = simulate(m, x0, rc.run.horizon, rc.run.checkpoints, s, opts);
        TrajectorySummary t;
        for (const auto& e : log.events) {
            (e.kind == JumpType::Birth ? t.births : t.deaths) += 1;
        }
        t.final_count = count_at(log, rc.run.horizon);
        if (i < rc.run.log_trajectories) {
            t.log = std::move(log);
        }
        return t;
    });
    double births = 0, deaths = 0, final_n = 0;
    for (const auto& t : runs) {
        if (rec && t.log) {
            write_jsonl(*rec, *t.log, rc.model_hash);
        }
        births += static_cast<double>(t.births);
        deaths += static_cast<double>(t.deaths);
        final_n += static_cast<double>(t.final_count);
    }
    const double n = static_cast<double>(runs.size());
    out << "trajectories " << runs.size() << "\n"
        << "mean births " << fmt(births / n) << "\n"
        << "mean deaths " << fmt(deaths / n) << "\n"
        << "mean final count " << fmt(final_n / n) << "\n";
    return kExitOk;
}

int cmd_couple(const RunConfig& rc, std::ostream* rec, std::ostream& out)
{
    const ModelSpec& m = *rc.model;
    validate_model(m, rc);
    const Configuration x0 = rc.initial_state();
    const SimpleChainSpec& chain = rc.chain->chain;

    if (rec) {
        for (std::size_t i = 0; i < std::min(rc.run.log_trajectories, rc.run.trials); ++i) {
            auto log = simulate_coupled(m, chain, x0, rc.run.n0, rc.run.horizon, rc.run.checkpoints,
                                        derive_seed(rc.seed, i));
            write_jsonl(*rec, log, rc.model_hash);
        }
    }
    CouplingReport r = coupling_check(m, chain, x0, rc.run.n0, rc.run.times, rc.run.trials, rc.seed);

    json j = report_header(rc, "coupling_report");
    j["trajectories"] = r.trajectories;
    j["violations"] = r.violations;
    j["domination_expected"] = r.domination_expected;
    j["pass"] = r.pass;
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"t", row.t}, {"p_chain", row.p_chain}, {"p_process", row.p_process}});
    }
    if (rec) {
        *rec << j.dump() << '\n';
    }
    out << "trajectories " << r.trajectories << "\n";
    for (const auto& row : r.rows) {
        out << "t " << fmt(row.t) << "  p(eta' vs chain) " << fmt(row.p_chain, 4) << "  p(n(X') vs n(X)) "
            << fmt(row.p_process, 4) << "\n";
    }
    out << "domination violations " << r.violations << (r.domination_expected ? "" : " (not required: n(x0) > n0)")
        << "\n"
        << "coupling " << (r.pass ? "PASS" : "FAIL") << "\n";
    return r.pass ? kExitOk : kExitCheckFailed;
}

int cmd_check_ergodicity(const RunConfig& rc, std::ostream* rec, std::ostream& out)
{
    const ChainSettings& cs = *rc.chain;
    ErgodicityReport e = ergodicity_check(cs.chain, cs.n_probe);
    RateReport r = rate_condition_check(cs.chain, cs.gamma);

    json j = report_header(rc, "ergodicity_report");
    j["family"] = cs.chain.family;
    j["ergodicity"] = verdict_name(e.verdict);
    j["ergodicity_rationale"] = e.rationale;
    j["rate"] = verdict_name(r.verdict);
    j["rate_rationale"] = r.rationale;

    out << "family " << cs.chain.family << "\n" << "ergodicity " << verdict_name(e.verdict) << "\n";
    for (const auto& line : e.rationale) {
        out << "  " << line << "\n";
    }
    out << "rate " << verdict_name(r.verdict) << "\n";
    for (const auto& line : r.rationale) {
        out << "  " << line << "\n";
    }
    const bool ergodic = e.verdict == ErgodicityVerdict::Eq30 || e.verdict == ErgodicityVerdict::Eq31;
    if (ergodic) {
        double ret = expected_return_time(cs.chain);
        auto pi = stationary_distribution(cs.chain);
        j["expected_return_time"] = ret;
        j["stationary_head"] = std::vector<double>(pi.begin(), pi.begin() + std::min<std::ptrdiff_t>(pi.size(), 20));
        out << "E_0(s_0) " << fmt(ret, 10) << "\n" << "pi_0 " << fmt(pi.front(), 10) << "\n";
    }
    if (rec) {
        *rec << j.dump() << '\n';
    }
    if (ergodic) {
        return kExitOk;
    }
    return e.verdict == ErgodicityVerdict::Fails ? kExitCheckFailed : kExitInconclusive;
}

int cmd_gibbs_validate(const RunConfig& rc, std::ostream* rec, std::ostream& out)
{
    const ModelSpec& m = *rc.model;
    if (!std::holds_alternative<GibbsBirthKernel>(m.birth.kind())) {
        throw SetupError("gibbs-validate needs [birth].kernel = \"gibbs\"");
    }
    validate_model(m, rc);
    const GibbsSettings& g = *rc.gibbs;
    GibbsReport r = gibbs_invariance_check(m, g.burn_in, g.samples, rc.seed, g.options);

    json j = report_header(rc, "gibbs_report");
    j["samples"] = r.samples;
    j["oracle_vs_oracle"] = g.options.oracle_vs_oracle;
    j["count_tv"] = r.count_tv;
    j["nn_ks"] = r.nn_ks;
    j["mean_nn"] = r.mean_nn;
    j["oracle_mean_nn"] = r.oracle_mean_nn;
    j["count_law"] = r.count_law;
    j["oracle_count_law"] = r.oracle_count_law;
    j["pass"] = r.pass;
    if (rec) {
        *rec << j.dump() << '\n';
    }
    out << "samples " << r.samples << (g.options.oracle_vs_oracle ? " (oracle against oracle)" : "") << "\n"
        << "count TV " << fmt(r.count_tv, 4) << " (threshold " << fmt(g.options.tv_threshold) << ")\n"
        << "nearest-neighbour KS " << fmt(r.nn_ks, 4) << " (threshold " << fmt(g.options.ks_threshold) << ")\n"
        << "mean nn distance " << fmt(r.mean_nn, 5) << " vs oracle " << fmt(r.oracle_mean_nn, 5) << "\n"
        << "gibbs invariance " << (r.pass ? "PASS" : "FAIL") << "\n";
    return r.pass ? kExitOk : kExitCheckFailed;
}

int cmd_diagnose(const RunConfig& rc, std::ostream* rec, std::ostream& out)
{
    const DiagnoseSettings& d = *rc.diagnose;
    if (d.test_functions.empty()) {
        throw SetupError("empty test matrix: [diagnose].test_functions lists no test function");
    }
    for (const auto& v : d.variants) {
        validate_model(v.model, rc);
    }
    bool ok = true;
    for (std::size_t vi = 0; vi < d.variants.size(); ++vi) {
        const auto& v = d.variants[vi];
        const std::uint64_t vseed = derive_seed(rc.seed, vi);
        Configuration x = Configuration::from_points(v.model.domain, d.point);
        for (std::size_t fi = 0; fi < d.test_functions.size(); ++fi) {
            const auto& f = d.test_functions[fi];
            GeneratorReport g = generator_check(v.model, x, f, d.h, d.generator_trials, derive_seed(vseed, fi));
            ok = ok && g.pass;
            json j = report_header(rc, "generator_check");
            j["variant"] = v.name;
            j["test_function"] = test_function_name(f);
            for (const auto* e : {&g.coarse, &g.fine}) {
                j["steps"].push_back({{"h", e->h},
                                      {"lhs", e->lhs},
                                      {"rhs", e->rhs},
                                      {"residual", e->residual},
                                      {"stderr", e->stderr_},
                                      {"combined_stderr", e->combined_stderr},
                                      {"truncation", e->truncation}});
            }
            j["slope"] = g.slope;
            j["ratio"] = g.ratio;
            j["pass"] = g.pass;
            if (rec) {
                *rec << j.dump() << '\n';
            }
            out << std::left << std::setw(14) << v.name << std::setw(26) << test_function_name(f) << " residual "
                << std::setw(11) << fmt(g.coarse.residual, 4) << " -> " << std::setw(11) << fmt(g.fine.residual, 4)
                << " ratio " << std::setw(7) << fmt(g.ratio, 3) << (g.pass ? "PASS" : "FAIL") << "\n";
        }
        Configuration x0 = rc.initial_state();
        for (std::size_t ti = 0; ti < d.domination_times.size(); ++ti) {
            double t = d.domination_times[ti];
            DominationReport dr = poisson_domination_report(v.model, x0, t, d.domination_trials,
                                                            derive_seed(vseed, 1000 + ti));
            ok = ok && dr.violations == 0;
            json j = report_header(rc, "domination_report");
            j["variant"] = v.name;
            j["t"] = t;
            j["trials"] = dr.trials;
            j["violations"] = dr.violations;
            for (const auto& row : dr.rows) {
                j["rows"].push_back(
                    {{"n", row.n}, {"empirical", row.empirical}, {"bound", row.bound}, {"violated", row.violated}});
            }
            if (rec) {
                *rec << j.dump() << '\n';
            }
            out << std::left << std::setw(14) << v.name << "domination t=" << std::setw(13) << fmt(t)
                << " violations " << dr.violations << "\n";
        }
    }
    out << "diagnose " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

} // namespace

int run_command(const CliArgs& args, std::ostream& out, std::ostream& err)
{
    RunConfig rc;
    try {
        rc = load_config(args.config_path, args.command, Overrides{args.seed, args.trials});
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    out << "### resolved config (model_hash " << rc.model_hash << ")\n" << rc.echo << "### end resolved config\n";

    std::ofstream file;
    if (args.out_path) {
        std::ofstream echo(*args.out_path + ".resolved.toml", std::ios::binary);
        file.open(*args.out_path, std::ios::binary);
        if (!file || !echo) {
            err << "cannot write output '" << *args.out_path << "'\n";
            return kExitConfig;
        }
        echo << rc.echo;
    }
    std::ostream* rec = args.out_path ? &file : nullptr;

    try {
        int code = kExitInternal;
        switch (args.command) {
        case Command::Simulate: code = cmd_simulate(rc, rec, out); break;
        case Command::Couple: code = cmd_couple(rc, rec, out); break;
        case Command::CheckErgodicity: code = cmd_check_ergodicity(rc, rec, out); break;
        case Command::GibbsValidate: code = cmd_gibbs_validate(rc, rec, out); break;
        case Command::Diagnose: code = cmd_diagnose(rc, rec, out); break;
        }
        out.flush();
        return code;
    } catch (const SetupError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "runtime error: " << e.what() << "\n";
        return e.code() == Errc::ConfigError ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Birth-death-move process simulator and validator", "bdmove"};
    app.require_subcommand(1);
    CliArgs args;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    for (Command c : {Command::Simulate, Command::Couple, Command::CheckErgodicity, Command::GibbsValidate,
                      Command::Diagnose}) {
        CLI::App* sub = app.add_subcommand(command_name(c));
        sub->add_option("--config", args.config_path, "TOML run configuration")->required();
        sub->add_option("--out", args.out_path, "record output path (JSON lines)");
        sub->add_option("--seed", seed, "override the top-level seed");
        sub->add_option("--trials", trials, "override the command's trial count")->check(CLI::PositiveNumber);
        sub->callback([&args, c] { args.command = c; });
    }
    std::vector<const char*> cargv;
    for (const auto& a : argv) {
        cargv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed")) {
            args.seed = seed;
        }
        if (sub->count("--trials")) {
            args.trials = trials;
        }
    }
    return run_command(args, out, err);
}

} // namespace bdm
