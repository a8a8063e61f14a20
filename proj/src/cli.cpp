#include "epibsl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "epibsl/config.hpp"
#include "epibsl/parallel.hpp"
#include "epibsl/verify.hpp"

namespace epibsl {

namespace {

namespace fs = std::filesystem;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_field(cells[i]);
        out_ << '\n';
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream out_;
};

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    int threads = 0;
    std::string suite = "all";
    std::optional<std::int64_t> trials;
    std::vector<double> mu;
};

RunConfig load(const Options& o) {
    RunConfig cfg = load_config(o.config);
    if (o.seed) cfg.master_seed = *o.seed;
    return cfg;
}

fs::path out_file(const Options& o, const std::string& name) {
    fs::create_directories(o.out);
    return fs::path(o.out) / name;
}

// Everything one replicate contributes to runs.csv and the regret curve.
struct ReplicateSummary {
    std::uint64_t seed = 0;
    std::optional<MuVec> mu;
    std::int64_t pulls1 = 0, pulls2 = 0;
    bool fail = false, strong_fail = false;
    std::int64_t considers_arm2 = 0;
    std::vector<double> regret;  // empty without a realized mu
    double ugap = 0.0;
};

std::vector<ReplicateSummary> run_replicates(const RunConfig& cfg, int threads, bool want_gap) {
    const FailureParams fp = cfg.failure_params();
    return map_replicates(cfg.replicates, threads, [&](std::int64_t r) {
        ReplicateSummary s;
        s.seed = replicate_seed(cfg.master_seed, r);
        const auto rec = run_simulation(cfg.instance, cfg.episodes, s.seed, cfg.mode);
        s.mu = rec.mu;
        s.pulls1 = rec.pulls(Action::Arm1);
        s.pulls2 = rec.pulls(Action::Arm2);
        s.considers_arm2 = considers_arm2_episodes(rec);
        if (rec.mu) {
            s.fail = detect_fail(rec, fp);
            s.strong_fail = detect_strong_fail(rec, fp);
            s.regret = pseudoregret(rec).cumulative;
            if (want_gap && rec.mu->mu1 != rec.mu->mu2) s.ugap = ugap(*rec.mu, cfg.instance);
        }
        return s;
    });
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    const auto reps = run_replicates(cfg, o.threads, false);
    const FailureParams fp = cfg.failure_params();
    CsvWriter runs(out_file(o, cfg.runs_csv),
                   {"replicate", "seed", "mu1", "mu2", "pulls1", "pulls2", "fail_c", "fail_N", "fail",
                    "strong_fail", "considers_arm2_episodes", "reg_final"});
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& s = reps[r];
        const bool has_mu = s.mu.has_value();
        runs.row({std::to_string(r), std::to_string(s.seed), has_mu ? num(s.mu->mu1) : "",
                  has_mu ? num(s.mu->mu2) : "", std::to_string(s.pulls1), std::to_string(s.pulls2),
                  num(fp.c), std::to_string(fp.N), has_mu ? std::to_string(s.fail) : "",
                  has_mu ? std::to_string(s.strong_fail) : "", std::to_string(s.considers_arm2),
                  has_mu ? num(s.regret.back()) : ""});
    }
    out << "wrote " << runs.path().string() << " (" << reps.size() << " replicates)\n";
    if (cfg.mode != SamplingMode::MuFirst) {
        out << "regret curve skipped: sequential_posterior runs have no realized mu\n";
        return kExitOk;
    }
    std::vector<std::vector<double>> curves;
    curves.reserve(reps.size());
    for (const auto& s : reps) curves.push_back(s.regret);
    const auto curve = average_curves(curves);
    CsvWriter reg(out_file(o, cfg.curve_csv), {"T", "breg_mean", "breg_stderr"});
    for (std::size_t t = 0; t < curve.mean.size(); ++t) {
        reg.row({std::to_string(t + 1), num(curve.mean[t]), num(curve.std_error[t])});
    }
    out << "wrote " << reg.path().string() << " (" << curve.mean.size() << " episodes)\n";
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    auto cells = expand_sweep(cfg, o.config);
    for (auto& c : cells) {
        if (o.seed) c.config.master_seed = *o.seed;
        if (c.config.mode != SamplingMode::MuFirst) {
            throw ConfigError(o.config + ": sampling_mode: sweeps need mu_first");
        }
    }
    std::vector<std::string> header;
    for (const auto& a : cfg.axes) header.push_back(a.name);
    for (const char* h : {"pr_fail", "reg_per_episode", "mean_ugap", "n_replicates"}) header.push_back(h);
    CsvWriter csv(out_file(o, cfg.sweep_csv), header);
    for (const auto& cell : cells) {
        const auto& cc = cell.config;
        const auto reps = run_replicates(cc, o.threads, true);
        // Regret per episode over the second half of the horizon.
        const auto T = static_cast<std::size_t>(cc.episodes);
        const std::size_t half = T / 2;
        double fails = 0.0, reg = 0.0, gap = 0.0;
        for (const auto& s : reps) {
            fails += s.fail;
            const double lo = half > 0 ? s.regret[half - 1] : 0.0;
            reg += (s.regret[T - 1] - lo) / static_cast<double>(T - half);
            gap += s.ugap;
        }
        const double R = static_cast<double>(reps.size());
        std::vector<std::string> row = cell.values;
        row.push_back(num(fails / R));
        row.push_back(num(reg / R));
        row.push_back(num(gap / R));
        row.push_back(std::to_string(reps.size()));
        csv.row(row);
    }
    out << "wrote " << csv.path().string() << " (" << cells.size() << " cells)\n";
    return kExitOk;
}

// Known suites, in the order "all" runs them.
const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{
        "no_pull_m2", "sym_general_m", "min_max", "general_f_m2",
        "worked_examples", "strong_failure_regret", "bounded_pulls"};
    return names;
}

std::vector<SimulationRecord> simulate_records(const Options& o, std::int64_t runs) {
    std::optional<RunConfig> cfg;
    if (!o.config.empty()) cfg = load(o);
    const Instance inst = cfg ? cfg->instance
                              : Instance::make({2, 2}, {1, 3}, AggregationFunction::min(2), 0.001);
    const std::int64_t T = cfg ? cfg->episodes : 200;
    const std::uint64_t master = o.seed ? *o.seed : cfg ? cfg->master_seed : 0;
    return map_replicates(runs, o.threads, [&](std::int64_t r) {
        return run_simulation(inst, T, replicate_seed(master, r));
    });
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    std::vector<std::string> selected;
    if (o.suite == "all") {
        selected = suite_names();
    } else {
        const auto& names = suite_names();
        if (std::find(names.begin(), names.end(), o.suite) == names.end()) {
            std::string list;
            for (const auto& n : names) list += " " + n;
            err << "unknown suite '" << o.suite << "'; choose one of:" << list << " all\n";
            return kExitConfig;
        }
        selected = {o.suite};
    }
    const std::uint64_t seed = o.seed.value_or(0);
    const std::int64_t lemma_trials = o.trials.value_or(10000);
    const std::int64_t sim_runs = o.trials.value_or(2000);

    std::vector<std::pair<std::string, CheckReport>> reports;
    std::optional<std::vector<SimulationRecord>> records;
    auto sims = [&]() -> const std::vector<SimulationRecord>& {
        if (!records) records = simulate_records(o, sim_runs);
        return *records;
    };
    for (const auto& suite : selected) {
        if (suite == "no_pull_m2") {
            reports.emplace_back(suite, check_no_pull_m2(lemma_trials, seed, o.threads));
        } else if (suite == "sym_general_m") {
            for (int m = 2; m <= 6; ++m) {
                reports.emplace_back(suite, check_no_pull_symmetric_general_m(m, lemma_trials, mix(seed, m), o.threads));
            }
        } else if (suite == "min_max") {
            for (int m = 2; m <= 5; ++m) {
                reports.emplace_back(suite, check_no_pull_min_max(AggregationFunction::min(m), lemma_trials,
                                                                  mix(seed, 100 + m), o.threads));
                reports.emplace_back(suite, check_no_pull_min_max(AggregationFunction::max(m), lemma_trials,
                                                                  mix(seed, 200 + m), o.threads));
            }
        } else if (suite == "general_f_m2") {
            reports.emplace_back(suite, check_no_pull_general_f_m2(lemma_trials, seed, o.threads));
        } else if (suite == "worked_examples") {
            reports.emplace_back(suite, reproduce_worked_examples());
        } else if (suite == "strong_failure_regret") {
            reports.emplace_back(suite, check_strong_failure_regret(sims()));
        } else if (suite == "bounded_pulls") {
            const auto& recs = sims();
            reports.emplace_back(suite, check_bounded_pulls(recs, default_variant(recs.front().instance)));
        }
    }

    const std::string file = o.config.empty() ? std::string("verify.csv") : load(o).verify_csv;
    CsvWriter csv(out_file(o, file), {"suite", "item", "trials", "violations", "excluded", "status", "value"});
    bool all_pass = true;
    for (const auto& [suite, rep] : reports) {
        const std::string status = rep.passed() ? "pass" : "fail";
        all_pass = all_pass && rep.passed();
        const auto t = std::to_string(rep.trials), v = std::to_string(rep.violations.size()),
                   x = std::to_string(rep.excluded);
        csv.row({suite, rep.name, t, v, x, status, ""});
        for (const auto& [k, val] : rep.observations) csv.row({suite, rep.name + "." + k, t, v, x, status, num(val)});
        out << (rep.passed() ? "PASS " : "FAIL ") << rep.name << "  trials=" << t << " excluded=" << x
            << " violations=" << v << '\n';
        for (const auto& note : rep.notes) out << "    note: " << note << '\n';
        for (std::size_t i = 0; i < rep.violations.size() && i < 5; ++i) {
            const auto& viol = rep.violations[i];
            err << "    violation: " << viol.input << " expected " << viol.expected << " observed "
                << viol.observed << '\n';
        }
    }
    out << "wrote " << csv.path().string() << '\n';
    return all_pass ? kExitOk : kExitVerifyFailed;
}

int cmd_solve(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    const PosteriorState s = cfg.posterior.value_or(cfg.instance.initial_state());
    const auto r = solve_posterior_optimal(s, cfg.instance);
    out << r.policy.pretty();
    out << "posterior utility: " << num(r.posterior_utility) << '\n';
    return kExitOk;
}

int cmd_gap(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load(o);
    std::optional<MuVec> mu = cfg.mu;
    if (!o.mu.empty()) mu = MuVec{o.mu.at(0), o.mu.at(1)};
    if (!mu) {
        err << "gap: give --mu MU1 MU2 or a \"mu\" entry in the config\n";
        return kExitConfig;
    }
    if (!(mu->mu1 >= 0 && mu->mu1 <= 1 && mu->mu2 >= 0 && mu->mu2 <= 1) || mu->mu1 == mu->mu2) {
        err << "gap: means must lie in [0, 1] and differ\n";
        return kExitConfig;
    }
    const auto& inst = cfg.instance;
    out << "ugap: " << num(ugap(*mu, inst)) << '\n';
    const int m = inst.m();
    const bool symmetric = inst.f().permutation_invariant();
    const auto same_as = [&](const AggregationFunction& g) {
        for (int k = 0; k <= m; ++k) {
            const double a = inst.f().is_symmetric() ? inst.f().at_count(k)
                                                     : inst.f()(k == 0 ? 0u : (1u << k) - 1u);
            if (std::abs(a - g.at_count(k)) > 1e-12) return false;
        }
        return true;
    };
    if (symmetric && same_as(validated(AggregationFunction::min(m)))) {
        out << "bound (min): " << num(ugap_bound_min(*mu, m, inst.cost())) << '\n';
    } else if (symmetric && same_as(validated(AggregationFunction::max(m)))) {
        out << "bound (max): " << num(ugap_bound_max(*mu, m, inst.cost())) << '\n';
    } else {
        out << "bound: none (closed forms exist only for f = min and f = max)\n";
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulator and checks for episodic Bayesian social learning with two arms and a skip action",
                 "epibsl"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", o.config, "JSON run configuration");
        if (config_required) c->required();
        c->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed (overrides the config)");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--threads", o.threads, "worker threads (default: EPIBSL_THREADS or all cores)");
    };
    auto* sim = app.add_subcommand("simulate", "run replicates and write runs.csv and regret_curve.csv");
    add_common(sim, true);
    auto* sweep = app.add_subcommand("sweep", "run every cell of the config's sweep grid and write sweep.csv");
    add_common(sweep, true);
    auto* ver = app.add_subcommand("verify", "run property suites and write verify.csv");
    add_common(ver, false);
    ver->add_option("--suite", o.suite, "suite name or 'all'")->capture_default_str();
    ver->add_option("--trials", o.trials, "instances per lemma suite (10000) or runs per simulation suite (2000)");
    auto* solve = app.add_subcommand("solve", "print the posterior-optimal policy for the config");
    add_common(solve, true);
    auto* gap = app.add_subcommand("gap", "print the utility gap for given means");
    add_common(gap, true);
    gap->add_option("--mu", o.mu, "realized means MU1 MU2")->expected(2);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(o, out);
        if (*sweep) return cmd_sweep(o, out);
        if (*ver) return cmd_verify(o, out, err);
        if (*solve) return cmd_solve(o, out);
        if (*gap) return cmd_gap(o, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace epibsl
