#include "chemosched/errors.hpp"
#include "chemosched/evaluator.hpp"
#include "chemosched/gantt.hpp"
#include "chemosched/heuristics.hpp"
#include "chemosched/instance_gen.hpp"
#include "chemosched/io.hpp"
#include "chemosched/lpha.hpp"
#include "chemosched/subproblem.hpp"
#include "chemosched/types.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace {

using namespace chemosched;

int default_threads() {
    if (const char* env = std::getenv("CHEMOSCHED_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

ObjectiveWeights parse_weights(const std::string& text) {
    std::istringstream is(text);
    ObjectiveWeights w;
    char c1 = 0, c2 = 0;
    if (!(is >> w.wait >> c1 >> w.overtime >> c2 >> w.idle) || c1 != ',' || c2 != ',')
        throw std::invalid_argument("weights must look like 0.3,0.3,0.4");
    if (w.wait < 0 || w.overtime < 0 || w.idle < 0)
        throw std::invalid_argument("weights must be non-negative");
    return w;
}

std::vector<double> parse_grid(const std::string& text) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo)
        throw std::invalid_argument("grid must look like 0.40:0.65:0.05");
    std::vector<double> out;
    for (double k = lo; k <= hi + 1e-9; k += step) out.push_back(k);
    return out;
}

std::pair<int, int> parse_range(const std::string& text) {
    int lo = 0, hi = 0;
    char c = 0;
    std::istringstream is(text);
    if (!(is >> lo)) throw std::invalid_argument("range must look like 1:3 or 4");
    if (is >> c >> hi) {
        if (c != ':' || hi < lo) throw std::invalid_argument("range must look like 1:3");
    } else {
        hi = lo;
    }
    return {lo, hi};
}

SequencingRule rule_from_name(std::string name) {
    for (auto& ch : name) ch = static_cast<char>(std::tolower(ch));
    if (name == "spt") return SequencingRule::SPT;
    if (name == "lpt") return SequencingRule::LPT;
    if (name == "var") return SequencingRule::VAR;
    if (name == "cov") return SequencingRule::CoV;
    throw std::invalid_argument("unknown rule: " + name + " (use spt, lpt, var, cov)");
}

const char* rule_name(SequencingRule r) {
    switch (r) {
    case SequencingRule::SPT: return "spt";
    case SequencingRule::LPT: return "lpt";
    case SequencingRule::VAR: return "var";
    case SequencingRule::CoV: return "cov";
    }
    return "?";
}

// Solver options shared by the solving subcommands: defaults, then values
// from --config, then explicit flags.
struct SolverFlags {
    double alpha = 2.0, rho0 = 1e-4, rho_u1 = 0.1, rho_u2 = 1.0;
    int iterlimit = 100, fix_start = 50, cycle_window = 3, max_iters = 500;
    double fix_frac = 0.8, cycle_threshold = 1e-4;
    int threads = default_threads(), restarts = 3, polish_budget = 5000;
    std::uint64_t seed = 0;
    bool exhaustive = false;
    std::string config_path;
    CLI::App* app = nullptr;

    void attach(CLI::App* sub) {
        app = sub;
        sub->add_option("--alpha", alpha, "penalty growth factor");
        sub->add_option("--rho0", rho0, "initial penalty weight");
        sub->add_option("--rho-u1", rho_u1, "penalty cap before --iterlimit");
        sub->add_option("--rho-u2", rho_u2, "penalty cap after --iterlimit");
        sub->add_option("--iterlimit", iterlimit, "iteration where the cap switches");
        sub->add_option("--fix-start", fix_start, "first iteration for cycle-based fixing");
        sub->add_option("--fix-frac", fix_frac, "agreement mass that pins a patient");
        sub->add_option("--cycle-window", cycle_window, "hash history window");
        sub->add_option("--cycle-threshold", cycle_threshold, "hash stability threshold");
        sub->add_option("--max-iters", max_iters, "iteration budget");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--threads", threads, "worker threads (env CHEMOSCHED_THREADS)");
        sub->add_option("--restarts", restarts, "random restarts in the first iteration");
        sub->add_option("--polish-budget", polish_budget,
                        "appointment refinement budget for the final schedule");
        sub->add_flag("--exhaustive-subproblems", exhaustive,
                      "enumerate sequences inside subproblems (small instances)");
        sub->add_option("--config", config_path, "JSON file with the same keys as these flags");
    }

    LphaConfig build() const {
        SolverFlags merged = *this;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw ParseError("cannot open: " + config_path);
            nlohmann::json j = nlohmann::json::parse(is, nullptr, true, true);
            auto get = [&](const char* key, auto& slot) {
                if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
            };
            get("alpha", merged.alpha);
            get("rho0", merged.rho0);
            get("rho_u1", merged.rho_u1);
            get("rho_u2", merged.rho_u2);
            get("iterlimit", merged.iterlimit);
            get("fix_start", merged.fix_start);
            get("fix_frac", merged.fix_frac);
            get("cycle_window", merged.cycle_window);
            get("cycle_threshold", merged.cycle_threshold);
            get("max_iters", merged.max_iters);
            get("threads", merged.threads);
            get("restarts", merged.restarts);
            get("polish_budget", merged.polish_budget);
            get("seed", merged.seed);
            // Explicit flags win over the config file.
            auto keep = [&](const char* flag, auto& slot, const auto& cli_value) {
                if (app->count(flag)) slot = cli_value;
            };
            keep("--alpha", merged.alpha, alpha);
            keep("--rho0", merged.rho0, rho0);
            keep("--rho-u1", merged.rho_u1, rho_u1);
            keep("--rho-u2", merged.rho_u2, rho_u2);
            keep("--iterlimit", merged.iterlimit, iterlimit);
            keep("--fix-start", merged.fix_start, fix_start);
            keep("--fix-frac", merged.fix_frac, fix_frac);
            keep("--cycle-window", merged.cycle_window, cycle_window);
            keep("--cycle-threshold", merged.cycle_threshold, cycle_threshold);
            keep("--max-iters", merged.max_iters, max_iters);
            keep("--threads", merged.threads, threads);
            keep("--restarts", merged.restarts, restarts);
            keep("--polish-budget", merged.polish_budget, polish_budget);
            keep("--seed", merged.seed, seed);
        }
        LphaConfig cfg;
        cfg.alpha = merged.alpha;
        cfg.rho0 = merged.rho0;
        cfg.rho_u1 = merged.rho_u1;
        cfg.rho_u2 = merged.rho_u2;
        cfg.iterlimit = merged.iterlimit;
        cfg.fix_start_iter = merged.fix_start;
        cfg.fix_fraction = merged.fix_frac;
        cfg.cycle_window = merged.cycle_window;
        cfg.cycle_threshold = merged.cycle_threshold;
        cfg.max_iterations = merged.max_iters;
        cfg.threads = merged.threads;
        cfg.restarts = merged.restarts;
        cfg.polish_budget = merged.polish_budget;
        cfg.subproblem_mode =
            merged.exhaustive ? SubproblemMode::Exhaustive : SubproblemMode::LocalSearch;
        cfg.validate();
        return cfg;
    }

    std::uint64_t final_seed() const {
        if (app->count("--seed") || config_path.empty()) return seed;
        std::ifstream is(config_path);
        nlohmann::json j = nlohmann::json::parse(is, nullptr, true, true);
        return j.contains("seed") ? j.at("seed").get<std::uint64_t>() : seed;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    return os;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark tool for stochastic chemotherapy appointment scheduling"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    int exit_code = 0;

    // generate
    auto* gen = app.add_subcommand("generate", "Sample a synthetic instance");
    struct {
        int patients = 8, scenarios = 50, nurses = 2, chairs = 4, shift = 240, limit = 180;
        int number = 1, target = -1;
        std::uint64_t seed = 0;
        std::string label, out;
    } g;
    gen->add_option("--patients", g.patients);
    gen->add_option("--scenarios", g.scenarios);
    gen->add_option("--nurses", g.nurses);
    gen->add_option("--chairs", g.chairs);
    gen->add_option("--shift", g.shift, "shift length in minutes");
    gen->add_option("--overtime-limit", g.limit);
    gen->add_option("--seed", g.seed);
    gen->add_option("--number", g.number, "instance number used in the default label");
    gen->add_option("--label", g.label);
    gen->add_option("--target-overtime", g.target,
                    "resample until the expected overtime is within 30 minutes of this");
    gen->add_option("--out", g.out)->required();
    gen->callback([&] {
        GenSpec spec;
        spec.num_patients = g.patients;
        spec.num_scenarios = g.scenarios;
        spec.num_nurses = g.nurses;
        spec.num_chairs = g.chairs;
        spec.shift_length = g.shift;
        spec.overtime_limit = g.limit;
        spec.seed = g.seed;
        spec.instance_number = g.number;
        spec.label = g.label;
        if (g.target >= 0) spec.target_overtime = g.target;
        Instance inst = generate_instance(ClassModel::default_mix(), spec);
        save_instance(inst, g.out);
        std::cout << "wrote " << g.out << " (" << inst.label << ")\n";
    });

    // fixtures
    auto* fix = app.add_subcommand("fixtures", "Write the ten benchmark instances");
    std::string fix_dir = "data/fixtures";
    fix->add_option("--out-dir", fix_dir);
    fix->callback([&] {
        std::filesystem::create_directories(fix_dir);
        for (const Instance& inst : fixture_instances()) {
            const std::string path = fix_dir + "/instance_" + inst.label + ".json";
            save_instance(inst, path);
            std::cout << "wrote " << path << "\n";
        }
    });

    // solve
    auto* solve = app.add_subcommand("solve", "Run the scenario-decomposition solver");
    struct {
        std::string instance, weights = "1,1,1";
        std::string out_report, out_schedule, trace, dump;
    } s;
    SolverFlags sf;
    solve->add_option("instance", s.instance)->required();
    solve->add_option("--weights", s.weights, "wait,overtime,idle");
    solve->add_option("--out-report", s.out_report);
    solve->add_option("--out-schedule", s.out_schedule);
    solve->add_option("--trace", s.trace, "per-iteration CSV");
    solve->add_option("--dump-sequences", s.dump, "debug CSV of every sequence explored");
    sf.attach(solve);
    solve->callback([&] {
        Instance inst = load_instance(s.instance);
        ObjectiveWeights w = parse_weights(s.weights);
        LphaConfig cfg = sf.build();
        std::ofstream dump;
        if (!s.dump.empty()) {
            dump = open_out(s.dump);
            dump << "iteration,scenario,sequence,penalized_cost\n";
            cfg.sequence_log = &dump;
        }
        RunReport rep = run_lpha(inst, w, cfg, sf.final_seed());
        if (!s.out_report.empty()) save_report(rep, s.out_report);
        if (!s.out_schedule.empty()) save_schedule(rep.schedule, s.out_schedule);
        if (!s.trace.empty()) {
            auto os = open_out(s.trace);
            write_trace_csv(os, rep);
        }
        std::cout << std::fixed << std::setprecision(2);
        std::cout << inst.label << ": objective " << rep.objective << " (wait " << rep.ewt
                  << ", overtime " << rep.eot << ", idle " << rep.eit << ") in "
                  << rep.iterations << " iterations, "
                  << (rep.converged ? "converged" : "no consensus") << ", "
                  << rep.wall_time_sec << "s\n";
        if (!rep.converged) exit_code = 2;
    });

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score a schedule against an instance");
    struct {
        std::string instance, schedule, weights = "1,1,1", out;
        int scenario = -1;
        bool strict = false;
    } e;
    eval->add_option("instance", e.instance)->required();
    eval->add_option("--schedule", e.schedule)->required();
    eval->add_option("--weights", e.weights);
    eval->add_option("--scenario", e.scenario, "write per-patient detail for this scenario");
    eval->add_flag("--strict", e.strict, "fail when the overtime cap is exceeded");
    eval->add_option("--out", e.out, "outcome CSV path (with --scenario)");
    eval->callback([&] {
        Instance inst = load_instance(e.instance);
        FirstStageSchedule sched = load_schedule(e.schedule);
        ObjectiveWeights w = parse_weights(e.weights);
        EvaluatorConfig cfg;
        cfg.strict = e.strict;
        std::cout << std::fixed << std::setprecision(4);
        if (e.scenario >= 0) {
            if (e.scenario >= inst.num_scenarios())
                throw std::invalid_argument("scenario index out of range");
            SecondStageOutcome out = evaluate(sched, inst.scenarios[e.scenario], inst, w, cfg);
            if (!e.out.empty()) {
                auto os = open_out(e.out);
                write_outcome_csv(os, sched, out);
            } else {
                write_outcome_csv(std::cout, sched, out);
            }
        } else {
            std::cout << "expected objective " << expected_objective(sched, inst, w, cfg)
                      << "\n";
        }
    });

    // compare-heuristics
    auto* cmp = app.add_subcommand("compare-heuristics",
                                   "Duration-hedged schedules under the sequencing rules");
    struct {
        std::vector<std::string> instances;
        std::string rules = "spt,lpt,var,cov", grid = "0.40:0.65:0.05", weights = "1,1,1", out;
        bool opt = false;
        bool descending = false;
        long long budget = 200000;
    } c;
    cmp->add_option("instances", c.instances)->required()->expected(-1);
    cmp->add_option("--rules", c.rules);
    cmp->add_option("--k", c.grid, "percentile grid lo:hi:step");
    cmp->add_option("--weights", c.weights);
    cmp->add_flag("--opt", c.opt, "also optimize appointments per rule");
    cmp->add_flag("--descending-percentile", c.descending,
                  "read percentiles from the top of the sample");
    cmp->add_option("--budget", c.budget, "evaluation budget for --opt");
    cmp->add_option("--out", c.out, "CSV path (default stdout)");
    cmp->callback([&] {
        ObjectiveWeights w = parse_weights(c.weights);
        std::vector<double> ks = parse_grid(c.grid);
        std::vector<SequencingRule> rules;
        std::istringstream rs(c.rules);
        std::string tok;
        while (std::getline(rs, tok, ',')) rules.push_back(rule_from_name(tok));
        std::ostringstream table;
        table << std::fixed << std::setprecision(4);
        table << "instance,rule,k,objective\n";
        for (const auto& path : c.instances) {
            Instance inst = load_instance(path);
            for (SequencingRule rule : rules) {
                std::vector<int> seq = sequence_patients(inst, rule);
                std::vector<FirstStageSchedule> hedged;
                for (double k : ks) {
                    HedgingConfig hc{k, c.descending};
                    hedged.push_back(job_hedging_schedule(inst, seq, hc));
                    table << inst.label << "," << rule_name(rule) << "," << k << ","
                          << expected_objective(hedged.back(), inst, w) << "\n";
                }
                if (c.opt) {
                    OptBudget budget{c.budget};
                    FirstStageSchedule best =
                        fixed_sequence_opt(inst, w, seq, budget, &hedged);
                    table << inst.label << "," << rule_name(rule) << ",opt,"
                          << expected_objective(best, inst, w) << "\n";
                }
            }
        }
        if (!c.out.empty())
            open_out(c.out) << table.str();
        else
            std::cout << table.str();
    });

    // vss
    auto* vss = app.add_subcommand("vss", "Mean-value schedule versus the stochastic solver");
    struct {
        std::vector<std::string> instances;
        std::string weights = "0.3,0.3,0.4", out;
    } vs;
    SolverFlags vsf;
    vss->add_option("instances", vs.instances)->required()->expected(-1);
    vss->add_option("--weights", vs.weights);
    vss->add_option("--out", vs.out);
    vsf.attach(vss);
    vss->callback([&] {
        ObjectiveWeights w = parse_weights(vs.weights);
        LphaConfig cfg = vsf.build();
        std::ostringstream table;
        table << std::fixed << std::setprecision(4);
        table << "instance,mean_value_objective,solver_objective,relative_vss_pct\n";
        double sum = 0.0;
        int count = 0;
        for (const auto& path : vs.instances) {
            Instance inst = load_instance(path);
            FirstStageSchedule mv = mean_value_schedule(inst, w);
            const double mv_cost = expected_objective(mv, inst, w);
            RunReport rep = run_lpha(inst, w, cfg, vsf.final_seed());
            const double vss_pct = rep.objective > 0.0
                                       ? 100.0 * (mv_cost - rep.objective) / rep.objective
                                       : 0.0;
            table << inst.label << "," << mv_cost << "," << rep.objective << "," << vss_pct
                  << "\n";
            sum += vss_pct;
            ++count;
        }
        table << "mean,,," << (count ? sum / count : 0.0) << "\n";
        if (!vs.out.empty())
            open_out(vs.out) << table.str();
        else
            std::cout << table.str();
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Solver runs across weights and capacities");
    struct {
        std::vector<std::string> instances;
        std::string lambdas = "1,1,1", nurses = "0", chairs = "0", out;
    } sw;
    SolverFlags swf;
    sweep->add_option("instances", sw.instances)->required()->expected(-1);
    sweep->add_option("--lambdas", sw.lambdas, "semicolon-separated weight triples");
    sweep->add_option("--nurses", sw.nurses, "range lo:hi, 0 keeps the instance value");
    sweep->add_option("--chairs", sw.chairs, "range lo:hi, 0 keeps the instance value");
    sweep->add_option("--out", sw.out);
    swf.attach(sweep);
    sweep->callback([&] {
        std::vector<ObjectiveWeights> weight_list;
        std::istringstream ls(sw.lambdas);
        std::string tok;
        while (std::getline(ls, tok, ';')) weight_list.push_back(parse_weights(tok));
        auto [n_lo, n_hi] = parse_range(sw.nurses);
        auto [c_lo, c_hi] = parse_range(sw.chairs);
        LphaConfig cfg = swf.build();
        std::ostringstream table;
        table << std::fixed << std::setprecision(4);
        table << "instance,nurses,chairs,w_wait,w_overtime,w_idle,objective,expected_waiting,"
                 "expected_overtime,expected_idle,iterations,converged,wall_time_sec\n";
        for (const auto& path : sw.instances) {
            Instance base = load_instance(path);
            for (int nn = n_lo; nn <= n_hi; ++nn) {
                for (int cc = c_lo; cc <= c_hi; ++cc) {
                    Instance inst = base;
                    if (nn > 0) inst.num_nurses = nn;
                    if (cc > 0) inst.num_chairs = cc;
                    for (const auto& w : weight_list) {
                        RunReport rep = run_lpha(inst, w, cfg, swf.final_seed());
                        table << inst.label << "," << inst.num_nurses << "," << inst.num_chairs
                              << "," << w.wait << "," << w.overtime << "," << w.idle << ","
                              << rep.objective << "," << rep.ewt << "," << rep.eot << ","
                              << rep.eit << "," << rep.iterations << "," << rep.converged
                              << "," << rep.wall_time_sec << "\n";
                    }
                }
            }
        }
        if (!sw.out.empty())
            open_out(sw.out) << table.str();
        else
            std::cout << table.str();
    });

    // gantt
    auto* gantt = app.add_subcommand("gantt", "Render one scenario outcome as SVG");
    struct {
        std::string instance, schedule, out, weights = "1,1,1";
        int scenario = 0;
    } ga;
    gantt->add_option("instance", ga.instance)->required();
    gantt->add_option("--schedule", ga.schedule)->required();
    gantt->add_option("--scenario", ga.scenario);
    gantt->add_option("--weights", ga.weights);
    gantt->add_option("--out", ga.out)->required();
    gantt->callback([&] {
        Instance inst = load_instance(ga.instance);
        FirstStageSchedule sched = load_schedule(ga.schedule);
        if (ga.scenario < 0 || ga.scenario >= inst.num_scenarios())
            throw std::invalid_argument("scenario index out of range");
        const Scenario& scen = inst.scenarios[ga.scenario];
        SecondStageOutcome out = evaluate(sched, scen, inst, parse_weights(ga.weights));
        std::ostringstream title;
        title << inst.label << ", scenario " << ga.scenario;
        open_out(ga.out) << render_gantt_svg(inst, sched, scen, out, title.str());
        std::cout << "wrote " << ga.out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return exit_code;
}
