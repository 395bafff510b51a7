#include "chemosched/lpha.hpp"

#include "chemosched/errors.hpp"
#include "chemosched/evaluator.hpp"
#include "chemosched/heuristics.hpp"
#include "chemosched/parallel.hpp"
#include "chemosched/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace chemosched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void LphaConfig::validate() const {
    if (alpha <= 1.0) throw std::invalid_argument("alpha must exceed 1");
    if (rho0 <= 0.0) throw std::invalid_argument("rho0 must be positive");
    if (rho_u1 <= 0.0 || rho_u2 < rho_u1)
        throw std::invalid_argument("penalty caps must satisfy 0 < rho_u1 <= rho_u2");
    if (iterlimit < 1 || max_iterations < 1 || fix_start_iter < 1)
        throw std::invalid_argument("iteration limits must be positive");
    if (fix_fraction <= 0.5 || fix_fraction > 1.0)
        throw std::invalid_argument("fix fraction must lie in (0.5, 1]");
    if (cycle_window < 2) throw std::invalid_argument("cycle window needs at least 2 entries");
    if (cycle_threshold <= 0.0) throw std::invalid_argument("cycle threshold must be positive");
    if (threads < 1) throw std::invalid_argument("thread count must be positive");
    if (restarts < 0) throw std::invalid_argument("restart count cannot be negative");
    if (polish_budget < 0) throw std::invalid_argument("polish budget cannot be negative");
}

double update_penalty(const PenaltyUpdateInputs& in) {
    const double cap = in.iteration <= in.iterlimit ? in.rho_u1 : in.rho_u2;
    if (in.delta_d > in.prev_delta_d) {
        if (in.rho < cap) return in.rho * in.alpha;
        return cap;
    }
    if (in.delta_p > in.prev_delta_p) return in.rho / in.alpha;
    if (in.rho <= cap) return in.rho;
    return cap;
}

bool is_cycling(const std::vector<std::vector<double>>& hash_history, int patient, int window,
                double threshold) {
    const int m = static_cast<int>(hash_history.size());
    if (m < window) return false;
    const double last = hash_history[m - 1][patient];
    for (int k = 1; k < window; ++k)
        if (std::abs(last - hash_history[m - 1 - k][patient]) >= threshold) return false;
    return true;
}

std::pair<int, double> weighted_mode(const std::vector<int>& values,
                                     const std::vector<double>& probabilities) {
    if (values.empty() || values.size() != probabilities.size())
        throw std::invalid_argument("mode needs matching non-empty value and probability lists");
    std::map<int, double> mass;
    for (std::size_t k = 0; k < values.size(); ++k) mass[values[k]] += probabilities[k];
    int best_v = mass.begin()->first;
    double best_m = mass.begin()->second;
    for (const auto& [v, m] : mass) {
        if (m > best_m) { // ties keep the smallest value, map iterates ascending
            best_v = v;
            best_m = m;
        }
    }
    return {best_v, best_m};
}

namespace {

struct Incumbent {
    FirstStageSchedule schedule;
    double cost = kInf;
    bool feasible = false;
    bool set = false;
};

// Expected objective plus cap feasibility across all scenarios.
std::pair<double, bool> score_schedule(const FirstStageSchedule& sched, const Instance& inst,
                                       const ObjectiveWeights& w, ScenarioEvaluator& ev) {
    double total = 0.0;
    bool feasible = true;
    for (const auto& scen : inst.scenarios) {
        EvalSums sums = ev.sums(sched.sequence, sched.appointment.data(), scen);
        if (sums.max_overtime > inst.overtime_limit) feasible = false;
        total += scen.probability * sums.weighted(w);
    }
    return {total, feasible};
}

void consider(Incumbent& inc, const FirstStageSchedule& sched, const Instance& inst,
              const ObjectiveWeights& w, ScenarioEvaluator& ev) {
    auto [cost, feasible] = score_schedule(sched, inst, w, ev);
    const bool better = !inc.set || (feasible && !inc.feasible) ||
                        (feasible == inc.feasible && cost < inc.cost - 1e-12);
    if (better) {
        inc.schedule = sched;
        inc.cost = cost;
        inc.feasible = feasible;
        inc.set = true;
    }
}

// Patients ordered by consensus value (ties by id), appointments rounded.
FirstStageSchedule schedule_from_consensus(const std::vector<double>& consensus,
                                           const Instance& inst) {
    const int n = inst.num_patients();
    FirstStageSchedule s;
    s.sequence.resize(n);
    std::iota(s.sequence.begin(), s.sequence.end(), 0);
    std::stable_sort(s.sequence.begin(), s.sequence.end(), [&](int x, int y) {
        if (consensus[x] != consensus[y]) return consensus[x] < consensus[y];
        return x < y;
    });
    s.appointment.resize(n);
    const int hmax = inst.latest_appointment();
    for (int i = 0; i < n; ++i)
        s.appointment[i] =
            std::clamp(static_cast<int>(std::llround(consensus[i])), 0, hmax);
    return s;
}

// A scenario's order with consensus times, made monotone along that order.
FirstStageSchedule schedule_from_sequence(const std::vector<int>& seq,
                                          const std::vector<double>& consensus,
                                          const Instance& inst) {
    FirstStageSchedule s;
    s.sequence = seq;
    s.appointment.resize(seq.size());
    const int hmax = inst.latest_appointment();
    int lo = 0;
    for (int id : seq) {
        int v = std::clamp(static_cast<int>(std::llround(consensus[id])), 0, hmax);
        lo = std::max(lo, v);
        s.appointment[id] = lo;
    }
    return s;
}

} // namespace

RunReport run_lpha(const Instance& inst, const ObjectiveWeights& w, const LphaConfig& cfg,
                   std::uint64_t seed) {
    inst.validate();
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int n = inst.num_patients();
    const int S = inst.num_scenarios();
    const int threads = cfg.sequence_log ? 1 : cfg.threads;

    RunReport rep;
    rep.label = inst.label;
    rep.weights = w;
    rep.seed = seed;

    std::vector<FirstStageSchedule> scen_sol(S);
    std::vector<SubproblemSolution> round(S);
    std::vector<std::vector<double>> mu(S, std::vector<double>(n, 0.0));
    std::vector<std::vector<std::vector<int>>> cuts(S, std::vector<std::vector<int>>(n));
    std::vector<double> consensus(n, 0.0), lb_otidle(S, 0.0);
    std::vector<int> fixed(n, -1);
    std::vector<std::vector<double>> hash_hist;
    double rho = cfg.rho0;
    double prev_dp = 0.0, prev_dd = 0.0;

    // Scenario weights for the cycle hash, kept away from the probabilities.
    std::vector<double> z(S);
    {
        Rng zr(stream_seed(seed, 0x4A5BULL, 0));
        for (int s = 0; s < S; ++s) {
            do {
                z[s] = zr.uniform01();
            } while (z[s] == inst.scenarios[s].probability);
        }
    }

    ScenarioEvaluator scorer(inst);
    Incumbent inc;
    std::set<std::vector<int>> candidate_sequences;

    int v = 0;
    bool converged = false;
    while (v < cfg.max_iterations) {
        ++v;
        if (v >= 2) {
            // Linearization pool grows by last round's points until it repeats.
            for (int s = 0; s < S; ++s)
                for (int i = 0; i < n; ++i) {
                    auto& pool = cuts[s][i];
                    const int pt = scen_sol[s].appointment[i];
                    if (std::find(pool.begin(), pool.end(), pt) == pool.end())
                        pool.push_back(pt);
                }
        }

        std::exception_ptr sub_error;
        std::mutex err_mutex;
        std::vector<char> no_sequence(S, 0);
        auto solve_one = [&](int s, const std::vector<int>* seed_seq) {
            PenaltyTerms terms;
            SubproblemOptions o;
            o.mode = cfg.subproblem_mode;
            o.rng_seed = stream_seed(seed, static_cast<std::uint64_t>(s) + 1, v);
            o.fixed_appointment = &fixed;
            o.sequence_log = cfg.sequence_log;
            if (cfg.sequence_log) {
                std::ostringstream pre;
                pre << v << "," << s << ",";
                o.log_prefix = pre.str();
            }
            if (v == 1) {
                o.restarts = cfg.restarts;
                if (seed_seq) o.seed_sequence = *seed_seq;
            } else {
                o.warm_start = &scen_sol[s];
                o.restarts = 0;
                terms.mu = mu[s];
                terms.rho = rho;
                terms.consensus = consensus;
                terms.cuts = &cuts[s];
            }
            round[s] = solve_subproblem(inst.scenarios[s], inst, w, terms, o);
        };
        parallel_for(S, threads, [&](int s) {
            try {
                solve_one(s, nullptr);
            } catch (const Infeasible&) {
                no_sequence[s] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!sub_error) sub_error = std::current_exception();
            }
        });
        if (sub_error) std::rethrow_exception(sub_error);
        if (std::find(no_sequence.begin(), no_sequence.end(), 1) != no_sequence.end()) {
            // A scenario without a cap-satisfying sequence must not abort the
            // whole decomposition while its siblings still have solutions.
            const int donor =
                static_cast<int>(std::find(no_sequence.begin(), no_sequence.end(), 0) -
                                 no_sequence.begin());
            if (v == 1 && donor == S)
                throw Infeasible("no scenario admits a sequence within the overtime cap");
            for (int s = 0; s < S; ++s) {
                if (!no_sequence[s]) continue;
                if (v == 1) {
                    try {
                        solve_one(s, &round[donor].schedule.sequence);
                    } catch (const Infeasible&) {
                        // The scenario has no cap-satisfying sequence in reach.
                        // Adopt the donor's schedule; the cap accounting at the
                        // end still reports any violation it causes.
                        round[s].schedule = round[donor].schedule;
                        round[s].ot_idle = 0.0; // weak but valid bound
                    }
                } else {
                    round[s].schedule = scen_sol[s]; // keep last round's answer
                    round[s].ot_idle = lb_otidle[s];
                }
            }
        }

        for (int s = 0; s < S; ++s) {
            scen_sol[s] = round[s].schedule;
            if (v == 1) {
                lb_otidle[s] = round[s].ot_idle;
            } else if (round[s].ot_idle < lb_otidle[s] - 1e-6) {
                ++rep.lower_bound_defects;
                rep.worst_lower_bound_gap =
                    std::max(rep.worst_lower_bound_gap, lb_otidle[s] - round[s].ot_idle);
            }
        }

        std::vector<double> old_consensus = consensus;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int s = 0; s < S; ++s)
                acc += inst.scenarios[s].probability * scen_sol[s].appointment[i];
            consensus[i] = fixed[i] >= 0 ? fixed[i] : acc;
        }

        double dp = 0.0;
        if (v >= 2)
            for (int i = 0; i < n; ++i) {
                const double d = consensus[i] - old_consensus[i];
                dp += d * d;
            }
        double dd = 0.0;
        double spread = 0.0;
        for (int i = 0; i < n; ++i) {
            int lo = scen_sol[0].appointment[i], hi = lo;
            for (int s = 0; s < S; ++s) {
                const int a = scen_sol[s].appointment[i];
                const double d = a - consensus[i];
                dd += d * d;
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
            spread = std::max(spread, static_cast<double>(hi - lo));
        }

        rep.rho_trace.push_back(rho);
        rep.delta_p_trace.push_back(dp);
        rep.delta_d_trace.push_back(dd);
        rep.disagreement_trace.push_back(spread);

        converged = true;
        for (int i = 0; i < n && converged; ++i) {
            if (fixed[i] >= 0) continue;
            for (int s = 1; s < S; ++s)
                if (scen_sol[s].appointment[i] != scen_sol[0].appointment[i]) {
                    converged = false;
                    break;
                }
        }

        {
            FirstStageSchedule agreed = schedule_from_consensus(consensus, inst);
            candidate_sequences.insert(agreed.sequence);
            consider(inc, agreed, inst, w, scorer);
        }
        {
            std::set<std::vector<int>> seen;
            for (int s = 0; s < S; ++s)
                if (seen.insert(scen_sol[s].sequence).second) {
                    candidate_sequences.insert(scen_sol[s].sequence);
                    consider(inc, schedule_from_sequence(scen_sol[s].sequence, consensus, inst),
                             inst, w, scorer);
                }
        }
        rep.objective_trace.push_back(inc.cost);
        rep.fixed_count_trace.push_back(
            static_cast<int>(std::count_if(fixed.begin(), fixed.end(), [](int f) { return f >= 0; })));

        if (converged || v == cfg.max_iterations) break;

        double rho_next = rho;
        if (v >= 2)
            rho_next = update_penalty({rho, cfg.alpha, cfg.rho_u1, cfg.rho_u2, v, cfg.iterlimit,
                                       dp, prev_dp, dd, prev_dd});

        for (int s = 0; s < S; ++s)
            for (int i = 0; i < n; ++i)
                mu[s][i] += rho * (scen_sol[s].appointment[i] - consensus[i]);
        for (int i = 0; i < n; ++i) {
            double imb = 0.0;
            for (int s = 0; s < S; ++s) imb += inst.scenarios[s].probability * mu[s][i];
            rep.max_multiplier_imbalance = std::max(rep.max_multiplier_imbalance, std::abs(imb));
        }

        std::vector<double> h(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int s = 0; s < S; ++s) h[i] += z[s] * mu[s][i];
        hash_hist.push_back(std::move(h));

        std::vector<int> vals(S);
        std::vector<double> probs(S);
        for (int s = 0; s < S; ++s) probs[s] = inst.scenarios[s].probability;
        for (int i = 0; i < n; ++i) {
            if (fixed[i] >= 0) continue;
            for (int s = 0; s < S; ++s) vals[s] = scen_sol[s].appointment[i];
            auto [mode_v, mass] = weighted_mode(vals, probs);
            bool fix_now = false;
            bool from_cycle = false;
            if (v >= 2 && mass >= cfg.fix_fraction - 1e-12) {
                fix_now = true;
            } else if (v >= cfg.fix_start_iter &&
                       is_cycling(hash_hist, i, cfg.cycle_window, cfg.cycle_threshold)) {
                fix_now = true;
                from_cycle = true;
            }
            if (fix_now) {
                fixed[i] = mode_v;
                consensus[i] = mode_v;
                for (int s = 0; s < S; ++s) scen_sol[s].appointment[i] = mode_v;
                rep.fix_events.push_back({v, i, mode_v, from_cycle});
            }
        }

        prev_dp = dp;
        prev_dd = dd;
        rho = rho_next;
    }

    if (cfg.polish_budget > 0) {
        // Give the most promising sequences the run visited the same caliber of
        // appointment refinement a standalone heuristic would get. The agreed
        // point still wins below unless a refined candidate is strictly better.
        std::vector<std::pair<double, const std::vector<int>*>> ranked;
        for (const auto& seq : candidate_sequences) {
            FirstStageSchedule cand = schedule_from_sequence(seq, consensus, inst);
            ranked.emplace_back(score_schedule(cand, inst, w, scorer).first, &seq);
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        constexpr std::size_t kPolished = 5;
        for (std::size_t k = 0; k < ranked.size() && k < kPolished; ++k) {
            std::vector<FirstStageSchedule> warm{
                schedule_from_sequence(*ranked[k].second, consensus, inst)};
            if (inc.set && inc.schedule.sequence == *ranked[k].second)
                warm.push_back(inc.schedule);
            try {
                consider(inc,
                         fixed_sequence_opt(inst, w, *ranked[k].second, {cfg.polish_budget}, &warm),
                         inst, w, scorer);
            } catch (const Infeasible&) {
                // No cap-feasible appointment vector for this sequence; keep looking.
            }
        }
    }

    rep.iterations = v;
    rep.converged = converged;
    rep.schedule = inc.set ? inc.schedule : schedule_from_consensus(consensus, inst);
    if (converged) {
        // The agreed point is the algorithm's answer unless a strictly better
        // incumbent was kept along the way.
        FirstStageSchedule agreed = schedule_from_consensus(consensus, inst);
        auto [cost, feasible] = score_schedule(agreed, inst, w, scorer);
        if (!inc.set || (feasible == inc.feasible && cost <= inc.cost + 1e-12) ||
            (feasible && !inc.feasible))
            rep.schedule = agreed;
    }

    ScenarioEvaluator ev(inst);
    double obj = 0.0, ewt = 0.0, eot = 0.0, eit = 0.0;
    for (const auto& scen : inst.scenarios) {
        EvalSums sums = ev.sums(rep.schedule.sequence, rep.schedule.appointment.data(), scen);
        obj += scen.probability * sums.weighted(w);
        ewt += scen.probability * static_cast<double>(sums.wait);
        eot += scen.probability * static_cast<double>(sums.overtime);
        eit += scen.probability * static_cast<double>(sums.idle);
        if (sums.max_overtime > inst.overtime_limit) ++rep.cap_violations;
    }
    rep.objective = obj;
    rep.ewt = ewt;
    rep.eot = eot;
    rep.eit = eit;
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace chemosched
