#include "chemosched/evaluator.hpp"

#include "chemosched/errors.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <sstream>

namespace chemosched {

ScenarioEvaluator::ScenarioEvaluator(const Instance& inst, EvaluatorConfig cfg)
    : inst_(&inst), cfg_(cfg) {
    nurse_free_.resize(inst.num_nurses);
    nurse_maxd_.resize(inst.num_nurses);
    chair_free_.resize(inst.num_chairs);
    chair_lastd_.resize(inst.num_chairs);
    chair_busy_.resize(inst.num_chairs);
    chair_count_.resize(inst.num_chairs);
    if (cfg_.nurse_capacity) observed_.resize(inst.num_nurses);
}

EvalSums ScenarioEvaluator::sums(const std::vector<int>& sequence, const int* appointment,
                                 const Scenario& scen) {
    return run(sequence, appointment, scen, nullptr);
}

EvalSums ScenarioEvaluator::run(const std::vector<int>& sequence, const int* appointment,
                                const Scenario& scen, SecondStageOutcome* detail) {
    const Instance& inst = *inst_;
    const int N = inst.num_nurses, C = inst.num_chairs;
    const int n = static_cast<int>(sequence.size());
    std::fill(nurse_free_.begin(), nurse_free_.end(), 0);
    std::fill(nurse_maxd_.begin(), nurse_maxd_.end(), 0);
    std::fill(chair_free_.begin(), chair_free_.end(), 0);
    std::fill(chair_lastd_.begin(), chair_lastd_.end(), 0);
    std::fill(chair_busy_.begin(), chair_busy_.end(), 0);
    std::fill(chair_count_.begin(), chair_count_.end(), 0);
    for (auto& obs : observed_) obs.clear();

    const bool capped = cfg_.nurse_capacity.has_value();
    const int cap = capped ? *cfg_.nurse_capacity : INT_MAX;

    EvalSums out;
    int prev_start = 0;
    for (int k = 0; k < n; ++k) {
        const int j = sequence[k];
        const int s = scen.premed[j], t = scen.infusion[j];
        int st, bn, bc;
        if (!capped) {
            bn = 0;
            for (int x = 1; x < N; ++x)
                if (nurse_free_[x] < nurse_free_[bn]) bn = x;
            bc = 0;
            for (int x = 1; x < C; ++x)
                if (chair_free_[x] < chair_free_[bc]) bc = x;
            st = std::max(appointment[j], prev_start);
            st = std::max(st, nurse_free_[bn]);
            st = std::max(st, chair_free_[bc]);
        } else {
            // Scan candidate start times upward until some nurse is both past
            // her pre-med and under the observation cap and a chair is free.
            st = std::max(appointment[j], prev_start);
            for (;;) {
                bn = -1;
                for (int x = 0; x < N; ++x) {
                    if (nurse_free_[x] > st) continue;
                    int live = 0;
                    for (int d : observed_[x])
                        if (d > st) ++live;
                    if (live >= cap) continue;
                    if (bn < 0 || nurse_free_[x] < nurse_free_[bn]) bn = x;
                }
                bc = -1;
                for (int x = 0; x < C; ++x)
                    if (chair_free_[x] <= st && (bc < 0 || chair_free_[x] < chair_free_[bc]))
                        bc = x;
                if (bn >= 0 && bc >= 0) break;
                int next = INT_MAX;
                for (int x = 0; x < N; ++x)
                    if (nurse_free_[x] > st) next = std::min(next, nurse_free_[x]);
                for (int x = 0; x < C; ++x)
                    if (chair_free_[x] > st) next = std::min(next, chair_free_[x]);
                for (const auto& obs : observed_)
                    for (int d : obs)
                        if (d > st) next = std::min(next, d);
                st = next;
            }
        }
        const int d = st + s + t;
        nurse_free_[bn] = st + s;
        nurse_maxd_[bn] = std::max(nurse_maxd_[bn], d);
        chair_free_[bc] = d;
        chair_lastd_[bc] = d;
        chair_busy_[bc] += s + t;
        ++chair_count_[bc];
        if (capped) observed_[bn].push_back(d);
        out.wait += st - appointment[j];
        prev_start = st;
        if (detail) {
            detail->start[j] = st;
            detail->wait[j] = st - appointment[j];
            detail->discharge[j] = d;
            detail->nurse_of[j] = bn;
            detail->chair_of[j] = bc;
        }
    }

    const int H = inst.shift_length, L = inst.overtime_limit;
    for (int x = 0; x < N; ++x) {
        const int ot = std::max(0, nurse_maxd_[x] - H);
        out.overtime += ot;
        out.max_overtime = std::max(out.max_overtime, ot);
        if (detail) detail->overtime.push_back(ot);
    }
    out.feasible = out.max_overtime <= L;
    for (int x = 0; x < C; ++x) {
        const int id = chair_count_[x] == 0 ? H : std::max(H, chair_lastd_[x]) - chair_busy_[x];
        out.idle += id;
        if (detail) detail->idle.push_back(id);
    }
    return out;
}

SecondStageOutcome evaluate(const FirstStageSchedule& schedule, const Scenario& scen,
                            const Instance& inst, const ObjectiveWeights& w,
                            const EvaluatorConfig& cfg) {
    require_valid(schedule, inst);
    const int n = inst.num_patients();
    SecondStageOutcome out;
    out.start.resize(n);
    out.wait.resize(n);
    out.discharge.resize(n);
    out.nurse_of.resize(n);
    out.chair_of.resize(n);
    ScenarioEvaluator ev(inst, cfg);
    EvalSums sums = ev.run(schedule.sequence, schedule.appointment.data(), scen, &out);
    std::sort(out.overtime.begin(), out.overtime.end(), std::greater<int>());
    out.feasible = sums.feasible;
    out.objective = sums.weighted(w);
    if (cfg.strict && !sums.feasible) {
        std::ostringstream msg;
        msg << "nurse overtime " << sums.max_overtime << " exceeds limit "
            << inst.overtime_limit;
        throw OvertimeLimitExceeded(msg.str());
    }
    return out;
}

SecondStageOutcome brute_force_second_stage(const FirstStageSchedule& schedule,
                                            const Scenario& scen, const Instance& inst,
                                            const ObjectiveWeights& w) {
    require_valid(schedule, inst);
    const int n = inst.num_patients();
    const int N = inst.num_nurses, C = inst.num_chairs;
    if (n > 7 || N > 3 || C > 4)
        throw InstanceTooLarge("assignment enumeration limited to 7 patients, 3 nurses, 4 chairs");

    const int H = inst.shift_length, L = inst.overtime_limit;
    std::vector<int> na(n, 0), ca(n, 0);
    std::vector<int> best_na, best_ca;
    double best = -1.0;

    std::vector<int> nurse_end(N), nurse_maxd(N), chair_end(C), chair_busy(C), chair_cnt(C);
    auto cost_of = [&](const std::vector<int>& nv, const std::vector<int>& cv) {
        std::fill(nurse_end.begin(), nurse_end.end(), 0);
        std::fill(nurse_maxd.begin(), nurse_maxd.end(), 0);
        std::fill(chair_end.begin(), chair_end.end(), 0);
        std::fill(chair_busy.begin(), chair_busy.end(), 0);
        std::fill(chair_cnt.begin(), chair_cnt.end(), 0);
        long long wait = 0;
        int prev = 0;
        for (int k = 0; k < n; ++k) {
            const int j = schedule.sequence[k];
            const int s = scen.premed[j], t = scen.infusion[j];
            int st = std::max({schedule.appointment[j], prev, nurse_end[nv[k]], chair_end[cv[k]]});
            const int d = st + s + t;
            nurse_end[nv[k]] = st + s;
            nurse_maxd[nv[k]] = std::max(nurse_maxd[nv[k]], d);
            chair_end[cv[k]] = d;
            chair_busy[cv[k]] += s + t;
            ++chair_cnt[cv[k]];
            wait += st - schedule.appointment[j];
            prev = st;
        }
        long long ot = 0, idle = 0;
        for (int x = 0; x < N; ++x) ot += std::max(0, nurse_maxd[x] - H);
        for (int x = 0; x < C; ++x)
            idle += chair_cnt[x] == 0 ? H : std::max(H, chair_end[x]) - chair_busy[x];
        return w.wait * static_cast<double>(wait) + w.overtime * static_cast<double>(ot) +
               w.idle * static_cast<double>(idle);
    };

    for (;;) {
        double c = cost_of(na, ca);
        if (best < 0.0 || c < best) {
            best = c;
            best_na = na;
            best_ca = ca;
        }
        int k = 0;
        while (k < n && ++ca[k] == C) ca[k++] = 0;
        if (k == n) {
            k = 0;
            while (k < n && ++na[k] == N) na[k++] = 0;
            if (k == n) break;
        }
    }

    SecondStageOutcome out;
    out.start.resize(n);
    out.wait.resize(n);
    out.discharge.resize(n);
    out.nurse_of.resize(n);
    out.chair_of.resize(n);
    std::fill(nurse_end.begin(), nurse_end.end(), 0);
    std::fill(nurse_maxd.begin(), nurse_maxd.end(), 0);
    std::fill(chair_end.begin(), chair_end.end(), 0);
    std::fill(chair_busy.begin(), chair_busy.end(), 0);
    std::fill(chair_cnt.begin(), chair_cnt.end(), 0);
    int prev = 0;
    for (int k = 0; k < n; ++k) {
        const int j = schedule.sequence[k];
        const int s = scen.premed[j], t = scen.infusion[j];
        int st = std::max({schedule.appointment[j], prev, nurse_end[best_na[k]], chair_end[best_ca[k]]});
        const int d = st + s + t;
        nurse_end[best_na[k]] = st + s;
        nurse_maxd[best_na[k]] = std::max(nurse_maxd[best_na[k]], d);
        chair_end[best_ca[k]] = d;
        chair_busy[best_ca[k]] += s + t;
        ++chair_cnt[best_ca[k]];
        out.start[j] = st;
        out.wait[j] = st - schedule.appointment[j];
        out.discharge[j] = d;
        out.nurse_of[j] = best_na[k];
        out.chair_of[j] = best_ca[k];
        prev = st;
    }
    int max_ot = 0;
    for (int x = 0; x < N; ++x) {
        const int ot = std::max(0, nurse_maxd[x] - H);
        out.overtime.push_back(ot);
        max_ot = std::max(max_ot, ot);
    }
    std::sort(out.overtime.begin(), out.overtime.end(), std::greater<int>());
    for (int x = 0; x < C; ++x)
        out.idle.push_back(chair_cnt[x] == 0 ? H : std::max(H, chair_end[x]) - chair_busy[x]);
    out.objective = best;
    out.feasible = max_ot <= L;
    return out;
}

double expected_objective(const FirstStageSchedule& schedule, const Instance& inst,
                          const ObjectiveWeights& w, const EvaluatorConfig& cfg) {
    require_valid(schedule, inst);
    ScenarioEvaluator ev(inst, cfg);
    double total = 0.0;
    for (const auto& scen : inst.scenarios) {
        EvalSums sums = ev.sums(schedule.sequence, schedule.appointment.data(), scen);
        if (cfg.strict && !sums.feasible) {
            std::ostringstream msg;
            msg << "nurse overtime " << sums.max_overtime << " exceeds limit "
                << inst.overtime_limit;
            throw OvertimeLimitExceeded(msg.str());
        }
        total += scen.probability * sums.weighted(w);
    }
    return total;
}

double expected_objective(
    const FirstStageSchedule& schedule, const Instance& inst, const ObjectiveWeights& w,
    const std::function<SecondStageOutcome(const FirstStageSchedule&, int)>& eval_scenario) {
    double total = 0.0;
    for (int k = 0; k < inst.num_scenarios(); ++k) {
        SecondStageOutcome out = eval_scenario(schedule, k);
        total += inst.scenarios[k].probability * objective_value(out, w);
    }
    return total;
}

std::vector<std::vector<int>> nurse_load_profile(const SecondStageOutcome& outcome,
                                                 const Scenario& scen, const Instance& inst) {
    (void)scen;
    int horizon = inst.shift_length;
    for (int d : outcome.discharge) horizon = std::max(horizon, d);
    std::vector<std::vector<int>> profile(inst.num_nurses, std::vector<int>(horizon, 0));
    for (int i = 0; i < inst.num_patients(); ++i) {
        auto& row = profile[outcome.nurse_of[i]];
        for (int tau = outcome.start[i]; tau < outcome.discharge[i]; ++tau) ++row[tau];
    }
    return profile;
}

} // namespace chemosched
