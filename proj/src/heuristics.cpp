#include "chemosched/heuristics.hpp"

#include "chemosched/errors.hpp"
#include "chemosched/evaluator.hpp"
#include "chemosched/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace chemosched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

// Expected objective that is infinite when any scenario breaks the cap.
class CapAwareObjective {
public:
    CapAwareObjective(const Instance& inst, const ObjectiveWeights& w)
        : inst_(inst), w_(w), ev_(inst) {}

    long long evaluations = 0;

    double operator()(const std::vector<int>& seq, const int* a) {
        ++evaluations;
        double total = 0.0;
        for (const auto& scen : inst_.scenarios) {
            EvalSums sums = ev_.sums(seq, a, scen);
            if (sums.max_overtime > inst_.overtime_limit) return kInf;
            total += scen.probability * sums.weighted(w_);
        }
        return total;
    }

private:
    const Instance& inst_;
    const ObjectiveWeights& w_;
    ScenarioEvaluator ev_;
};

void zero_wait_under(const Scenario& scen, const Instance& inst, const std::vector<int>& seq,
                     std::vector<int>& a) {
    std::vector<int> nurse_free(inst.num_nurses, 0), chair_free(inst.num_chairs, 0);
    int prev = 0;
    for (int j : seq) {
        int earliest = std::max(*std::min_element(nurse_free.begin(), nurse_free.end()),
                                *std::min_element(chair_free.begin(), chair_free.end()));
        earliest = std::max(earliest, prev);
        a[j] = std::min(earliest, inst.latest_appointment());
        int bn = static_cast<int>(std::min_element(nurse_free.begin(), nurse_free.end()) -
                                  nurse_free.begin());
        int bc = static_cast<int>(std::min_element(chair_free.begin(), chair_free.end()) -
                                  chair_free.begin());
        nurse_free[bn] = earliest + scen.premed[j];
        chair_free[bc] = earliest + scen.premed[j] + scen.infusion[j];
        prev = earliest;
    }
}

} // namespace

std::vector<double> average_total_durations(const Instance& inst) {
    const int n = inst.num_patients();
    std::vector<double> avg(n, 0.0);
    for (const auto& scen : inst.scenarios)
        for (int i = 0; i < n; ++i) avg[i] += scen.premed[i] + scen.infusion[i];
    for (double& v : avg) v /= inst.num_scenarios();
    return avg;
}

std::vector<int> sequence_patients(const Instance& inst, SequencingRule rule) {
    const int n = inst.num_patients();
    std::vector<double> avg = average_total_durations(inst);
    std::vector<double> key(n, 0.0);
    switch (rule) {
    case SequencingRule::SPT:
        key = avg;
        break;
    case SequencingRule::LPT:
        for (int i = 0; i < n; ++i) key[i] = -avg[i];
        break;
    case SequencingRule::VAR:
    case SequencingRule::CoV: {
        std::vector<double> var(n, 0.0);
        for (const auto& scen : inst.scenarios)
            for (int i = 0; i < n; ++i) {
                const double d = scen.premed[i] + scen.infusion[i] - avg[i];
                var[i] += d * d;
            }
        for (double& v : var) v /= inst.num_scenarios();
        if (rule == SequencingRule::VAR) {
            key = var;
        } else {
            for (int i = 0; i < n; ++i)
                key[i] = avg[i] > 0.0 ? std::sqrt(var[i]) / avg[i] : kInf;
        }
        break;
    }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        if (key[x] != key[y]) return key[x] < key[y];
        return x < y;
    });
    return order;
}

int percentile_nearest_rank(std::vector<int> samples, double k, bool descending) {
    if (samples.empty()) throw std::invalid_argument("percentile of empty sample");
    std::sort(samples.begin(), samples.end());
    if (descending) std::reverse(samples.begin(), samples.end());
    const int n = static_cast<int>(samples.size());
    const int rank = std::clamp(static_cast<int>(std::ceil(k * n)), 1, n);
    return samples[rank - 1];
}

FirstStageSchedule job_hedging_schedule(const Instance& inst, const std::vector<int>& sequence,
                                        const HedgingConfig& cfg) {
    const int n = inst.num_patients();
    FirstStageSchedule out;
    out.sequence = sequence;
    out.appointment.assign(n, 0);

    // Per-class duration estimates from the pooled scenario draws.
    int max_class = 0;
    for (const auto& p : inst.patients) max_class = std::max(max_class, p.class_id);
    std::vector<int> est_premed(max_class + 1, 0), est_infusion(max_class + 1, 0);
    for (int c = 1; c <= max_class; ++c) {
        std::vector<int> pre, inf;
        for (const auto& p : inst.patients) {
            if (p.class_id != c) continue;
            for (const auto& scen : inst.scenarios) {
                pre.push_back(scen.premed[p.id]);
                inf.push_back(scen.infusion[p.id]);
            }
        }
        if (pre.empty()) continue;
        est_premed[c] = percentile_nearest_rank(pre, cfg.percentile, cfg.descending);
        est_infusion[c] = percentile_nearest_rank(inf, cfg.percentile, cfg.descending);
    }

    const int head = std::min(inst.num_nurses, inst.num_chairs);
    std::vector<int> nurse_free(inst.num_nurses, 0), chair_free(inst.num_chairs, 0);
    int prev = 0;
    for (int k = 0; k < n; ++k) {
        const int j = sequence[k];
        const int c = inst.patients[j].class_id;
        int bn = static_cast<int>(std::min_element(nurse_free.begin(), nurse_free.end()) -
                                  nurse_free.begin());
        int bc = static_cast<int>(std::min_element(chair_free.begin(), chair_free.end()) -
                                  chair_free.begin());
        int a = k < head ? 0 : std::max({prev, nurse_free[bn], chair_free[bc]});
        a = std::min(a, inst.latest_appointment());
        out.appointment[j] = a;
        const int st = std::max({a, prev, nurse_free[bn], chair_free[bc]});
        nurse_free[bn] = st + est_premed[c];
        chair_free[bc] = st + est_premed[c] + est_infusion[c];
        prev = st;
    }
    return out;
}

FirstStageSchedule fixed_sequence_opt(const Instance& inst, const ObjectiveWeights& w,
                                      const std::vector<int>& sequence, const OptBudget& budget,
                                      const std::vector<FirstStageSchedule>* extra_starts) {
    const int n = inst.num_patients();
    FirstStageSchedule probe{sequence, std::vector<int>(n, 0)};
    require_valid(probe, inst);

    std::vector<FirstStageSchedule> starts;
    {
        FirstStageSchedule s{sequence, std::vector<int>(n, 0)};
        zero_wait_under(inst.mean_scenario(), inst, sequence, s.appointment);
        starts.push_back(std::move(s));
    }
    starts.push_back(job_hedging_schedule(inst, sequence, HedgingConfig{0.5, false}));
    if (extra_starts) {
        for (const auto& s : *extra_starts) {
            if (s.sequence != sequence)
                throw std::invalid_argument("extra starts must share the fixed sequence");
            starts.push_back(s);
        }
    }

    CapAwareObjective cost(inst, w);
    FirstStageSchedule best = starts.front();
    double best_cost = kInf;
    for (const auto& s : starts) {
        double c = cost(s.sequence, s.appointment.data());
        if (c < best_cost) {
            best_cost = c;
            best = s;
        }
    }
    if (budget.max_evaluations <= 0) return best;
    if (std::isinf(best_cost))
        throw Infeasible("every starting point breaks the overtime cap in some scenario");

    const int hmax = inst.latest_appointment();
    std::vector<int>& a = best.appointment;
    bool improved = true;
    while (improved && cost.evaluations < budget.max_evaluations) {
        improved = false;
        for (int k = 0; k < n && cost.evaluations < budget.max_evaluations; ++k) {
            const int j = sequence[k];
            const int lo = k > 0 ? a[sequence[k - 1]] : 0;
            const int hi = k + 1 < n ? a[sequence[k + 1]] : hmax;
            if (lo >= hi) continue;
            auto try_point = [&](int x) {
                if (x < lo || x > hi || x == a[j]) return;
                const int prev_val = a[j];
                a[j] = x;
                double c = cost(sequence, a.data());
                if (c + kEps < best_cost) {
                    best_cost = c;
                    improved = true;
                } else {
                    a[j] = prev_val;
                }
            };
            try_point(lo);
            try_point(hi);
            for (int dir : {1, -1}) {
                int step = 1;
                while (cost.evaluations < budget.max_evaluations) {
                    const int nx = a[j] + dir * step;
                    if (nx < lo || nx > hi) {
                        if (step == 1) break;
                        step >>= 1;
                        continue;
                    }
                    const int prev_val = a[j];
                    a[j] = nx;
                    double c = cost(sequence, a.data());
                    if (c + kEps < best_cost) {
                        best_cost = c;
                        improved = true;
                        step <<= 1;
                    } else {
                        a[j] = prev_val;
                        if (step == 1) break;
                        step >>= 1;
                    }
                }
            }
        }
    }
    return best;
}

FirstStageSchedule mean_value_schedule(const Instance& inst, const ObjectiveWeights& w) {
    SubproblemOptions opts;
    opts.mode = inst.num_patients() <= 8 ? SubproblemMode::Exhaustive : SubproblemMode::LocalSearch;
    opts.restarts = 3;
    opts.rng_seed = 0x6D76ULL;
    return solve_subproblem(inst.mean_scenario(), inst, w, {}, opts).schedule;
}

} // namespace chemosched
