#pragma once

#include "chemosched/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace chemosched {

struct EvaluatorConfig {
    bool strict = false;               // throw OvertimeLimitExceeded instead of flagging
    std::optional<int> nurse_capacity; // max patients one nurse observes at a time
};

// Aggregate recourse costs without per-patient detail, for solver inner loops.
struct EvalSums {
    long long wait = 0;
    long long overtime = 0;
    long long idle = 0;
    int max_overtime = 0;
    bool feasible = true;

    double weighted(const ObjectiveWeights& w) const {
        return w.wait * static_cast<double>(wait) +
               w.overtime * static_cast<double>(overtime) +
               w.idle * static_cast<double>(idle);
    }
};

// Reusable workspace bound to one instance; safe to call millions of times
// without allocating. Not thread-safe, use one per thread.
class ScenarioEvaluator {
public:
    explicit ScenarioEvaluator(const Instance& inst, EvaluatorConfig cfg = {});

    // appointment is indexed by patient id and must respect the sequence order.
    EvalSums sums(const std::vector<int>& sequence, const int* appointment, const Scenario& scen);

    const Instance& instance() const { return *inst_; }

private:
    const Instance* inst_;
    EvaluatorConfig cfg_;
    std::vector<int> nurse_free_, nurse_maxd_;
    std::vector<int> chair_free_, chair_lastd_, chair_busy_, chair_count_;
    std::vector<std::vector<int>> observed_; // per nurse, discharge times in observation

    friend SecondStageOutcome evaluate(const FirstStageSchedule&, const Scenario&,
                                       const Instance&, const ObjectiveWeights&,
                                       const EvaluatorConfig&);
    EvalSums run(const std::vector<int>& sequence, const int* appointment, const Scenario& scen,
                 SecondStageOutcome* detail);
};

// Assigns each patient the first available nurse and chair in sequence order
// and derives waits, discharges, overtime and idle time. Throws
// InfeasibleSchedule on structural violations; in strict mode throws
// OvertimeLimitExceeded when a nurse exceeds the cap.
SecondStageOutcome evaluate(const FirstStageSchedule& schedule, const Scenario& scen,
                            const Instance& inst, const ObjectiveWeights& w = {},
                            const EvaluatorConfig& cfg = {});

// Enumerates every nurse and chair assignment and keeps the cheapest, as a
// reference for the first-available rule. Guarded to at most 7 patients,
// 3 nurses and 4 chairs; throws InstanceTooLarge beyond that. The overtime
// cap is not enforced during the search, only reported via `feasible`.
SecondStageOutcome brute_force_second_stage(const FirstStageSchedule& schedule,
                                            const Scenario& scen, const Instance& inst,
                                            const ObjectiveWeights& w = {});

// Probability-weighted objective across all scenarios of the instance.
double expected_objective(const FirstStageSchedule& schedule, const Instance& inst,
                          const ObjectiveWeights& w, const EvaluatorConfig& cfg = {});

// Variant with an injected per-scenario evaluator, for oracle cross-checks.
double expected_objective(
    const FirstStageSchedule& schedule, const Instance& inst, const ObjectiveWeights& w,
    const std::function<SecondStageOutcome(const FirstStageSchedule&, int)>& eval_scenario);

// Minute-resolution count of patients each nurse is observing, from pre-med
// start through discharge. Rows are nurses, columns minutes from day start.
std::vector<std::vector<int>> nurse_load_profile(const SecondStageOutcome& outcome,
                                                 const Scenario& scen, const Instance& inst);

} // namespace chemosched
