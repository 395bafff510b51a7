#pragma once

#include "chemosched/types.hpp"

#include <vector>

namespace chemosched {

enum class SequencingRule { SPT, LPT, VAR, CoV };

// Unweighted per-patient mean of premed + infusion across scenarios.
std::vector<double> average_total_durations(const Instance& inst);

// Orders patient ids by the rule statistic, ties broken by id. CoV puts
// zero-mean patients last instead of dividing by zero.
std::vector<int> sequence_patients(const Instance& inst, SequencingRule rule);

// Nearest-rank percentile, k in (0, 1]. Ascending by default; the descending
// convention reads the rank from the top of the sorted sample instead.
int percentile_nearest_rank(std::vector<int> samples, double k, bool descending = false);

struct HedgingConfig {
    double percentile = 0.5;
    bool descending = false;
};

// Duration-hedged appointment times for a given order: per-class duration
// estimates at the chosen percentile, the first min(nurses, chairs) patients
// at time zero, later ones at the simulated earliest resource release.
FirstStageSchedule job_hedging_schedule(const Instance& inst, const std::vector<int>& sequence,
                                        const HedgingConfig& cfg = {});

struct OptBudget {
    long long max_evaluations = 200000; // expected-objective evaluations
};

// Integer coordinate descent on the expected objective with the order held
// fixed. Starts from the mean-duration zero-wait point, the median-hedged
// point, and any extra starts sharing the sequence; a zero budget returns the
// best start untouched. Candidates violating the overtime cap in any scenario
// are rejected; throws Infeasible when no candidate is feasible.
FirstStageSchedule fixed_sequence_opt(const Instance& inst, const ObjectiveWeights& w,
                                      const std::vector<int>& sequence, const OptBudget& budget = {},
                                      const std::vector<FirstStageSchedule>* extra_starts = nullptr);

// Deterministic-counterpart schedule: the scenario problem on mean durations,
// solved exactly for up to 8 patients.
FirstStageSchedule mean_value_schedule(const Instance& inst, const ObjectiveWeights& w);

} // namespace chemosched
