#pragma once

#include "chemosched/subproblem.hpp"
#include "chemosched/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace chemosched {

struct LphaConfig {
    double alpha = 2.0;     // penalty growth/shrink factor
    double rho0 = 1e-4;     // initial proximal weight
    double rho_u1 = 0.1;    // penalty cap while iteration <= iterlimit
    double rho_u2 = 1.0;    // penalty cap afterwards
    int iterlimit = 100;    // iteration at which the cap switches
    int fix_start_iter = 50;   // earliest iteration for cycle-based fixing
    double fix_fraction = 0.8; // agreement mass that pins a patient outright
    int cycle_window = 3;      // hash history length compared for cycling
    double cycle_threshold = 1e-4;
    int max_iterations = 500;
    int threads = 1;
    SubproblemMode subproblem_mode = SubproblemMode::LocalSearch;
    int restarts = 3; // random restarts for the first-iteration subproblems
    // Appointment refinement budget for the best candidate sequences before the
    // final schedule is chosen; 0 returns raw incumbents.
    int polish_budget = 5000;
    // Debug dump of every sequence the subproblems touch; forces one thread.
    std::ostream* sequence_log = nullptr;

    void validate() const;
};

// Inputs of one penalty update step, exposed for direct testing.
struct PenaltyUpdateInputs {
    double rho = 0.0; // current value
    double alpha = 2.0;
    double rho_u1 = 0.1;
    double rho_u2 = 1.0;
    int iteration = 2; // first update happens at iteration 2
    int iterlimit = 100;
    double delta_p = 0.0, prev_delta_p = 0.0; // consensus drift, this and last
    double delta_d = 0.0, prev_delta_d = 0.0; // scenario spread, this and last
};

// Grow the penalty (uncapped single step) while scenario spread worsens below
// the cap, jump to the cap when already past it, shrink while the consensus
// drifts, otherwise hold or clamp to the cap.
double update_penalty(const PenaltyUpdateInputs& in);

// True when the most recent hash of this patient stays within threshold of
// every one of the previous window-1 hashes.
bool is_cycling(const std::vector<std::vector<double>>& hash_history, int patient, int window,
                double threshold);

// Probability-weighted mode; ties resolved toward the smallest value.
std::pair<int, double> weighted_mode(const std::vector<int>& values,
                                     const std::vector<double>& probabilities);

struct FixEvent {
    int iteration = 0;
    int patient = 0;
    int value = 0;
    bool from_cycle = false; // false: agreement-mass rule
};

struct RunReport {
    std::string label;
    ObjectiveWeights weights;
    double objective = 0.0; // expected objective of the reported schedule
    double ewt = 0.0;       // expected total waiting
    double eot = 0.0;       // expected total overtime
    double eit = 0.0;       // expected total chair idle
    int iterations = 0;
    bool converged = false;
    double wall_time_sec = 0.0;
    std::uint64_t seed = 0;

    FirstStageSchedule schedule;

    std::vector<double> rho_trace;       // value used in each iteration
    std::vector<double> delta_p_trace;
    std::vector<double> delta_d_trace;
    std::vector<double> objective_trace; // incumbent expected objective
    std::vector<double> disagreement_trace; // max scenario spread of any patient
    std::vector<int> fixed_count_trace;
    std::vector<FixEvent> fix_events;

    // Solver-quality bookkeeping, not hard failures.
    int lower_bound_defects = 0;     // overtime+idle dips below the round-1 floor
    double worst_lower_bound_gap = 0.0;
    double max_multiplier_imbalance = 0.0; // max |sum_w p*mu| seen
    int cap_violations = 0; // scenarios where the final schedule breaks the cap
};

// Progressive hedging with linearized proximal terms over the scenario
// subproblems. Never throws on non-convergence: the report carries the best
// incumbent and converged=false instead.
RunReport run_lpha(const Instance& inst, const ObjectiveWeights& w, const LphaConfig& cfg,
                   std::uint64_t seed);

} // namespace chemosched
