#pragma once

#include "chemosched/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace chemosched {

// Augmented-objective parameters for one scenario subproblem. With default
// members the penalty vanishes and the plain weighted objective is solved.
struct PenaltyTerms {
    std::vector<double> mu;        // multiplier per patient, empty means all zero
    double rho = 0.0;              // proximal weight
    std::vector<double> consensus; // target appointment per patient
    // Operating points of the outer linearization of a^2, per patient. Null or
    // empty pools fall back to the exact square.
    const std::vector<std::vector<int>>* cuts = nullptr;

    bool active() const;
};

// Pointwise maximum of tangents of a^2 at the operating points; equals the
// exact square when the pool is empty. Never exceeds a^2.
double square_underestimate(const std::vector<int>& operating_points, int a);

// Weighted recourse objective plus multiplier and linearized proximal terms.
// The overtime cap is not enforced here.
double penalized_cost(const FirstStageSchedule& schedule, const Scenario& scen,
                      const Instance& inst, const ObjectiveWeights& w,
                      const PenaltyTerms& terms);

// Per-scenario overtime floor: the busiest nurse works at least the average
// chair load past the shift end, whatever the schedule.
double overtime_lb(const Scenario& scen, const Instance& inst);

enum class SubproblemMode { Exhaustive, LocalSearch };

struct SubproblemOptions {
    SubproblemMode mode = SubproblemMode::LocalSearch;
    // Starting order for local search; empty means longest total duration first.
    std::vector<int> seed_sequence;
    const FirstStageSchedule* warm_start = nullptr;
    int restarts = 3; // additional random restarts for local search
    std::uint64_t rng_seed = 0;
    // Per-patient pinned appointment values, -1 when free. Sequences keep the
    // pinned patients ordered by their pinned times.
    const std::vector<int>* fixed_appointment = nullptr;
    std::ostream* sequence_log = nullptr; // CSV dump of explored sequences
    std::string log_prefix;               // prepended to every dump row
};

struct SubproblemSolution {
    FirstStageSchedule schedule;
    double base_objective = 0.0;      // weighted wait + overtime + idle
    double penalized_objective = 0.0; // base plus penalty terms
    double ot_idle = 0.0;             // overtime + idle part of the base objective
    long long evaluations = 0;
};

// Minimizes the penalized cost over sequences and integer appointment times
// for one scenario, honoring the overtime cap. Exhaustive mode enumerates all
// sequences (at most 8 patients, throws InstanceTooLarge beyond); local search
// uses swap and reinsertion moves with nested integer timing descent. Throws
// Infeasible when no explored sequence can meet the overtime cap.
SubproblemSolution solve_subproblem(const Scenario& scen, const Instance& inst,
                                    const ObjectiveWeights& w, const PenaltyTerms& terms = {},
                                    const SubproblemOptions& opts = {});

} // namespace chemosched
