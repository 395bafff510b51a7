#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chemosched {

// All times are integer minutes from the start of the clinic day.

struct Patient {
    int id = 0;       // dense 0-based index, doubles as position in duration arrays
    int class_id = 0; // acuity class, 1-based to match the calibration tables
};

// One realization of uncertainty: per-patient pre-medication and infusion durations.
struct Scenario {
    double probability = 0.0;
    std::vector<int> premed;   // s_i, indexed by patient id
    std::vector<int> infusion; // t_i, indexed by patient id
};

struct ObjectiveWeights {
    double wait = 1.0;
    double overtime = 1.0;
    double idle = 1.0;
};

struct Instance {
    std::string label;
    int num_nurses = 1;
    int num_chairs = 1;
    int shift_length = 240;   // H
    int overtime_limit = 180; // L, max overtime per nurse
    std::vector<Patient> patients;
    std::vector<Scenario> scenarios;

    int num_patients() const { return static_cast<int>(patients.size()); }
    int num_scenarios() const { return static_cast<int>(scenarios.size()); }

    // Horizon bound: appointments live in [0, shift_length + overtime_limit].
    int latest_appointment() const { return shift_length + overtime_limit; }

    // H + L + sum over patients of the worst-scenario total duration.
    int default_big_m() const;

    // Scenario of per-patient expected durations rounded to nearest minute,
    // probability 1 (the mean-value problem input).
    Scenario mean_scenario() const;

    // Throws InfeasibleSchedule on structural problems (empty sets, bad sizes,
    // negative durations, probabilities not summing to one).
    void validate() const;
};

// First-stage decision: patient order plus integer appointment times.
struct FirstStageSchedule {
    std::vector<int> sequence;    // patient ids in service order
    std::vector<int> appointment; // a_i, indexed by patient id
};

// Recourse outcome for one scenario under a given first-stage schedule.
struct SecondStageOutcome {
    std::vector<int> start;     // pre-medication start, indexed by patient id
    std::vector<int> wait;      // start - appointment
    std::vector<int> discharge; // start + premed + infusion
    std::vector<int> nurse_of;  // assigned nurse index
    std::vector<int> chair_of;  // assigned chair index
    std::vector<int> overtime;  // per nurse, reported sorted non-increasing
    std::vector<int> idle;      // per chair, unused chairs idle a full shift
    double objective = 0.0;     // weighted wait + overtime + idle
    bool feasible = true;       // every nurse within the overtime cap

    long long total_wait() const;
    long long total_overtime() const;
    long long total_idle() const;
};

struct Violation {
    enum class Kind { SizeMismatch, NotAPermutation, RangeViolation, PrecedenceViolation };
    Kind kind;
    int patient = -1; // -1 when not tied to one patient
    std::string message;
};

// Structural checks only; resource feasibility is the evaluator's concern.
std::vector<Violation> validate(const FirstStageSchedule& schedule, const Instance& inst);

// Throws InfeasibleSchedule listing the first few violations.
void require_valid(const FirstStageSchedule& schedule, const Instance& inst);

double objective_value(const SecondStageOutcome& outcome, const ObjectiveWeights& w);

} // namespace chemosched
