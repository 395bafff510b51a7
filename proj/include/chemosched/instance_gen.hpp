#pragma once

#include "chemosched/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chemosched {

// One acuity class: arrival probability and duration ranges in minutes.
struct ClassSpec {
    double probability = 0.0;
    int premed_lo = 0, premed_hi = 0;
    int infusion_lo = 0, infusion_hi = 0;

    double mean_total() const {
        return 0.5 * (premed_lo + premed_hi) + 0.5 * (infusion_lo + infusion_hi);
    }
};

struct ClassModel {
    std::vector<ClassSpec> classes; // class_id is 1-based index

    // Four-class mix calibrated from a year of infusion-center records.
    static ClassModel default_mix();

    void validate() const; // probabilities sum to 1, ranges well formed
};

struct GenSpec {
    int num_patients = 8;
    int num_scenarios = 50;
    int num_nurses = 2;
    int num_chairs = 4;
    int shift_length = 240;
    int overtime_limit = 180;
    std::uint64_t seed = 0;
    int instance_number = 1;
    std::string label; // empty: "<number>_<patients>_<scenarios>"
    // Resample the class mix until the mean-workload overtime estimate lands
    // within 30 minutes of this target; GenerationExhausted after 1000 tries.
    std::optional<int> target_overtime;
    std::vector<int> class_ids; // pinned composition, skips class sampling
};

// Cumulative-probability class draw from u in [0, 1); 1-based result.
int draw_class(const ClassModel& model, double u);

// Expected per-nurse overtime if work split evenly across chairs, from class
// mean durations only.
double estimated_overtime(const ClassModel& model, const std::vector<int>& class_ids,
                          int num_chairs, int shift_length);

// Samples classes (unless pinned) and integer durations for equiprobable
// scenarios. Identical spec and seed give an identical instance.
Instance generate_instance(const ClassModel& model, const GenSpec& spec);

// Ten reference 8-patient, 50-scenario instances with pinned class mixes and
// seeds, used by the benchmark suite.
std::vector<Instance> fixture_instances();

} // namespace chemosched
