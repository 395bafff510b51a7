#include "chemosched/types.hpp"

#include "chemosched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace chemosched {

int Instance::default_big_m() const {
    long long sum = 0;
    for (const auto& p : patients) {
        int worst = 0;
        for (const auto& sc : scenarios)
            worst = std::max(worst, sc.premed[p.id] + sc.infusion[p.id]);
        sum += worst;
    }
    return static_cast<int>(shift_length + overtime_limit + sum);
}

Scenario Instance::mean_scenario() const {
    Scenario mean;
    mean.probability = 1.0;
    const int n = num_patients();
    mean.premed.resize(n);
    mean.infusion.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0, t = 0.0;
        for (const auto& sc : scenarios) {
            s += sc.probability * sc.premed[i];
            t += sc.probability * sc.infusion[i];
        }
        mean.premed[i] = static_cast<int>(std::llround(s));
        mean.infusion[i] = static_cast<int>(std::llround(t));
    }
    return mean;
}

void Instance::validate() const {
    if (patients.empty()) throw InfeasibleSchedule("instance has no patients");
    if (scenarios.empty()) throw InfeasibleSchedule("instance has no scenarios");
    if (num_nurses < 1 || num_chairs < 1)
        throw InfeasibleSchedule("instance needs at least one nurse and one chair");
    if (shift_length <= 0 || overtime_limit < 0)
        throw InfeasibleSchedule("shift length must be positive and overtime limit non-negative");
    const int n = num_patients();
    for (int i = 0; i < n; ++i) {
        if (patients[i].id != i)
            throw InfeasibleSchedule("patient ids must be dense 0..n-1 in order");
    }
    double psum = 0.0;
    for (const auto& sc : scenarios) {
        if (static_cast<int>(sc.premed.size()) != n || static_cast<int>(sc.infusion.size()) != n)
            throw InfeasibleSchedule("scenario duration arrays must match patient count");
        if (sc.probability <= 0.0)
            throw InfeasibleSchedule("scenario probabilities must be positive");
        for (int i = 0; i < n; ++i) {
            if (sc.premed[i] < 0 || sc.infusion[i] < 0)
                throw InfeasibleSchedule("durations must be non-negative");
        }
        psum += sc.probability;
    }
    if (std::abs(psum - 1.0) > 1e-6)
        throw InfeasibleSchedule("scenario probabilities must sum to 1");
}

long long SecondStageOutcome::total_wait() const {
    return std::accumulate(wait.begin(), wait.end(), 0LL);
}

long long SecondStageOutcome::total_overtime() const {
    return std::accumulate(overtime.begin(), overtime.end(), 0LL);
}

long long SecondStageOutcome::total_idle() const {
    return std::accumulate(idle.begin(), idle.end(), 0LL);
}

std::vector<Violation> validate(const FirstStageSchedule& schedule, const Instance& inst) {
    std::vector<Violation> out;
    const int n = inst.num_patients();
    if (static_cast<int>(schedule.sequence.size()) != n ||
        static_cast<int>(schedule.appointment.size()) != n) {
        out.push_back({Violation::Kind::SizeMismatch, -1,
                       "sequence and appointment arrays must cover every patient"});
        return out;
    }
    std::vector<char> seen(n, 0);
    for (int id : schedule.sequence) {
        if (id < 0 || id >= n || seen[id]) {
            out.push_back({Violation::Kind::NotAPermutation, id,
                           "sequence must be a permutation of patient ids"});
            return out;
        }
        seen[id] = 1;
    }
    const int hi = inst.latest_appointment();
    for (int i = 0; i < n; ++i) {
        if (schedule.appointment[i] < 0 || schedule.appointment[i] > hi) {
            std::ostringstream msg;
            msg << "appointment for patient " << i << " outside [0, " << hi << "]";
            out.push_back({Violation::Kind::RangeViolation, i, msg.str()});
        }
    }
    for (int k = 1; k < n; ++k) {
        int prev = schedule.sequence[k - 1], cur = schedule.sequence[k];
        if (schedule.appointment[cur] < schedule.appointment[prev]) {
            std::ostringstream msg;
            msg << "appointment times must be non-decreasing along the sequence (patient "
                << cur << " before patient " << prev << ")";
            out.push_back({Violation::Kind::PrecedenceViolation, cur, msg.str()});
        }
    }
    return out;
}

void require_valid(const FirstStageSchedule& schedule, const Instance& inst) {
    auto violations = validate(schedule, inst);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "invalid schedule:";
    for (std::size_t k = 0; k < violations.size() && k < 3; ++k)
        msg << " [" << violations[k].message << "]";
    throw InfeasibleSchedule(msg.str());
}

double objective_value(const SecondStageOutcome& outcome, const ObjectiveWeights& w) {
    return w.wait * static_cast<double>(outcome.total_wait()) +
           w.overtime * static_cast<double>(outcome.total_overtime()) +
           w.idle * static_cast<double>(outcome.total_idle());
}

} // namespace chemosched
