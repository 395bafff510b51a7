#pragma once

#include "chemosched/rng.hpp"
#include "chemosched/types.hpp"

#include <vector>

namespace testutil {

// Equiprobable-scenario instance from explicit duration tables.
inline chemosched::Instance make_instance(int nurses, int chairs, int shift, int limit,
                                          std::vector<std::vector<int>> premed,
                                          std::vector<std::vector<int>> infusion) {
    chemosched::Instance inst;
    inst.label = "test";
    inst.num_nurses = nurses;
    inst.num_chairs = chairs;
    inst.shift_length = shift;
    inst.overtime_limit = limit;
    const int n = static_cast<int>(premed.front().size());
    for (int i = 0; i < n; ++i) inst.patients.push_back({i, 1});
    const double p = 1.0 / static_cast<double>(premed.size());
    for (std::size_t s = 0; s < premed.size(); ++s)
        inst.scenarios.push_back({p, premed[s], infusion[s]});
    return inst;
}

inline chemosched::Instance random_instance(chemosched::Rng& rng, int n, int scenarios,
                                            int nurses, int chairs, int shift, int limit,
                                            int dur_lo, int dur_hi) {
    std::vector<std::vector<int>> premed(scenarios, std::vector<int>(n));
    std::vector<std::vector<int>> infusion(scenarios, std::vector<int>(n));
    for (int s = 0; s < scenarios; ++s)
        for (int i = 0; i < n; ++i) {
            premed[s][i] = rng.uniform_int(dur_lo, dur_hi);
            infusion[s][i] = rng.uniform_int(dur_lo, dur_hi);
        }
    return make_instance(nurses, chairs, shift, limit, premed, infusion);
}

// Random structurally valid schedule: random order, sorted random times.
inline chemosched::FirstStageSchedule random_schedule(chemosched::Rng& rng,
                                                      const chemosched::Instance& inst,
                                                      int max_time) {
    const int n = inst.num_patients();
    chemosched::FirstStageSchedule s;
    s.sequence.resize(n);
    for (int i = 0; i < n; ++i) s.sequence[i] = i;
    rng.shuffle(s.sequence);
    std::vector<int> times(n);
    for (int& t : times) t = rng.uniform_int(0, max_time);
    std::sort(times.begin(), times.end());
    s.appointment.resize(n);
    for (int k = 0; k < n; ++k) s.appointment[s.sequence[k]] = times[k];
    return s;
}

} // namespace testutil
