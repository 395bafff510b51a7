#include "chemosched/instance_gen.hpp"

#include "chemosched/errors.hpp"
#include "chemosched/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemosched {

ClassModel ClassModel::default_mix() {
    ClassModel m;
    m.classes = {
        {0.2696, 0, 14, 16, 44},
        {0.0785, 6, 35, 29, 80},
        {0.3333, 8, 26, 74, 132},
        {0.3186, 6, 27, 125, 217},
    };
    return m;
}

void ClassModel::validate() const {
    if (classes.empty()) throw std::invalid_argument("class model has no classes");
    double sum = 0.0;
    for (const auto& c : classes) {
        if (c.probability <= 0.0) throw std::invalid_argument("class probabilities must be positive");
        if (c.premed_lo < 0 || c.premed_hi < c.premed_lo || c.infusion_lo < 0 ||
            c.infusion_hi < c.infusion_lo)
            throw std::invalid_argument("class duration ranges must be well formed");
        sum += c.probability;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("class probabilities must sum to 1");
}

int draw_class(const ClassModel& model, double u) {
    double cum = 0.0;
    for (std::size_t k = 0; k < model.classes.size(); ++k) {
        cum += model.classes[k].probability;
        if (u < cum) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(model.classes.size());
}

double estimated_overtime(const ClassModel& model, const std::vector<int>& class_ids,
                          int num_chairs, int shift_length) {
    double total = 0.0;
    for (int c : class_ids) total += model.classes[c - 1].mean_total();
    return std::max(0.0, total / num_chairs - shift_length);
}

Instance generate_instance(const ClassModel& model, const GenSpec& spec) {
    model.validate();
    if (spec.num_patients < 1 || spec.num_scenarios < 1)
        throw std::invalid_argument("need at least one patient and one scenario");
    if (!spec.class_ids.empty() &&
        static_cast<int>(spec.class_ids.size()) != spec.num_patients)
        throw std::invalid_argument("pinned class list must match the patient count");
    for (int c : spec.class_ids)
        if (c < 1 || c > static_cast<int>(model.classes.size()))
            throw std::invalid_argument("pinned class id out of range");

    Rng rng(spec.seed);

    std::vector<int> classes = spec.class_ids;
    if (classes.empty()) {
        classes.resize(spec.num_patients);
        for (int tries = 0;; ++tries) {
            if (tries >= 1000)
                throw GenerationExhausted("no class mix hit the overtime target in 1000 draws");
            for (int i = 0; i < spec.num_patients; ++i)
                classes[i] = draw_class(model, rng.uniform01());
            if (!spec.target_overtime) break;
            double est = estimated_overtime(model, classes, spec.num_chairs, spec.shift_length);
            if (std::abs(est - *spec.target_overtime) <= 30.0) break;
        }
    }

    Instance inst;
    inst.label = spec.label.empty()
                     ? std::to_string(spec.instance_number) + "_" +
                           std::to_string(spec.num_patients) + "_" +
                           std::to_string(spec.num_scenarios)
                     : spec.label;
    inst.num_nurses = spec.num_nurses;
    inst.num_chairs = spec.num_chairs;
    inst.shift_length = spec.shift_length;
    inst.overtime_limit = spec.overtime_limit;
    inst.patients.resize(spec.num_patients);
    for (int i = 0; i < spec.num_patients; ++i) inst.patients[i] = {i, classes[i]};

    // Draw order is part of the file format contract: scenarios outermost,
    // patients inner, pre-med before infusion.
    inst.scenarios.resize(spec.num_scenarios);
    const double p = 1.0 / spec.num_scenarios;
    for (auto& scen : inst.scenarios) {
        scen.probability = p;
        scen.premed.resize(spec.num_patients);
        scen.infusion.resize(spec.num_patients);
        for (int i = 0; i < spec.num_patients; ++i) {
            const ClassSpec& c = model.classes[classes[i] - 1];
            scen.premed[i] = rng.uniform_int(c.premed_lo, c.premed_hi);
            scen.infusion[i] = rng.uniform_int(c.infusion_lo, c.infusion_hi);
        }
    }
    inst.validate();
    return inst;
}

std::vector<Instance> fixture_instances() {
    // Class counts (class 1..4) per benchmark day, eight patients each.
    static const int counts[10][4] = {
        {2, 1, 1, 4}, {1, 3, 0, 4}, {1, 2, 1, 4}, {2, 1, 2, 3}, {1, 2, 1, 4},
        {1, 1, 3, 3}, {1, 2, 2, 3}, {1, 1, 3, 3}, {1, 2, 1, 4}, {2, 1, 1, 4},
    };
    ClassModel model = ClassModel::default_mix();
    std::vector<Instance> out;
    for (int k = 0; k < 10; ++k) {
        GenSpec spec;
        spec.instance_number = k + 1;
        spec.seed = 101 + static_cast<std::uint64_t>(k);
        for (int c = 0; c < 4; ++c)
            for (int r = 0; r < counts[k][c]; ++r) spec.class_ids.push_back(c + 1);
        out.push_back(generate_instance(model, spec));
    }
    return out;
}

} // namespace chemosched
