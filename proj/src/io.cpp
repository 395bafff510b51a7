#include "chemosched/io.hpp"

#include "chemosched/errors.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

namespace chemosched {

using nlohmann::json;

namespace {

json must_get(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing key: ") + key);
    return *it;
}

void dump_to_file(const json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

json parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace

json instance_to_json(const Instance& inst) {
    json j;
    j["label"] = inst.label;
    j["num_nurses"] = inst.num_nurses;
    j["num_chairs"] = inst.num_chairs;
    j["shift_length"] = inst.shift_length;
    j["overtime_limit"] = inst.overtime_limit;
    j["patients"] = json::array();
    for (const auto& p : inst.patients)
        j["patients"].push_back({{"id", p.id}, {"class_id", p.class_id}});
    j["scenarios"] = json::array();
    for (const auto& s : inst.scenarios)
        j["scenarios"].push_back(
            {{"probability", s.probability}, {"premed", s.premed}, {"infusion", s.infusion}});
    return j;
}

Instance instance_from_json(const json& j) {
    Instance inst;
    try {
        inst.label = must_get(j, "label").get<std::string>();
        inst.num_nurses = must_get(j, "num_nurses").get<int>();
        inst.num_chairs = must_get(j, "num_chairs").get<int>();
        inst.shift_length = must_get(j, "shift_length").get<int>();
        inst.overtime_limit = must_get(j, "overtime_limit").get<int>();
        for (const auto& p : must_get(j, "patients")) {
            Patient pat;
            pat.id = must_get(p, "id").get<int>();
            pat.class_id = must_get(p, "class_id").get<int>();
            inst.patients.push_back(pat);
        }
        for (const auto& s : must_get(j, "scenarios")) {
            Scenario scen;
            scen.probability = must_get(s, "probability").get<double>();
            scen.premed = must_get(s, "premed").get<std::vector<int>>();
            scen.infusion = must_get(s, "infusion").get<std::vector<int>>();
            inst.scenarios.push_back(std::move(scen));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed instance: ") + e.what());
    }
    inst.validate();
    return inst;
}

Instance load_instance(const std::string& path) { return instance_from_json(parse_file(path)); }

void save_instance(const Instance& inst, const std::string& path) {
    dump_to_file(instance_to_json(inst), path);
}

json schedule_to_json(const FirstStageSchedule& s) {
    return json{{"sequence", s.sequence}, {"appointment", s.appointment}};
}

FirstStageSchedule schedule_from_json(const json& j) {
    FirstStageSchedule s;
    try {
        s.sequence = must_get(j, "sequence").get<std::vector<int>>();
        s.appointment = must_get(j, "appointment").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed schedule: ") + e.what());
    }
    return s;
}

FirstStageSchedule load_schedule(const std::string& path) {
    return schedule_from_json(parse_file(path));
}

void save_schedule(const FirstStageSchedule& s, const std::string& path) {
    dump_to_file(schedule_to_json(s), path);
}

void write_outcome_csv(std::ostream& os, const FirstStageSchedule& schedule,
                       const SecondStageOutcome& outcome) {
    os << "id,appointment,wait,start,discharge,nurse,chair\n";
    for (std::size_t k = 0; k < schedule.sequence.size(); ++k) {
        const int i = schedule.sequence[k];
        os << i << "," << schedule.appointment[i] << "," << outcome.wait[i] << ","
           << outcome.start[i] << "," << outcome.discharge[i] << "," << outcome.nurse_of[i]
           << "," << outcome.chair_of[i] << "\n";
    }
    const int last = outcome.discharge.empty()
                         ? 0
                         : *std::max_element(outcome.discharge.begin(), outcome.discharge.end());
    os << "total," << outcome.objective << "," << outcome.total_wait() << ",," << last << ","
       << outcome.total_overtime() << "," << outcome.total_idle() << "\n";
}

json report_to_json(const RunReport& rep) {
    json j;
    j["version"] = kVersion;
    j["label"] = rep.label;
    j["weights"] = {{"wait", rep.weights.wait},
                    {"overtime", rep.weights.overtime},
                    {"idle", rep.weights.idle}};
    j["objective"] = rep.objective;
    j["expected_waiting"] = rep.ewt;
    j["expected_overtime"] = rep.eot;
    j["expected_idle"] = rep.eit;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["wall_time_sec"] = rep.wall_time_sec;
    j["seed"] = rep.seed;
    j["schedule"] = schedule_to_json(rep.schedule);
    j["rho_trace"] = rep.rho_trace;
    j["delta_p_trace"] = rep.delta_p_trace;
    j["delta_d_trace"] = rep.delta_d_trace;
    j["objective_trace"] = rep.objective_trace;
    j["disagreement_trace"] = rep.disagreement_trace;
    j["fixed_count_trace"] = rep.fixed_count_trace;
    j["fix_events"] = json::array();
    for (const auto& e : rep.fix_events)
        j["fix_events"].push_back({{"iteration", e.iteration},
                                   {"patient", e.patient},
                                   {"value", e.value},
                                   {"from_cycle", e.from_cycle}});
    j["defects"] = {{"lower_bound_defects", rep.lower_bound_defects},
                    {"worst_lower_bound_gap", rep.worst_lower_bound_gap},
                    {"max_multiplier_imbalance", rep.max_multiplier_imbalance},
                    {"cap_violations", rep.cap_violations}};
    return j;
}

void save_report(const RunReport& rep, const std::string& path) {
    dump_to_file(report_to_json(rep), path);
}

void write_trace_csv(std::ostream& os, const RunReport& rep) {
    os << "iteration,rho,delta_p,delta_d,incumbent_objective,max_disagreement,fixed_patients\n";
    for (std::size_t k = 0; k < rep.rho_trace.size(); ++k) {
        os << (k + 1) << "," << rep.rho_trace[k] << "," << rep.delta_p_trace[k] << ","
           << rep.delta_d_trace[k] << "," << rep.objective_trace[k] << ","
           << rep.disagreement_trace[k] << "," << rep.fixed_count_trace[k] << "\n";
    }
}

} // namespace chemosched
