#include "chemosched/errors.hpp"
#include "chemosched/evaluator.hpp"
#include "chemosched/gantt.hpp"
#include "chemosched/io.hpp"
#include "chemosched/lpha.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace chemosched;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

} // namespace

TEST_CASE("instances survive a JSON round trip") {
    Instance inst = testutil::make_instance(2, 3, 240, 180,
                                            {{10, 5}, {20, 8}}, {{30, 40}, {25, 45}});
    inst.label = "roundtrip";
    inst.patients[1].class_id = 4;
    Instance back = instance_from_json(instance_to_json(inst));
    CHECK(back.label == inst.label);
    CHECK(back.num_nurses == inst.num_nurses);
    CHECK(back.num_chairs == inst.num_chairs);
    CHECK(back.shift_length == inst.shift_length);
    CHECK(back.overtime_limit == inst.overtime_limit);
    REQUIRE(back.num_patients() == 2);
    CHECK(back.patients[1].class_id == 4);
    REQUIRE(back.num_scenarios() == 2);
    CHECK(back.scenarios[1].premed == inst.scenarios[1].premed);
    CHECK(back.scenarios[1].infusion == inst.scenarios[1].infusion);
    CHECK(back.scenarios[0].probability == doctest::Approx(0.5));

    const std::string path = tmp_path("chemosched_io_instance.json");
    save_instance(inst, path);
    Instance loaded = load_instance(path);
    CHECK(loaded.label == inst.label);
    CHECK(loaded.scenarios[0].premed == inst.scenarios[0].premed);
    std::remove(path.c_str());
}

TEST_CASE("malformed instance documents raise parse errors") {
    Instance inst = testutil::make_instance(1, 1, 100, 50, {{5}}, {{10}});
    nlohmann::json j = instance_to_json(inst);
    nlohmann::json missing = j;
    missing.erase("scenarios");
    CHECK_THROWS_AS(instance_from_json(missing), ParseError);
    nlohmann::json wrong_type = j;
    wrong_type["num_nurses"] = "two";
    CHECK_THROWS_AS(instance_from_json(wrong_type), ParseError);
    CHECK_THROWS_AS(load_instance(tmp_path("chemosched_does_not_exist.json")), ParseError);

    const std::string junk = tmp_path("chemosched_junk.json");
    {
        std::ofstream os(junk);
        os << "{not json";
    }
    CHECK_THROWS_AS(load_instance(junk), ParseError);
    std::remove(junk.c_str());
}

TEST_CASE("schedules survive a JSON round trip and reject missing keys") {
    FirstStageSchedule s{{2, 0, 1}, {5, 9, 3}};
    FirstStageSchedule back = schedule_from_json(schedule_to_json(s));
    CHECK(back.sequence == s.sequence);
    CHECK(back.appointment == s.appointment);

    nlohmann::json j = schedule_to_json(s);
    j.erase("appointment");
    CHECK_THROWS_AS(schedule_from_json(j), ParseError);

    const std::string path = tmp_path("chemosched_io_schedule.json");
    save_schedule(s, path);
    FirstStageSchedule loaded = load_schedule(path);
    CHECK(loaded.sequence == s.sequence);
    CHECK(loaded.appointment == s.appointment);
    std::remove(path.c_str());
}

TEST_CASE("outcome CSV lists patients in sequence order and closes with totals") {
    Instance inst = testutil::make_instance(1, 1, 100, 100, {{10, 5}}, {{20, 15}});
    FirstStageSchedule sched{{0, 1}, {0, 0}};
    SecondStageOutcome out = evaluate(sched, inst.scenarios[0], inst, {1, 1, 1});
    std::ostringstream os;
    write_outcome_csv(os, sched, out);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "id,appointment,wait,start,discharge,nurse,chair");
    std::getline(is, line);
    CHECK(line == "0,0,0,0,30,0,0");
    std::getline(is, line);
    CHECK(line == "1,0,30,30,50,0,0");
    std::getline(is, line);
    CHECK(line == "total,80,30,,50,0,50");
    CHECK(!std::getline(is, line));
}

TEST_CASE("run reports serialize every diagnostic field") {
    RunReport rep;
    rep.label = "demo";
    rep.weights = {0.3, 0.3, 0.4};
    rep.objective = 12.5;
    rep.ewt = 1.0;
    rep.eot = 2.0;
    rep.eit = 3.0;
    rep.iterations = 2;
    rep.converged = true;
    rep.seed = 77;
    rep.schedule = {{1, 0}, {4, 2}};
    rep.rho_trace = {1e-4, 2e-4};
    rep.delta_p_trace = {0.0, 0.5};
    rep.delta_d_trace = {3.0, 1.0};
    rep.objective_trace = {15.0, 12.5};
    rep.disagreement_trace = {4.0, 0.0};
    rep.fixed_count_trace = {0, 2};
    rep.fix_events.push_back({2, 1, 4, true});
    rep.lower_bound_defects = 1;
    rep.worst_lower_bound_gap = 0.25;
    rep.max_multiplier_imbalance = 1e-9;
    rep.cap_violations = 0;

    nlohmann::json j = report_to_json(rep);
    CHECK(j["version"] == kVersion);
    CHECK(j["label"] == "demo");
    CHECK(j["weights"]["idle"] == doctest::Approx(0.4));
    CHECK(j["objective"] == doctest::Approx(12.5));
    CHECK(j["expected_waiting"] == doctest::Approx(1.0));
    CHECK(j["expected_overtime"] == doctest::Approx(2.0));
    CHECK(j["expected_idle"] == doctest::Approx(3.0));
    CHECK(j["iterations"] == 2);
    CHECK(j["converged"] == true);
    CHECK(j["seed"] == 77);
    CHECK(j["schedule"]["sequence"] == nlohmann::json::array({1, 0}));
    CHECK(j["rho_trace"].size() == 2);
    CHECK(j["fix_events"][0]["patient"] == 1);
    CHECK(j["fix_events"][0]["from_cycle"] == true);
    CHECK(j["defects"]["lower_bound_defects"] == 1);
    CHECK(j["defects"]["cap_violations"] == 0);

    std::ostringstream trace;
    write_trace_csv(trace, rep);
    std::istringstream is(trace.str());
    std::string line;
    std::getline(is, line);
    CHECK(line ==
          "iteration,rho,delta_p,delta_d,incumbent_objective,max_disagreement,fixed_patients");
    std::getline(is, line);
    CHECK(line.rfind("1,", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("2,", 0) == 0);
    CHECK(!std::getline(is, line));
}

TEST_CASE("gantt output shows every resource row and the shift boundary") {
    Instance inst = testutil::make_instance(2, 2, 100, 1000, {{10, 5, 8}}, {{20, 15, 30}});
    FirstStageSchedule sched{{0, 1, 2}, {0, 0, 10}};
    SecondStageOutcome out = evaluate(sched, inst.scenarios[0], inst, {1, 1, 1});
    std::string svg = render_gantt_svg(inst, sched, inst.scenarios[0], out, "day plan");
    CHECK(count_occurrences(svg, "<svg") == 1);
    CHECK(count_occurrences(svg, "</svg>") == 1);
    CHECK(svg.find("day plan") != std::string::npos);
    CHECK(svg.find("Chair 0") != std::string::npos);
    CHECK(svg.find("Chair 1") != std::string::npos);
    CHECK(svg.find("Nurse 0") != std::string::npos);
    CHECK(svg.find("Nurse 1") != std::string::npos);
    CHECK(svg.find("shift end") != std::string::npos);
    // A treatment bar per patient, a pre-med bar per patient, plus background.
    CHECK(count_occurrences(svg, "<rect") >= 7);
    CHECK(count_occurrences(svg, "<") == count_occurrences(svg, ">"));
}
