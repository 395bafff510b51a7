#pragma once

#include "chemosched/lpha.hpp"
#include "chemosched/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace chemosched {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

nlohmann::json schedule_to_json(const FirstStageSchedule& s);
FirstStageSchedule schedule_from_json(const nlohmann::json& j);
FirstStageSchedule load_schedule(const std::string& path);
void save_schedule(const FirstStageSchedule& s, const std::string& path);

// One row per patient plus a closing total row carrying the weighted
// objective, total wait, latest discharge, total overtime and total idle.
void write_outcome_csv(std::ostream& os, const FirstStageSchedule& schedule,
                       const SecondStageOutcome& outcome);

nlohmann::json report_to_json(const RunReport& rep);
void save_report(const RunReport& rep, const std::string& path);

// Per-iteration solver trace.
void write_trace_csv(std::ostream& os, const RunReport& rep);

} // namespace chemosched
