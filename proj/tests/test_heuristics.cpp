#include "chemosched/errors.hpp"
#include "chemosched/evaluator.hpp"
#include "chemosched/heuristics.hpp"
#include "chemosched/subproblem.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace chemosched;

namespace {

// Totals per scenario: p0 (30, 40), p1 (15, 15), p2 (94, 106).
// Means 35 / 15 / 100, variances 25 / 0 / 36, CoV 0.143 / 0 / 0.06.
Instance rule_instance() {
    return testutil::make_instance(2, 2, 240, 180,
                                   {{10, 5, 10}, {20, 5, 6}},
                                   {{20, 10, 84}, {20, 10, 100}});
}

} // namespace

TEST_CASE("average durations are unweighted scenario means") {
    Instance inst = rule_instance();
    auto avg = average_total_durations(inst);
    REQUIRE(avg.size() == 3);
    CHECK(avg[0] == doctest::Approx(35.0));
    CHECK(avg[1] == doctest::Approx(15.0));
    CHECK(avg[2] == doctest::Approx(100.0));
}

TEST_CASE("sequencing rules order by their statistic") {
    Instance inst = rule_instance();
    CHECK(sequence_patients(inst, SequencingRule::SPT) == std::vector<int>{1, 0, 2});
    CHECK(sequence_patients(inst, SequencingRule::LPT) == std::vector<int>{2, 0, 1});
    CHECK(sequence_patients(inst, SequencingRule::VAR) == std::vector<int>{1, 0, 2});
    CHECK(sequence_patients(inst, SequencingRule::CoV) == std::vector<int>{1, 2, 0});
}

TEST_CASE("ties break toward the lower id and zero-mean patients sort last in CoV") {
    Instance inst = testutil::make_instance(1, 2, 240, 180,
                                            {{5, 5, 0}}, {{10, 10, 0}});
    CHECK(sequence_patients(inst, SequencingRule::SPT) == std::vector<int>{2, 0, 1});
    CHECK(sequence_patients(inst, SequencingRule::LPT) == std::vector<int>{0, 1, 2});
    // Identical draws mean zero variance everywhere; ids decide.
    CHECK(sequence_patients(inst, SequencingRule::VAR) == std::vector<int>{0, 1, 2});
    // Patient 2 never shows up for any time at all: zero mean goes last.
    CHECK(sequence_patients(inst, SequencingRule::CoV) == std::vector<int>{0, 1, 2});
}

TEST_CASE("nearest-rank percentile in both directions") {
    std::vector<int> s{10, 20, 30, 40, 50};
    CHECK(percentile_nearest_rank(s, 0.4) == 20);
    CHECK(percentile_nearest_rank(s, 1.0) == 50);
    CHECK(percentile_nearest_rank(s, 0.01) == 10);
    CHECK(percentile_nearest_rank(s, 0.4, true) == 40);
    CHECK(percentile_nearest_rank(s, 1.0, true) == 10);
    CHECK(percentile_nearest_rank({7}, 0.5) == 7);
    CHECK_THROWS_AS(percentile_nearest_rank({}, 0.5), std::invalid_argument);
}

TEST_CASE("hedged appointments follow simulated resource releases") {
    // Pooled premed sample {2,4,6,8,10,12} -> median 6; infusions -> 30.
    Instance inst = testutil::make_instance(1, 1, 240, 180,
                                            {{4, 8, 10}, {6, 2, 12}},
                                            {{10, 30, 50}, {20, 40, 60}});
    FirstStageSchedule sched = job_hedging_schedule(inst, {0, 1, 2});
    CHECK(sched.appointment == std::vector<int>{0, 36, 72});

    SUBCASE("first min(nurses, chairs) patients start at zero") {
        Instance wide = testutil::make_instance(2, 3, 240, 180,
                                                {{4, 8, 10}, {6, 2, 12}},
                                                {{10, 30, 50}, {20, 40, 60}});
        FirstStageSchedule s2 = job_hedging_schedule(wide, {2, 0, 1});
        CHECK(s2.appointment[2] == 0);
        CHECK(s2.appointment[0] == 0);
        CHECK(s2.appointment[1] > 0);
    }
    SUBCASE("appointments never decrease along the sequence") {
        FirstStageSchedule s3 = job_hedging_schedule(inst, {2, 1, 0}, HedgingConfig{0.9, false});
        CHECK(s3.appointment[2] <= s3.appointment[1]);
        CHECK(s3.appointment[1] <= s3.appointment[0]);
        CHECK(validate(s3, inst).empty());
    }
}

TEST_CASE("fixed-sequence refinement improves on its starting points") {
    Instance inst = testutil::make_instance(1, 2, 100, 100000,
                                            {{5, 10, 5, 15}, {15, 5, 20, 5}, {10, 10, 10, 10}},
                                            {{30, 20, 25, 10}, {10, 35, 15, 30}, {20, 25, 20, 20}});
    ObjectiveWeights w{1, 1, 1};
    std::vector<int> seq{0, 1, 2, 3};

    OptBudget none;
    none.max_evaluations = 0;
    FirstStageSchedule untouched = fixed_sequence_opt(inst, w, seq, none);
    CHECK(untouched.sequence == seq);

    FirstStageSchedule refined = fixed_sequence_opt(inst, w, seq);
    CHECK(refined.sequence == seq);
    CHECK(expected_objective(refined, inst, w) <=
          expected_objective(untouched, inst, w) + 1e-9);

    SUBCASE("provided extra starts are never ignored") {
        FirstStageSchedule extra = job_hedging_schedule(inst, seq, HedgingConfig{0.9, false});
        std::vector<FirstStageSchedule> pool{extra};
        FirstStageSchedule best = fixed_sequence_opt(inst, w, seq, {}, &pool);
        CHECK(expected_objective(best, inst, w) <=
              expected_objective(extra, inst, w) + 1e-9);
    }
    SUBCASE("extra starts must share the sequence") {
        FirstStageSchedule wrong = job_hedging_schedule(inst, {3, 2, 1, 0});
        std::vector<FirstStageSchedule> pool{wrong};
        CHECK_THROWS_AS(fixed_sequence_opt(inst, w, seq, {}, &pool), std::invalid_argument);
    }
}

TEST_CASE("an unmeetable overtime cap makes refinement infeasible") {
    Instance inst = testutil::make_instance(1, 1, 10, 0, {{20, 20}}, {{30, 30}});
    CHECK_THROWS_AS(fixed_sequence_opt(inst, {1, 1, 1}, {0, 1}), Infeasible);
}

TEST_CASE("the deterministic counterpart solves the mean-duration problem") {
    Instance inst = testutil::make_instance(2, 2, 100, 100000,
                                            {{10, 30, 6}, {30, 10, 10}},
                                            {{20, 40, 30}, {40, 20, 34}});
    ObjectiveWeights w{1, 1, 1};
    FirstStageSchedule mv = mean_value_schedule(inst, w);
    CHECK(validate(mv, inst).empty());

    Instance mean_inst = inst;
    mean_inst.scenarios = {inst.mean_scenario()};
    SubproblemOptions so;
    so.mode = SubproblemMode::Exhaustive;
    SubproblemSolution ref = solve_subproblem(mean_inst.scenarios[0], mean_inst, w, {}, so);
    double mv_on_mean = evaluate(mv, mean_inst.scenarios[0], mean_inst, w).objective;
    CHECK(mv_on_mean == doctest::Approx(ref.base_objective));
}
