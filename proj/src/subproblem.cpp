#include "chemosched/subproblem.hpp"

#include "chemosched/errors.hpp"
#include "chemosched/evaluator.hpp"
#include "chemosched/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace chemosched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

// Shared search state: one evaluator, one appointment vector, one counter.
class Searcher {
public:
    Searcher(const Scenario& scen, const Instance& inst, const ObjectiveWeights& w,
             const PenaltyTerms& terms, const SubproblemOptions& opts)
        : scen_(scen), inst_(inst), w_(w), terms_(terms), opts_(opts), ev_(inst),
          nurse_free_(inst.num_nurses), chair_free_(inst.num_chairs),
          a_(inst.num_patients(), 0), hmax_(inst.latest_appointment()) {}

    long long evaluations = 0;

    double cost(const std::vector<int>& seq) {
        ++evaluations;
        EvalSums sums = ev_.sums(seq, a_.data(), scen_);
        if (sums.max_overtime > inst_.overtime_limit) return kInf;
        double c = sums.weighted(w_);
        if (terms_.active()) c += penalty();
        return c;
    }

    double base_cost(const std::vector<int>& seq, double* ot_idle) {
        EvalSums sums = ev_.sums(seq, a_.data(), scen_);
        if (ot_idle)
            *ot_idle = w_.overtime * static_cast<double>(sums.overtime) +
                       w_.idle * static_cast<double>(sums.idle);
        return sums.weighted(w_);
    }

    int fixed_of(int j) const {
        return opts_.fixed_appointment ? (*opts_.fixed_appointment)[j] : -1;
    }

    bool sequence_ok(const std::vector<int>& seq) const {
        if (!opts_.fixed_appointment) return true;
        int last = -1;
        for (int j : seq) {
            int f = fixed_of(j);
            if (f < 0) continue;
            if (f < last) return false;
            last = f;
        }
        return true;
    }

    // Reorders pinned patients by pinned time while keeping their positions.
    void repair_fixed_order(std::vector<int>& seq) const {
        if (!opts_.fixed_appointment) return;
        std::vector<int> pos, ids;
        for (int k = 0; k < static_cast<int>(seq.size()); ++k)
            if (fixed_of(seq[k]) >= 0) {
                pos.push_back(k);
                ids.push_back(seq[k]);
            }
        std::sort(ids.begin(), ids.end(), [&](int x, int y) {
            if (fixed_of(x) != fixed_of(y)) return fixed_of(x) < fixed_of(y);
            return x < y;
        });
        for (std::size_t k = 0; k < pos.size(); ++k) seq[pos[k]] = ids[k];
    }

    // Backward clamp below pinned successors, then forward non-decreasing pass.
    void repair_monotone(const std::vector<int>& seq) {
        const int n = static_cast<int>(seq.size());
        int hi = hmax_;
        for (int k = n - 1; k >= 0; --k) {
            int j = seq[k];
            if (fixed_of(j) >= 0)
                hi = a_[j];
            else
                a_[j] = std::min(std::max(a_[j], 0), hi);
        }
        int lo = 0;
        for (int k = 0; k < n; ++k) {
            int j = seq[k];
            if (fixed_of(j) < 0) a_[j] = std::max(a_[j], lo);
            lo = a_[j];
        }
    }

    // Appointments equal to the earliest feasible starts; pinned values kept.
    void zero_wait(const std::vector<int>& seq) {
        std::fill(nurse_free_.begin(), nurse_free_.end(), 0);
        std::fill(chair_free_.begin(), chair_free_.end(), 0);
        int prev = 0;
        for (int j : seq) {
            int bn = 0;
            for (int x = 1; x < inst_.num_nurses; ++x)
                if (nurse_free_[x] < nurse_free_[bn]) bn = x;
            int bc = 0;
            for (int x = 1; x < inst_.num_chairs; ++x)
                if (chair_free_[x] < chair_free_[bc]) bc = x;
            int earliest = std::max({prev, nurse_free_[bn], chair_free_[bc]});
            int f = fixed_of(j);
            a_[j] = f >= 0 ? f : std::min(earliest, hmax_);
            int st = std::max(a_[j], earliest);
            nurse_free_[bn] = st + scen_.premed[j];
            chair_free_[bc] = st + scen_.premed[j] + scen_.infusion[j];
            prev = st;
        }
        repair_monotone(seq);
    }

    // Cyclic integer coordinate descent with endpoint and consensus probes and
    // doubling line search. Returns the cost reached.
    double descend(const std::vector<int>& seq, int max_passes, double cur) {
        const int n = static_cast<int>(seq.size());
        for (int pass = 0; pass < max_passes; ++pass) {
            bool improved = false;
            for (int k = 0; k < n; ++k) {
                int j = seq[k];
                if (fixed_of(j) >= 0) continue;
                const int lo = k > 0 ? a_[seq[k - 1]] : 0;
                const int hi = k + 1 < n ? a_[seq[k + 1]] : hmax_;
                if (lo >= hi) continue;
                auto try_point = [&](int x) {
                    if (x < lo || x > hi || x == a_[j]) return;
                    int prev_val = a_[j];
                    a_[j] = x;
                    double c = cost(seq);
                    if (c + kEps < cur) {
                        cur = c;
                        improved = true;
                    } else {
                        a_[j] = prev_val;
                    }
                };
                try_point(lo);
                try_point(hi);
                if (!terms_.consensus.empty()) {
                    int target = static_cast<int>(std::llround(terms_.consensus[j]));
                    try_point(std::clamp(target, lo, hi));
                }
                for (int dir : {1, -1}) {
                    int step = 1;
                    for (;;) {
                        int nx = a_[j] + dir * step;
                        if (nx < lo || nx > hi) {
                            if (step == 1) break;
                            step >>= 1;
                            continue;
                        }
                        int prev_val = a_[j];
                        a_[j] = nx;
                        double c = cost(seq);
                        if (c + kEps < cur) {
                            cur = c;
                            improved = true;
                            step <<= 1;
                        } else {
                            a_[j] = prev_val;
                            if (step == 1) break;
                            step >>= 1;
                        }
                    }
                }
            }
            if (!improved) break;
        }
        return cur;
    }

    // Full pipeline for one sequence: initial point, then descent.
    double solve_sequence(const std::vector<int>& seq, const std::vector<int>* warm,
                          int max_passes) {
        if (warm) {
            a_ = *warm;
            repair_monotone(seq);
            double c = cost(seq);
            if (std::isinf(c)) {
                zero_wait(seq);
                c = cost(seq);
            }
            if (std::isinf(c)) return kInf;
            return descend(seq, max_passes, c);
        }
        zero_wait(seq);
        double c = cost(seq);
        if (std::isinf(c)) return kInf;
        if (!terms_.active()) return c; // the zero-wait point is already optimal
        return descend(seq, max_passes, c);
    }

    std::vector<int>& appointments() { return a_; }

    void log_sequence(const std::vector<int>& seq, double penalized) {
        if (!opts_.sequence_log) return;
        auto& os = *opts_.sequence_log;
        os << opts_.log_prefix;
        for (std::size_t k = 0; k < seq.size(); ++k)
            os << (k ? "-" : "") << seq[k];
        os << "," << penalized << "\n";
    }

private:
    double penalty() const {
        double p = 0.0;
        const int n = inst_.num_patients();
        const bool have_mu = !terms_.mu.empty();
        const bool have_cons = !terms_.consensus.empty();
        for (int i = 0; i < n; ++i) {
            const double ai = a_[i];
            const double ci = have_cons ? terms_.consensus[i] : 0.0;
            if (have_mu) p += terms_.mu[i] * (ai - ci);
            if (terms_.rho != 0.0) {
                double g = terms_.cuts ? square_underestimate((*terms_.cuts)[i], a_[i])
                                       : ai * ai;
                p += 0.5 * terms_.rho * (g - 2.0 * ai * ci + ci * ci);
            }
        }
        return p;
    }

    const Scenario& scen_;
    const Instance& inst_;
    const ObjectiveWeights& w_;
    const PenaltyTerms& terms_;
    const SubproblemOptions& opts_;
    ScenarioEvaluator ev_;
    std::vector<int> nurse_free_, chair_free_;
    std::vector<int> a_;
    const int hmax_;
};

std::vector<int> longest_first_order(const Scenario& scen, int n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        int dx = scen.premed[x] + scen.infusion[x];
        int dy = scen.premed[y] + scen.infusion[y];
        if (dx != dy) return dx > dy;
        return x < y;
    });
    return order;
}

// Sequence-independent floor on the overtime-plus-idle part of the objective.
double ot_idle_floor(const Scenario& scen, const Instance& inst, const ObjectiveWeights& w) {
    long long total = 0;
    for (int i = 0; i < inst.num_patients(); ++i) total += scen.premed[i] + scen.infusion[i];
    const double chair_avg = static_cast<double>(total) / inst.num_chairs;
    const double ot = std::max(0.0, chair_avg - inst.shift_length);
    const double idle = std::max(
        0.0, static_cast<double>(inst.num_chairs) * inst.shift_length - static_cast<double>(total));
    return w.overtime * ot + w.idle * idle;
}

} // namespace

bool PenaltyTerms::active() const {
    if (rho != 0.0) return true;
    for (double m : mu)
        if (m != 0.0) return true;
    return false;
}

double square_underestimate(const std::vector<int>& operating_points, int a) {
    if (operating_points.empty()) return static_cast<double>(a) * a;
    double best = -kInf;
    for (int c : operating_points) {
        double v = 2.0 * c * static_cast<double>(a) - static_cast<double>(c) * c;
        best = std::max(best, v);
    }
    return best;
}

double penalized_cost(const FirstStageSchedule& schedule, const Scenario& scen,
                      const Instance& inst, const ObjectiveWeights& w,
                      const PenaltyTerms& terms) {
    require_valid(schedule, inst);
    ScenarioEvaluator ev(inst);
    double c = ev.sums(schedule.sequence, schedule.appointment.data(), scen).weighted(w);
    if (!terms.active()) return c;
    const int n = inst.num_patients();
    for (int i = 0; i < n; ++i) {
        const double ai = schedule.appointment[i];
        const double ci = terms.consensus.empty() ? 0.0 : terms.consensus[i];
        if (!terms.mu.empty()) c += terms.mu[i] * (ai - ci);
        if (terms.rho != 0.0) {
            double g = terms.cuts ? square_underestimate((*terms.cuts)[i], schedule.appointment[i])
                                  : ai * ai;
            c += 0.5 * terms.rho * (g - 2.0 * ai * ci + ci * ci);
        }
    }
    return c;
}

double overtime_lb(const Scenario& scen, const Instance& inst) {
    long long total = 0;
    for (int i = 0; i < inst.num_patients(); ++i) total += scen.premed[i] + scen.infusion[i];
    return std::max(0.0, static_cast<double>(total) / inst.num_chairs - inst.shift_length);
}

SubproblemSolution solve_subproblem(const Scenario& scen, const Instance& inst,
                                    const ObjectiveWeights& w, const PenaltyTerms& terms,
                                    const SubproblemOptions& opts) {
    const int n = inst.num_patients();
    if (static_cast<int>(scen.premed.size()) != n || static_cast<int>(scen.infusion.size()) != n)
        throw InfeasibleSchedule("scenario duration arrays must match patient count");
    if (overtime_lb(scen, inst) > inst.overtime_limit + kEps)
        throw Infeasible("total workload exceeds what the chairs can host within the overtime cap");
    if (opts.fixed_appointment &&
        static_cast<int>(opts.fixed_appointment->size()) != n)
        throw InfeasibleSchedule("fixed appointment array must match patient count");

    Searcher search(scen, inst, w, terms, opts);

    std::vector<int> best_seq;
    std::vector<int> best_a;
    double best = kInf;
    auto consider = [&](const std::vector<int>& seq, double c) {
        search.log_sequence(seq, c);
        if (c + kEps < best) {
            best = c;
            best_seq = seq;
            best_a = search.appointments();
        }
    };

    if (opts.mode == SubproblemMode::Exhaustive) {
        if (n > 8) throw InstanceTooLarge("sequence enumeration limited to 8 patients");
        const double floor = ot_idle_floor(scen, inst, w);
        std::vector<int> seq(n);
        std::iota(seq.begin(), seq.end(), 0);
        do {
            if (!search.sequence_ok(seq)) continue;
            double c = search.solve_sequence(seq, nullptr, 30);
            if (std::isinf(c)) continue;
            consider(seq, c);
            if (!terms.active() && best <= floor + kEps) break;
        } while (std::next_permutation(seq.begin(), seq.end()));
    } else {
        std::vector<std::vector<int>> seeds;
        if (opts.warm_start) seeds.push_back(opts.warm_start->sequence);
        if (!opts.seed_sequence.empty())
            seeds.push_back(opts.seed_sequence);
        else if (!opts.warm_start)
            seeds.push_back(longest_first_order(scen, n));
        Rng rng(stream_seed(opts.rng_seed, 0x5EEDULL, 0));
        for (int r = 0; r < opts.restarts; ++r) {
            std::vector<int> s(n);
            std::iota(s.begin(), s.end(), 0);
            rng.shuffle(s);
            seeds.push_back(std::move(s));
        }

        for (std::size_t si = 0; si < seeds.size(); ++si) {
            std::vector<int> seq = seeds[si];
            search.repair_fixed_order(seq);
            const std::vector<int>* warm =
                (opts.warm_start && si == 0) ? &opts.warm_start->appointment : nullptr;
            double cur = search.solve_sequence(seq, warm, 30);
            if (std::isinf(cur)) {
                consider(seq, cur);
                continue;
            }
            std::vector<int> cur_a = search.appointments();

            // First-improvement over adjacent swaps and reinsertions, screened
            // with a short descent, then fully descended on acceptance.
            bool moved = true;
            while (moved) {
                moved = false;
                auto try_move = [&](const std::vector<int>& cand) {
                    if (!search.sequence_ok(cand)) return false;
                    double c = search.solve_sequence(cand, &cur_a, 2);
                    if (c + kEps < cur) {
                        std::vector<int> warm_a = search.appointments();
                        double full = search.solve_sequence(cand, &warm_a, 30);
                        if (full + kEps < cur) {
                            seq = cand;
                            cur = full;
                            cur_a = search.appointments();
                            return true;
                        }
                    }
                    return false;
                };
                for (int k = 0; k + 1 < n && !moved; ++k) {
                    std::vector<int> cand = seq;
                    std::swap(cand[k], cand[k + 1]);
                    moved = try_move(cand);
                }
                for (int p = 0; p < n && !moved; ++p) {
                    for (int q = 0; q < n && !moved; ++q) {
                        if (p == q || q == p - 1 || q == p + 1) continue; // adjacent swaps already tried
                        std::vector<int> cand = seq;
                        int id = cand[p];
                        cand.erase(cand.begin() + p);
                        cand.insert(cand.begin() + q, id);
                        if (cand == seq) continue;
                        moved = try_move(cand);
                    }
                }
            }
            search.appointments() = cur_a;
            consider(seq, cur);
        }
    }

    if (best_seq.empty())
        throw Infeasible("no explored sequence satisfies the overtime cap");

    SubproblemSolution sol;
    sol.schedule.sequence = std::move(best_seq);
    sol.schedule.appointment = std::move(best_a);
    sol.penalized_objective = best;
    search.appointments() = sol.schedule.appointment;
    sol.base_objective = search.base_cost(sol.schedule.sequence, &sol.ot_idle);
    sol.evaluations = search.evaluations;
    return sol;
}

} // namespace chemosched
