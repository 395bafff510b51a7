#pragma once

#include <vector>

namespace chemosched {

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool reject_at_95 = false;
};

// Pearson goodness-of-fit of integer samples against the discrete uniform on
// [lo, hi]. Bins are contiguous value ranges, merged until every expected
// count reaches 5; throws TooFewSamples when fewer than two bins survive.
ChiSquareResult chi_square_uniform_fit(const std::vector<int>& samples, int lo, int hi,
                                       int bins);

// Mean absolute percentage error, in percent. Throws ZeroActual when any
// actual value is zero (or negative) and on length mismatch.
double compute_mape(const std::vector<double>& actual, const std::vector<double>& predicted);

} // namespace chemosched
