#include "chemosched/stats.hpp"

#include "chemosched/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemosched {

ChiSquareResult chi_square_uniform_fit(const std::vector<int>& samples, int lo, int hi,
                                       int bins) {
    if (hi < lo) throw std::invalid_argument("empty support for uniform fit");
    const int values = hi - lo + 1;
    bins = std::clamp(bins, 1, values);
    const double n = static_cast<double>(samples.size());

    // Split the support into `bins` contiguous ranges of near-equal width.
    std::vector<double> expected(bins), observed(bins, 0.0);
    std::vector<int> upper(bins); // inclusive upper value of each bin
    for (int b = 0; b < bins; ++b) {
        const long long hi_b = lo + static_cast<long long>(values) * (b + 1) / bins - 1;
        upper[b] = static_cast<int>(hi_b);
        const long long lo_b = b == 0 ? lo : upper[b - 1] + 1;
        expected[b] = n * static_cast<double>(hi_b - lo_b + 1) / values;
    }
    for (int v : samples) {
        const int c = std::clamp(v, lo, hi);
        const int b = static_cast<int>(std::lower_bound(upper.begin(), upper.end(), c) -
                                       upper.begin());
        observed[b] += 1.0;
    }

    // Merge rightward until every expected count reaches 5.
    std::vector<double> e, o;
    double ce = 0.0, co = 0.0;
    for (int b = 0; b < bins; ++b) {
        ce += expected[b];
        co += observed[b];
        if (ce >= 5.0) {
            e.push_back(ce);
            o.push_back(co);
            ce = co = 0.0;
        }
    }
    if (ce > 0.0) {
        if (e.empty()) {
            e.push_back(ce);
            o.push_back(co);
        } else {
            e.back() += ce;
            o.back() += co;
        }
    }
    if (e.size() < 2)
        throw TooFewSamples("not enough samples for a chi-squared fit with expected counts of 5");

    ChiSquareResult r;
    for (std::size_t b = 0; b < e.size(); ++b) {
        const double d = o[b] - e[b];
        r.statistic += d * d / e[b];
    }
    r.dof = static_cast<int>(e.size()) - 1;
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    r.reject_at_95 = r.p_value < 0.05;
    return r;
}

double compute_mape(const std::vector<double>& actual, const std::vector<double>& predicted) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("actual and predicted lengths differ");
    if (actual.empty()) throw std::invalid_argument("empty series");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] <= 0.0)
            throw ZeroActual("percentage error undefined for non-positive actual value");
        sum += std::abs(actual[i] - predicted[i]) / actual[i];
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

} // namespace chemosched
