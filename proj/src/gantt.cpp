#include "chemosched/gantt.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace chemosched {

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2",
                          "#edc948", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295"};

} // namespace

std::string render_gantt_svg(const Instance& inst, const FirstStageSchedule& schedule,
                             const Scenario& scen, const SecondStageOutcome& outcome,
                             const std::string& title) {
    (void)schedule;
    const int n = inst.num_patients();
    int horizon = inst.shift_length;
    for (int d : outcome.discharge) horizon = std::max(horizon, d);
    horizon = (horizon + 59) / 60 * 60;

    const double left = 80.0, top = 46.0, row_h = 30.0, bar_h = 22.0;
    const double plot_w = 960.0;
    const double scale = plot_w / horizon;
    const int rows = inst.num_chairs + inst.num_nurses;
    const double height = top + rows * row_h + 40.0;
    const double width = left + plot_w + 20.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"16\" font-size=\"13\">" << title << "</text>\n";

    for (int t = 0; t <= horizon; t += 60) {
        const double x = left + t * scale;
        svg << "<line x1=\"" << x << "\" y1=\"" << top - 14 << "\" x2=\"" << x << "\" y2=\""
            << top + rows * row_h << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << top - 18
            << "\" text-anchor=\"middle\" fill=\"#555555\">" << t << "</text>\n";
    }
    const double shift_x = left + inst.shift_length * scale;
    svg << "<line x1=\"" << shift_x << "\" y1=\"" << top - 14 << "\" x2=\"" << shift_x
        << "\" y2=\"" << top + rows * row_h
        << "\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
    svg << "<text x=\"" << shift_x << "\" y=\"" << top + rows * row_h + 16
        << "\" text-anchor=\"middle\" fill=\"#d62728\">shift end</text>\n";

    auto row_label = [&](int row, const std::string& label) {
        svg << "<text x=\"" << left - 8 << "\" y=\"" << top + row * row_h + row_h / 2 + 4
            << "\" text-anchor=\"end\">" << label << "</text>\n";
    };
    auto bar = [&](int row, int from, int to, const char* fill, int label) {
        if (to <= from) return;
        const double x = left + from * scale;
        const double w = (to - from) * scale;
        const double y = top + row * row_h + (row_h - bar_h) / 2;
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\""
            << bar_h << "\" fill=\"" << fill << "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
        if (label >= 0 && w >= 10.0)
            svg << "<text x=\"" << x + w / 2 << "\" y=\"" << y + bar_h / 2 + 4
                << "\" text-anchor=\"middle\" fill=\"white\">" << label << "</text>\n";
    };

    for (int c = 0; c < inst.num_chairs; ++c) {
        row_label(c, "Chair " + std::to_string(c));
        for (int i = 0; i < n; ++i)
            if (outcome.chair_of[i] == c)
                bar(c, outcome.start[i], outcome.discharge[i], kPalette[i % 12], i);
    }

    for (int nu = 0; nu < inst.num_nurses; ++nu) {
        const int row = inst.num_chairs + nu;
        row_label(row, "Nurse " + std::to_string(nu));
        std::vector<int> mine;
        for (int i = 0; i < n; ++i)
            if (outcome.nurse_of[i] == nu) mine.push_back(i);
        std::sort(mine.begin(), mine.end(),
                  [&](int x, int y) { return outcome.start[x] < outcome.start[y]; });
        int last_discharge = 0;
        for (int i : mine) last_discharge = std::max(last_discharge, outcome.discharge[i]);
        for (std::size_t k = 0; k < mine.size(); ++k) {
            const int i = mine[k];
            const int premed_end = outcome.start[i] + scen.premed[i];
            bar(row, outcome.start[i], premed_end, kPalette[i % 12], i);
            // Observation span until the next pre-med or the last discharge.
            const int until = k + 1 < mine.size() ? outcome.start[mine[k + 1]] : last_discharge;
            bar(row, premed_end, until, "#c8c8c8", -1);
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace chemosched
