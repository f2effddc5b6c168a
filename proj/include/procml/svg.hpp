#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "procml/experiments.hpp"

namespace procml {

namespace detail {

inline std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_num4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

/// Two-segment ramp, low = deep blue, mid = near white, high = deep red.
inline std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto lerp = [](int a, int b, double u) {
        return static_cast<int>(std::lround(a + (b - a) * u));
    };
    int r, g, b;
    if (t < 0.5) {
        const double u = t * 2.0;
        r = lerp(0x31, 0xf4, u);
        g = lerp(0x4f, 0xf1, u);
        b = lerp(0x9e, 0xe9, u);
    } else {
        const double u = t * 2.0 - 1.0;
        r = lerp(0xf4, 0xb3, u);
        g = lerp(0xf1, 0x1c, u);
        b = lerp(0xe9, 0x24, u);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

inline double grid_step(const std::vector<int>& sorted_values) {
    if (sorted_values.size() < 2)
        return 1.0;
    int step = sorted_values[1] - sorted_values[0];
    for (std::size_t i = 2; i < sorted_values.size(); ++i)
        step = std::min(step, sorted_values[i] - sorted_values[i - 1]);
    return step > 0 ? step : 1.0;
}

} // namespace detail

/// Heatmap of per-cell means of one metric over the (n, p) grid, n on x and
/// p on y (increasing upward). Pass a BoundaryFit to overlay its line; the
/// slope and intercept are embedded as data attributes. Output is
/// byte-deterministic for identical input.
inline std::string render_heatmap(const std::vector<ExperimentRecord>& records,
                                  const std::string& metric,
                                  const BoundaryFit* boundary = nullptr) {
    std::map<std::pair<int, int>, std::pair<double, int>> sums;
    for (const ExperimentRecord& r : records)
        if (r.metric == metric) {
            auto& [sum, count] = sums[{r.n, r.p}];
            sum += r.value;
            ++count;
        }
    if (sums.empty())
        throw NoData("no records carry metric '" + metric + "'");

    std::set<int> n_set, p_set;
    std::map<std::pair<int, int>, double> cells;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& [np, sc] : sums) {
        const double mean = sc.first / sc.second;
        cells[np] = mean;
        n_set.insert(np.first);
        p_set.insert(np.second);
        lo = first ? mean : std::min(lo, mean);
        hi = first ? mean : std::max(hi, mean);
        first = false;
    }
    const std::vector<int> ns(n_set.begin(), n_set.end());
    const std::vector<int> ps(p_set.begin(), p_set.end());
    const double dn = detail::grid_step(ns);
    const double dp = detail::grid_step(ps);
    const double span = hi > lo ? hi - lo : 1.0;

    const double cw = 40.0, ch = 24.0;
    const double left = 64.0, top = 34.0, bottom = 40.0, right = 20.0;
    const double plot_w = ((ns.back() - ns.front()) / dn + 1.0) * cw;
    const double plot_h = ((ps.back() - ps.front()) / dp + 1.0) * ch;
    const double width = left + plot_w + right;
    const double height = top + plot_h + bottom;

    // continuous data -> pixel maps; cell rectangles hang off these anchors
    const auto x_of = [&](double n) {
        return left + (n - ns.front()) / dn * cw;
    };
    const auto y_of = [&](double p) {
        return top + plot_h - ((p - ps.front()) / dp + 1.0) * ch;
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::svg_num(width) + "\" height=\"" + detail::svg_num(height) +
           "\" viewBox=\"0 0 " + detail::svg_num(width) + " " +
           detail::svg_num(height) + "\">\n";
    out += "<style>text{font:11px sans-serif;fill:#333;}</style>\n";
    out += "<text x=\"" + detail::svg_num(left + plot_w / 2) +
           "\" y=\"16\" text-anchor=\"middle\">" + metric + "</text>\n";

    for (const auto& [np, mean] : cells) {
        const double t = (mean - lo) / span;
        out += "<rect class=\"cell\" x=\"" + detail::svg_num(x_of(np.first)) +
               "\" y=\"" + detail::svg_num(y_of(np.second)) + "\" width=\"" +
               detail::svg_num(cw) + "\" height=\"" + detail::svg_num(ch) +
               "\" fill=\"" + detail::heat_color(t) + "\" data-n=\"" +
               std::to_string(np.first) + "\" data-p=\"" +
               std::to_string(np.second) + "\" data-value=\"" +
               detail::svg_num4(mean) + "\"/>\n";
    }

    for (int n : ns)
        out += "<text x=\"" + detail::svg_num(x_of(n) + cw / 2) + "\" y=\"" +
               detail::svg_num(top + plot_h + 16) +
               "\" text-anchor=\"middle\">" + std::to_string(n) + "</text>\n";
    for (int p : ps)
        out += "<text x=\"" + detail::svg_num(left - 8) + "\" y=\"" +
               detail::svg_num(y_of(p) + ch / 2 + 4) +
               "\" text-anchor=\"end\">" + std::to_string(p) + "</text>\n";
    out += "<text x=\"" + detail::svg_num(left + plot_w / 2) + "\" y=\"" +
           detail::svg_num(height - 8) + "\" text-anchor=\"middle\">n</text>\n";
    out += "<text x=\"16\" y=\"" + detail::svg_num(top + plot_h / 2) +
           "\" text-anchor=\"middle\">p</text>\n";

    if (boundary != nullptr) {
        const double n1 = ns.front(), n2 = ns.back();
        const double p1 = boundary->slope * n1 + boundary->intercept;
        const double p2 = boundary->slope * n2 + boundary->intercept;
        out += "<line class=\"boundary\" x1=\"" +
               detail::svg_num(x_of(n1) + cw / 2) + "\" y1=\"" +
               detail::svg_num(y_of(p1) + ch / 2) + "\" x2=\"" +
               detail::svg_num(x_of(n2) + cw / 2) + "\" y2=\"" +
               detail::svg_num(y_of(p2) + ch / 2) +
               "\" stroke=\"#111\" stroke-width=\"2\" stroke-dasharray=\"6 3\""
               " data-slope=\"" +
               detail::svg_num4(boundary->slope) + "\" data-intercept=\"" +
               detail::svg_num4(boundary->intercept) + "\"/>\n";
    }

    out += "</svg>\n";
    return out;
}

/// One box per distinct value of the grouping field ("metric", "condition",
/// or "n") over replicate-level rows. Quartiles use the linear-interpolation
/// convention; whiskers extend to the farthest points within 1.5 IQR of the
/// box and never past the group extremes. Groups are drawn in sorted order
/// (numeric for "n") with identical internal geometry, offset per group, so
/// equal samples render equal boxes.
inline std::string render_boxplot(const std::vector<ExperimentRecord>& records,
                                  const std::string& group_key) {
    if (group_key != "metric" && group_key != "condition" && group_key != "n")
        throw InvalidArgument("group_key must be 'metric', 'condition', or 'n'");

    std::map<std::pair<long long, std::string>, std::vector<double>> groups;
    for (const ExperimentRecord& r : records) {
        if (r.replicate == -1)
            continue;
        std::pair<long long, std::string> key{0, ""};
        if (group_key == "metric")
            key.second = r.metric;
        else if (group_key == "condition")
            key.second = r.condition;
        else
            key = {r.n, std::to_string(r.n)};
        groups[key].push_back(r.value);
    }
    if (groups.empty())
        throw NoData("no replicate-level records to plot");

    struct BoxStats {
        std::string label;
        double q1, median, q3, whisker_lo, whisker_hi;
    };
    std::vector<BoxStats> boxes;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        BoxStats b;
        b.label = key.second;
        b.q1 = detail::quantile_sorted(values, 0.25);
        b.median = detail::quantile_sorted(values, 0.5);
        b.q3 = detail::quantile_sorted(values, 0.75);
        const double iqr = b.q3 - b.q1;
        const double fence_lo = b.q1 - 1.5 * iqr;
        const double fence_hi = b.q3 + 1.5 * iqr;
        b.whisker_lo = values.front();
        for (double v : values)
            if (v >= fence_lo) {
                b.whisker_lo = v;
                break;
            }
        b.whisker_hi = values.back();
        for (auto it = values.rbegin(); it != values.rend(); ++it)
            if (*it <= fence_hi) {
                b.whisker_hi = *it;
                break;
            }
        lo = first ? values.front() : std::min(lo, values.front());
        hi = first ? values.back() : std::max(hi, values.back());
        first = false;
        boxes.push_back(b);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    const double slot = 96.0, box_w = 48.0;
    const double left = 56.0, top = 20.0, bottom = 36.0;
    const double plot_h = 220.0;
    const double width = left + slot * static_cast<double>(boxes.size()) + 20.0;
    const double height = top + plot_h + bottom;
    const auto y_of = [&](double v) {
        return top + plot_h * (1.0 - (v - lo) / span);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::svg_num(width) + "\" height=\"" + detail::svg_num(height) +
           "\" viewBox=\"0 0 " + detail::svg_num(width) + " " +
           detail::svg_num(height) + "\">\n";
    out += "<style>text{font:11px sans-serif;fill:#333;}"
           "line,rect.box{stroke:#16426b;fill:none;stroke-width:1.5;}"
           "</style>\n";

    for (double frac : {0.0, 0.5, 1.0}) {
        const double v = lo + frac * span;
        out += "<text x=\"" + detail::svg_num(left - 10) + "\" y=\"" +
               detail::svg_num(y_of(v) + 4) + "\" text-anchor=\"end\">" +
               detail::svg_num4(v) + "</text>\n";
    }

    // geometry lives in a translated group with the label outside, so equal
    // samples produce identical group bodies
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoxStats& b = boxes[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        out += "<g class=\"box\" transform=\"translate(" +
               detail::svg_num(cx) + ",0)\" data-group=\"" + b.label +
               "\" data-q1=\"" + detail::svg_num4(b.q1) + "\" data-median=\"" +
               detail::svg_num4(b.median) + "\" data-q3=\"" +
               detail::svg_num4(b.q3) + "\" data-lo=\"" +
               detail::svg_num4(b.whisker_lo) + "\" data-hi=\"" +
               detail::svg_num4(b.whisker_hi) + "\">\n";
        out += "<line x1=\"0.00\" y1=\"" +
               detail::svg_num(y_of(b.whisker_lo)) + "\" x2=\"0.00\" y2=\"" +
               detail::svg_num(y_of(b.q1)) + "\"/>\n";
        out += "<line x1=\"0.00\" y1=\"" + detail::svg_num(y_of(b.q3)) +
               "\" x2=\"0.00\" y2=\"" + detail::svg_num(y_of(b.whisker_hi)) +
               "\"/>\n";
        for (double w : {b.whisker_lo, b.whisker_hi})
            out += "<line x1=\"" + detail::svg_num(-box_w / 4) + "\" y1=\"" +
                   detail::svg_num(y_of(w)) + "\" x2=\"" +
                   detail::svg_num(box_w / 4) + "\" y2=\"" +
                   detail::svg_num(y_of(w)) + "\"/>\n";
        out += "<rect class=\"box\" x=\"" + detail::svg_num(-box_w / 2) +
               "\" y=\"" + detail::svg_num(y_of(b.q3)) + "\" width=\"" +
               detail::svg_num(box_w) + "\" height=\"" +
               detail::svg_num(y_of(b.q1) - y_of(b.q3)) + "\"/>\n";
        out += "<line x1=\"" + detail::svg_num(-box_w / 2) + "\" y1=\"" +
               detail::svg_num(y_of(b.median)) + "\" x2=\"" +
               detail::svg_num(box_w / 2) + "\" y2=\"" +
               detail::svg_num(y_of(b.median)) +
               "\" stroke-width=\"2.5\"/>\n";
        out += "</g>\n";
        out += "<text x=\"" + detail::svg_num(cx) + "\" y=\"" +
               detail::svg_num(top + plot_h + 18) +
               "\" text-anchor=\"middle\">" + b.label + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

inline void write_svg_file(const std::string& path, const std::string& svg) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    out << svg;
}

} // namespace procml
