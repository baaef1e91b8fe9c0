#include "segsweep/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "segsweep/descriptive.hpp"
#include "segsweep/report_io.hpp"

namespace segsweep {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

std::string fx(double v) {
    if (v == 0.0) v = 0.0;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Canvas {
    std::ostringstream out;

    explicit Canvas(const std::string& title) {
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(kWidth) << "\" height=\"" << fx(kHeight)
            << "\" viewBox=\"0 0 " << fx(kWidth) << ' ' << fx(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
            << "<rect x=\"0\" y=\"0\" width=\"" << fx(kWidth) << "\" height=\"" << fx(kHeight) << "\" fill=\"white\"/>\n"
            << "<text x=\"" << fx(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
            << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
              const std::string& extra = "") {
        out << "<line x1=\"" << fx(x1) << "\" y1=\"" << fx(y1) << "\" x2=\"" << fx(x2) << "\" y2=\"" << fx(y2)
            << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fx(width) << '"' << extra << "/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
        out << "<rect x=\"" << fx(x) << "\" y=\"" << fx(y) << "\" width=\"" << fx(w) << "\" height=\"" << fx(h)
            << "\" fill=\"" << fill << '"' << extra << "/>\n";
    }

    void circle(double x, double y, double r, const std::string& fill) {
        out << "<circle cx=\"" << fx(x) << "\" cy=\"" << fx(y) << "\" r=\"" << fx(r) << "\" fill=\"" << fill << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor = "middle", const std::string& extra = "") {
        out << "<text x=\"" << fx(x) << "\" y=\"" << fx(y) << "\" text-anchor=\"" << anchor << '"' << extra << '>'
            << escape(s) << "</text>\n";
    }

    void axes(const std::string& xlabel, const std::string& ylabel) {
        line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH, "black");
        line(kLeft, kTop, kLeft, kTop + kPlotH, "black");
        text(kLeft + kPlotW / 2, kHeight - 15, xlabel);
        const double cy = kTop + kPlotH / 2;
        text(18, cy, ylabel, "middle", " transform=\"rotate(-90 18 " + fx(cy) + ")\"");
    }

    void y_ticks(double lo, double hi, int count, auto&& to_y) {
        for (int k = 0; k <= count; ++k) {
            const double v = lo + (hi - lo) * k / count;
            const double y = to_y(v);
            line(kLeft - 5, y, kLeft, y, "black");
            text(kLeft - 8, y + 4, format_number(v), "end");
        }
    }

    std::string finish() {
        out << "</svg>\n";
        return out.str();
    }
};

// Rounds the span out to a tidy step so tick labels are short.
std::pair<double, double> nice_range(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step};
}

} // namespace

BoxStats box_stats(std::span<const double> values) {
    BoxStats b;
    b.q1 = quantile(values, 0.25);
    b.median = quantile(values, 0.5);
    b.q3 = quantile(values, 0.75);
    const double reach = 1.5 * (b.q3 - b.q1);
    const double lo_fence = b.q1 - reach, hi_fence = b.q3 + reach;
    b.whisker_low = b.q1;
    b.whisker_high = b.q3;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            b.whisker_low = std::min(b.whisker_low, v);
            b.whisker_high = std::max(b.whisker_high, v);
        }
    }
    return b;
}

std::string dsc_boxplot_svg(const std::vector<double>& thresholds, const std::vector<std::vector<double>>& samples,
                            const std::string& title) {
    Canvas c(title);
    auto to_y = [](double v) { return kTop + kPlotH * (1.0 - v); };
    c.axes("probability threshold", "DSC");
    c.y_ticks(0.0, 1.0, 5, to_y);

    const double slot = kPlotW / static_cast<double>(std::max<std::size_t>(1, thresholds.size()));
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        const double cx = kLeft + slot * (k + 0.5);
        c.text(cx, kTop + kPlotH + 18, format_number(thresholds[k]));
        if (k >= samples.size() || samples[k].empty()) continue;
        const auto b = box_stats(samples[k]);
        const double half = std::min(20.0, slot * 0.3);
        c.line(cx, to_y(b.whisker_low), cx, to_y(b.q1), "black", 1.0, " stroke-dasharray=\"4 3\"");
        c.line(cx, to_y(b.q3), cx, to_y(b.whisker_high), "black", 1.0, " stroke-dasharray=\"4 3\"");
        c.line(cx - half / 2, to_y(b.whisker_low), cx + half / 2, to_y(b.whisker_low), "black");
        c.line(cx - half / 2, to_y(b.whisker_high), cx + half / 2, to_y(b.whisker_high), "black");
        c.rect(cx - half, to_y(b.q3), 2 * half, to_y(b.q1) - to_y(b.q3), "none", " stroke=\"blue\"");
        c.line(cx - half, to_y(b.median), cx + half, to_y(b.median), "red", 2.0);
        for (double o : b.outliers) c.circle(cx, to_y(o), 2.5, "red");
    }
    return c.finish();
}

std::string optimal_histogram_svg(const OptimalHistogram& h) {
    Canvas c("Per-scan optimal thresholds");
    std::size_t top = 1;
    for (auto v : h.volume_counts) top = std::max(top, v);
    for (auto v : h.dsc_counts) top = std::max(top, v);
    const auto [lo, hi] = nice_range(0.0, static_cast<double>(top));
    auto to_y = [&](double v) { return kTop + kPlotH * (1.0 - (v - lo) / (hi - lo)); };
    c.axes("probability threshold", "number of scans");
    c.y_ticks(lo, hi, 5, to_y);

    const double slot = kPlotW / static_cast<double>(std::max<std::size_t>(1, h.thresholds.size()));
    const double bar = slot * 0.35;
    for (std::size_t k = 0; k < h.thresholds.size(); ++k) {
        const double cx = kLeft + slot * (k + 0.5);
        c.text(cx, kTop + kPlotH + 18, format_number(h.thresholds[k]));
        const double yv = to_y(static_cast<double>(h.volume_counts[k]));
        const double yd = to_y(static_cast<double>(h.dsc_counts[k]));
        c.rect(cx - bar, yv, bar, to_y(0.0) - yv, "steelblue");
        c.rect(cx, yd, bar, to_y(0.0) - yd, "darkorange");
    }
    c.rect(kLeft + kPlotW - 170, kTop + 5, 12, 12, "steelblue");
    c.text(kLeft + kPlotW - 152, kTop + 15, "volume % difference", "start");
    c.rect(kLeft + kPlotW - 170, kTop + 23, 12, 12, "darkorange");
    c.text(kLeft + kPlotW - 152, kTop + 33, "DSC", "start");
    return c.finish();
}

std::string bland_altman_svg(const BlandAltmanResult& r, const std::string& title) {
    Canvas c(title);
    double xlo = 0.0, xhi = 1.0;
    if (!r.means.empty()) {
        xlo = *std::min_element(r.means.begin(), r.means.end());
        xhi = *std::max_element(r.means.begin(), r.means.end());
    }
    double ylo = std::min({r.loa_low, -r.band_halfwidth, r.mean_diff});
    double yhi = std::max({r.loa_high, r.band_halfwidth, r.mean_diff});
    for (double d : r.differences) {
        ylo = std::min(ylo, d);
        yhi = std::max(yhi, d);
    }
    const auto [x0, x1] = nice_range(xlo, xhi);
    const auto [y0, y1] = nice_range(ylo, yhi);
    auto to_x = [&](double v) { return kLeft + kPlotW * (v - x0) / (x1 - x0); };
    auto to_y = [&](double v) { return kTop + kPlotH * (1.0 - (v - y0) / (y1 - y0)); };

    c.axes("mean of reference and predicted volume [mm^3]", "percent difference of volume [%]");
    c.y_ticks(y0, y1, 5, to_y);
    for (int k = 0; k <= 5; ++k) {
        const double v = x0 + (x1 - x0) * k / 5;
        c.line(to_x(v), kTop + kPlotH, to_x(v), kTop + kPlotH + 5, "black");
        c.text(to_x(v), kTop + kPlotH + 18, format_number(v));
    }

    c.rect(kLeft, to_y(r.band_halfwidth), kPlotW, to_y(-r.band_halfwidth) - to_y(r.band_halfwidth), "red",
           " fill-opacity=\"0.2\"");
    c.line(kLeft, to_y(r.mean_diff), kLeft + kPlotW, to_y(r.mean_diff), "black", 1.5);
    c.line(kLeft, to_y(r.loa_low), kLeft + kPlotW, to_y(r.loa_low), "gray", 1.0, " stroke-dasharray=\"6 4\"");
    c.line(kLeft, to_y(r.loa_high), kLeft + kPlotW, to_y(r.loa_high), "gray", 1.0, " stroke-dasharray=\"6 4\"");
    c.text(kLeft + kPlotW - 4, to_y(r.mean_diff) - 4, "mean " + format_number(r.mean_diff), "end");
    c.text(kLeft + kPlotW - 4, to_y(r.loa_high) - 4, "+1.96 SD " + format_number(r.loa_high), "end");
    c.text(kLeft + kPlotW - 4, to_y(r.loa_low) - 4, "-1.96 SD " + format_number(r.loa_low), "end");
    // results built from differences alone carry no means and no points
    const std::size_t points = std::min(r.differences.size(), r.means.size());
    for (std::size_t k = 0; k < points; ++k) c.circle(to_x(r.means[k]), to_y(r.differences[k]), 3.0, "navy");
    return c.finish();
}

} // namespace segsweep
