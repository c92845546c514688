#include "stylemill/chart.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "stylemill/errors.hpp"

namespace stylemill {

std::string fmt_double(double v) {
    return nlohmann::json(v).dump();
}

namespace {

constexpr double kWidth = 720.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 50.0, kBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(const std::string& s) {
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

struct Range {
    double lo = 0.0, hi = 1.0;

    // Degenerate ranges (single point) get unit padding so scaling never
    // divides by zero.
    static Range of(double lo, double hi) {
        if (lo == hi) return {lo - 1.0, hi + 1.0};
        return {lo, hi};
    }
    double to_px(double v, double px_lo, double px_hi) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "  <text x=\"" << kWidth / 2 << "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"16\" text-anchor=\"middle\">"
        << xml_escape(title) << "</text>\n";
}

void axis_frame(std::ostringstream& out) {
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
        << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

void text_at(std::ostringstream& out, double x, double y, const std::string& s,
             const char* anchor, int size = 11) {
    out << "  <text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" "
        << "font-size=\"" << size << "\" text-anchor=\"" << anchor << "\">" << xml_escape(s)
        << "</text>\n";
}

} // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series) {
    bool any = false;
    for (const auto& s : series) any = any || !s.points.empty();
    if (!any) throw DataError("cannot chart an empty report");

    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    bool seed = true;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (seed) {
                x_lo = x_hi = x;
                y_lo = y_hi = y;
                seed = false;
            }
            x_lo = std::min(x_lo, x); x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y); y_hi = std::max(y_hi, y);
        }
    Range xr = Range::of(x_lo, x_hi), yr = Range::of(y_lo, y_hi);

    std::ostringstream out;
    open_svg(out, title);
    axis_frame(out);
    text_at(out, (kLeft + kWidth - kRight) / 2, kHeight - 12, x_label, "middle", 12);
    out << "  <text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % std::size(kPalette)];
        const auto& pts = series[si].points;
        if (pts.size() > 1) {
            out << "  <polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (auto [x, y] : pts)
                out << xr.to_px(x, kLeft, kWidth - kRight) << ","
                    << yr.to_px(y, kHeight - kBottom, kTop) << " ";
            out << "\"/>\n";
        }
        for (auto [x, y] : pts) {
            double px = xr.to_px(x, kLeft, kWidth - kRight);
            double py = yr.to_px(y, kHeight - kBottom, kTop);
            out << "  <circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3.5\" fill=\""
                << color << "\"/>\n";
            text_at(out, px, py - 8, fmt_double(y), "middle");
            text_at(out, px, kHeight - kBottom + 16, fmt_double(x), "middle");
        }
        text_at(out, kWidth - kRight - 4, kTop + 14 + 16 * static_cast<double>(si),
                series[si].name, "end", 12);
        out << "  <circle cx=\"" << kWidth - kRight - 4 - 8 * (series[si].name.size() + 2)
            << "\" cy=\"" << kTop + 10 + 16 * static_cast<double>(si) << "\" r=\"3.5\" fill=\""
            << color << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_bar_chart(const std::string& title, const std::string& y_label,
                             const std::vector<ChartBarGroup>& groups) {
    bool any = false;
    for (const auto& g : groups) any = any || !g.bars.empty();
    if (!any) throw DataError("cannot chart an empty report");

    double y_hi = 0.0;
    std::size_t n_bars = 0;
    std::vector<std::string> series_names;
    for (const auto& g : groups)
        for (const auto& [name, v] : g.bars) {
            y_hi = std::max(y_hi, v);
            ++n_bars;
            if (std::find(series_names.begin(), series_names.end(), name) ==
                series_names.end())
                series_names.push_back(name);
        }
    Range yr = Range::of(0.0, y_hi);

    std::ostringstream out;
    open_svg(out, title);
    axis_frame(out);
    out << "  <text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    double plot_w = kWidth - kLeft - kRight;
    double slot = plot_w / static_cast<double>(n_bars + groups.size());
    double x = kLeft + slot * 0.5;
    for (const auto& g : groups) {
        double group_start = x;
        for (const auto& [name, v] : g.bars) {
            auto it = std::find(series_names.begin(), series_names.end(), name);
            const char* color =
                kPalette[static_cast<std::size_t>(it - series_names.begin()) %
                         std::size(kPalette)];
            double top = yr.to_px(v, kHeight - kBottom, kTop);
            out << "  <rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << slot * 0.85
                << "\" height=\"" << (kHeight - kBottom) - top << "\" fill=\"" << color
                << "\"/>\n";
            text_at(out, x + slot * 0.425, top - 5, fmt_double(v), "middle");
            x += slot;
        }
        text_at(out, (group_start + x - slot * 0.15) / 2, kHeight - kBottom + 16, g.label,
                "middle", 12);
        x += slot; // gap between groups
    }
    for (std::size_t si = 0; si < series_names.size(); ++si) {
        out << "  <rect x=\"" << kWidth - kRight - 120 << "\" y=\""
            << kTop + 4 + 16 * static_cast<double>(si) << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[si % std::size(kPalette)] << "\"/>\n";
        text_at(out, kWidth - kRight - 106, kTop + 13 + 16 * static_cast<double>(si),
                series_names[si], "start", 12);
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace stylemill
