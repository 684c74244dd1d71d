#include "prequant/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prequant/errors.hpp"

namespace prequant {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(path + ": cannot open for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

namespace {

const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                          "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

} // namespace

std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& groups,
                            const std::vector<std::string>& series,
                            const std::vector<std::vector<double>>& values) {
    if (values.size() != series.size()) {
        throw ParamError("grouped_bar_svg: one value row per series required");
    }
    for (const auto& row : values) {
        if (row.size() != groups.size()) {
            throw ParamError("grouped_bar_svg: one value per group required");
        }
    }

    const double width = 960, height = 420;
    const double left = 70, right = 30, top = 50, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double vmin = 0.0, vmax = 0.0;
    for (const auto& row : values) {
        for (double v : row) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    if (vmax == vmin) {
        vmax = vmin + 1.0;
    }
    const double pad = 0.08 * (vmax - vmin);
    vmax += pad;
    if (vmin < 0.0) {
        vmin -= pad;
    }
    const auto y_of = [&](double v) {
        return top + plot_h * (vmax - v) / (vmax - vmin);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    svg << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">" << y_label
        << "</text>\n";

    // horizontal grid lines at 5 even ticks
    for (int t = 0; t <= 5; ++t) {
        const double v = vmin + (vmax - vmin) * t / 5.0;
        const double y = y_of(v);
        svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w
            << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt1(v) << "</text>\n";
    }

    const double group_w = plot_w / static_cast<double>(groups.size());
    const double bar_w = 0.8 * group_w / static_cast<double>(series.size());
    const double y_zero = y_of(std::max(0.0, vmin));

    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double gx = left + group_w * (static_cast<double>(g) + 0.1);
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = values[s][g];
            const double y = y_of(v);
            const double y0 = vmin < 0.0 ? y_of(0.0) : y_zero;
            const double bar_top = std::min(y, y0);
            const double bar_h = std::fabs(y - y0);
            svg << "<rect x=\"" << gx + bar_w * static_cast<double>(s) << "\" y=\"" << bar_top
                << "\" width=\"" << bar_w * 0.92 << "\" height=\"" << bar_h << "\" fill=\""
                << kPalette[s % 8] << "\"/>\n";
        }
        svg << "<text x=\"" << left + group_w * (static_cast<double>(g) + 0.5) << "\" y=\""
            << top + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << groups[g] << "</text>\n";
    }

    // legend
    double lx = left;
    const double ly = height - 18;
    for (std::size_t s = 0; s < series.size(); ++s) {
        svg << "<rect x=\"" << lx << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[s % 8] << "\"/>\n";
        svg << "<text x=\"" << lx + 16 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s] << "</text>\n";
        lx += 24 + 9.0 * static_cast<double>(series[s].size());
    }

    // axes
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace prequant
