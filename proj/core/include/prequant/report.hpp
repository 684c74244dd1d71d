#pragma once

#include <string>
#include <vector>

namespace prequant {

// %.17g, locale-independent; round-trips doubles exactly
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

// Minimal self-contained SVG 1.1 grouped bar chart: one group per label in
// `groups`, one bar per series inside each group. Handles negative values
// with a zero baseline.
std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& groups,
                            const std::vector<std::string>& series,
                            const std::vector<std::vector<double>>& values);

} // namespace prequant
