#pragma once

#include <string>
#include <vector>

#include "hiermc/report.hpp"

namespace hiermc {

struct Figure {
    std::string filename;
    std::string svg;
};

// Vertical scales are powers of two so that plotted heights divide back to
// the reported values exactly.
inline constexpr double kProportionPixels = 256.0;
inline constexpr double kDayPixels = 8.0;

/// Figures are a pure function of the report. GPC and WMW reports have no
/// figure and raise METHOD_FIGURE_MISMATCH.
std::vector<Figure> emit_figures(const AnalysisReport& report);

std::string sop_area_svg(const nlohmann::json& arms, const std::string& title);
std::string door_bars_svg(const nlohmann::json& door_result);
std::string unwell_interval_svg(const nlohmann::json& most_result, int horizon_days);

}  // namespace hiermc
