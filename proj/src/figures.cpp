#include "hiermc/figures.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "hiermc/error.hpp"

namespace hiermc {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

constexpr std::array<const char*, 8> kPalette{"#7f7f7f", "#d62728", "#ff7f0e", "#1f77b4",
                                              "#2ca02c", "#9467bd", "#8c564b", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % kPalette.size()]; }

class Svg {
public:
    Svg(double width, double height) {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
            << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    }
    void text(double x, double y, const std::string& s, const char* anchor = "start") {
        os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"11\""
            << " text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& extra = {}) {
        os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
            << "\" stroke=\"black\"" << extra << "/>\n";
    }
    std::ostringstream& raw() { return os_; }
    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    std::ostringstream os_;
};

// Occupancy rows for an arm: either model probabilities or empirical counts.
std::vector<std::vector<double>> occupancy(const json& arm) {
    std::vector<std::vector<double>> rows;
    if (arm.contains("probabilities")) {
        for (const auto& r : arm["probabilities"]) rows.push_back(r.get<std::vector<double>>());
        return rows;
    }
    const double n = arm.at("n").get<double>();
    for (const auto& r : arm.at("counts")) {
        std::vector<double> p;
        for (const auto& c : r) p.push_back(c.get<double>() / n);
        rows.push_back(std::move(p));
    }
    return rows;
}

}  // namespace

std::string sop_area_svg(const json& arms, const std::string& title) {
    const double left = 40, top = 30, panel_w = 280, gap = 40, h = kProportionPixels;
    Svg svg(left + 2 * panel_w + gap + 120, top + h + 40);
    svg.text(left, 16, title);
    std::size_t K = 0;
    int panel = 0;
    for (const char* arm : {"E", "C"}) {
        const auto rows = occupancy(arms.at(arm));
        const double x0 = left + panel * (panel_w + gap);
        const std::size_t days = rows.size();
        K = rows.empty() ? 0 : rows.front().size();
        const double dx = days > 1 ? panel_w / static_cast<double>(days - 1) : panel_w;
        svg.text(x0 + panel_w / 2, top - 4, std::string("Arm ") + arm, "middle");
        std::vector<double> lower(days, 0.0);
        for (std::size_t y = 0; y < K; ++y) {
            std::vector<double> upper(days);
            bool any = false;
            for (std::size_t t = 0; t < days; ++t) {
                upper[t] = lower[t] + rows[t][y];
                any = any || rows[t][y] > 0.0;
            }
            if (any) {
                auto& os = svg.raw();
                os << "<polygon class=\"band\" data-arm=\"" << arm << "\" data-state=\"" << y + 1 << "\" fill=\""
                   << colour(y) << "\" points=\"";
                for (std::size_t t = 0; t < days; ++t)
                    os << num(x0 + dx * static_cast<double>(t)) << ',' << num(top + h - upper[t] * h) << ' ';
                for (std::size_t t = days; t-- > 0;) {
                    os << num(x0 + dx * static_cast<double>(t)) << ',' << num(top + h - lower[t] * h);
                    if (t) os << ' ';
                }
                os << "\"/>\n";
            }
            lower = std::move(upper);
        }
        svg.line(x0, top + h, x0 + panel_w, top + h);
        svg.line(x0, top, x0, top + h);
        svg.text(x0, top + h + 14, "0", "middle");
        svg.text(x0 + panel_w, top + h + 14, std::to_string(days ? days - 1 : 0), "middle");
        svg.text(x0 + panel_w / 2, top + h + 30, "Day", "middle");
        ++panel;
    }
    const double lx = left + 2 * panel_w + gap + 10;
    for (std::size_t y = 0; y < K; ++y) {
        const double ly = top + 16 * static_cast<double>(K - 1 - y);
        svg.raw() << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\""
                  << colour(y) << "\"/>\n";
        svg.text(lx + 14, ly + 9, "State " + std::to_string(y + 1));
    }
    return svg.finish();
}

std::string door_bars_svg(const json& r) {
    const auto& cats = r.at("categories");
    const double left = 40, top = 30, h = kProportionPixels, bar = 16, group = 2 * bar + 12;
    const double width = left + group * static_cast<double>(cats.size()) + 80;
    Svg svg(width, top + h + 60);
    svg.text(left, 16, "DOOR category distribution");
    double x = left + 6;
    for (const auto& c : cats) {
        int k = 0;
        for (const char* arm : {"E", "C"}) {
            const double p = c.at(std::string("proportion_") + (k == 0 ? "e" : "c")).get<double>();
            const double height = p * h;
            svg.raw() << "<rect class=\"bar\" data-arm=\"" << arm << "\" data-rank=\"" << c.at("rank").get<int>()
                      << "\" data-proportion=\"" << num(p) << "\" x=\"" << num(x + k * bar) << "\" y=\""
                      << num(top + h - height) << "\" width=\"" << num(bar) << "\" height=\"" << num(height)
                      << "\" fill=\"" << (k == 0 ? "#1f77b4" : "#ff7f0e") << "\"/>\n";
            ++k;
        }
        svg.text(x + bar, top + h + 14, std::to_string(c.at("rank").get<int>()), "middle");
        x += group;
    }
    svg.line(left, top + h, x, top + h);
    svg.line(left, top, left, top + h);
    svg.text(left - 4, top + 4, "1", "end");
    svg.text(left - 4, top + h, "0", "end");
    svg.text((left + x) / 2, top + h + 30, "DOOR rank (1 = worst)", "middle");
    svg.raw() << "<rect x=\"" << num(x + 8) << "\" y=\"" << num(top) << "\" width=\"10\" height=\"10\" fill=\"#1f77b4\"/>\n";
    svg.text(x + 22, top + 9, "E");
    svg.raw() << "<rect x=\"" << num(x + 8) << "\" y=\"" << num(top + 16)
              << "\" width=\"10\" height=\"10\" fill=\"#ff7f0e\"/>\n";
    svg.text(x + 22, top + 25, "C");
    return svg.finish();
}

std::string unwell_interval_svg(const json& most, int horizon_days) {
    const auto& summary = most.at("summary");
    const json* ci = nullptr;
    if (most.contains("bootstrap") && !most["bootstrap"].is_null()) ci = &most["bootstrap"]["ci"];
    const double left = 50, top = 30, h = kDayPixels * horizon_days, bar = 40;
    Svg svg(left + 3 * bar + 160, top + h + 50);
    svg.text(left, 16, "Mean time unwell (days)");
    const double base = top + h;
    int k = 0;
    for (const char* arm : {"E", "C"}) {
        const auto& t = summary.at("mean_time_unwell").at(arm);
        const double x = left + 20 + k * (bar + 30);
        const auto states = summary.at("unwell_states").get<std::vector<int>>();
        const auto per_state = t.at("per_state").get<std::vector<double>>();
        double acc = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            const double v = per_state[i];
            svg.raw() << "<rect class=\"segment\" data-arm=\"" << arm << "\" data-state=\"" << states[i]
                      << "\" data-days=\"" << num(v) << "\" x=\"" << num(x) << "\" y=\""
                      << num(base - (acc + v) * kDayPixels) << "\" width=\"" << num(bar) << "\" height=\""
                      << num(v * kDayPixels) << "\" fill=\"" << colour(static_cast<std::size_t>(states[i] - 1))
                      << "\"/>\n";
            acc += v;
        }
        const double total = t.at("total").get<double>();
        svg.raw() << "<line class=\"estimate\" data-arm=\"" << arm << "\" data-value=\"" << num(total) << "\" x1=\""
                  << num(x) << "\" x2=\"" << num(x + bar) << "\" y1=\"" << num(base - total * kDayPixels)
                  << "\" y2=\"" << num(base - total * kDayPixels) << "\" stroke=\"black\"/>\n";
        if (ci) {
            const auto& iv = ci->at(k == 0 ? "unwell_e" : "unwell_c");
            if (!iv[0].is_null() && !iv[1].is_null()) {
                const double lo = iv[0].get<double>(), hi = iv[1].get<double>();
                svg.raw() << "<line class=\"interval\" data-arm=\"" << arm << "\" data-lower=\"" << num(lo)
                          << "\" data-upper=\"" << num(hi) << "\" x1=\"" << num(x + bar / 2) << "\" x2=\""
                          << num(x + bar / 2) << "\" y1=\"" << num(base - lo * kDayPixels) << "\" y2=\""
                          << num(base - hi * kDayPixels) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
            }
        }
        svg.text(x + bar / 2, base + 14, std::string("Arm ") + arm, "middle");
        ++k;
    }
    svg.line(left, base, left + 2 * (bar + 30) + 20, base);
    svg.line(left, top, left, base);
    svg.text(left - 4, base, "0", "end");
    svg.text(left - 4, top + 4, std::to_string(horizon_days), "end");
    return svg.finish();
}

std::vector<Figure> emit_figures(const AnalysisReport& report) {
    const auto& m = report.method;
    if (m == "door") return {{"door_distribution.svg", door_bars_svg(report.result)}};
    if (m == "ldoor")
        return {{"sop_empirical.svg", sop_area_svg(report.result.at("empirical_sop"), "Empirical state occupancy")}};
    if (m == "most") {
        const int horizon = report.dataset.at("horizon").get<int>();
        return {{"sop_empirical.svg", sop_area_svg(report.result.at("empirical_sop"), "Empirical state occupancy")},
                {"sop_model.svg", sop_area_svg(report.result.at("summary").at("sop"), "Model state occupancy")},
                {"mean_time_unwell.svg", unwell_interval_svg(report.result, horizon)}};
    }
    throw Error(ErrorCode::MethodFigureMismatch, "method '" + m + "' has no figure");
}

}  // namespace hiermc
