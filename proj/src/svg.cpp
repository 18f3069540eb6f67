#include "mgpi/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mgpi {

namespace {

const char* action_color(Action a) {
    switch (a) {
        case Action::Speaking: return "#d62728";            // red
        case Action::Listening: return "#2ca02c";           // green
        case Action::Distracted: return "#e6c200";          // yellow
        case Action::StronglyAddressing: return "#ff7f0e";  // orange
        case Action::WeaklyAddressing: return "#9467bd";    // purple
        case Action::Responding: return "#1f77b4";          // blue
        case Action::Moving: return "#7f7f7f";              // gray
    }
    return "#000000";
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_frame_svg(const Frame& frame) {
    double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
    if (!frame.agents.empty()) {
        min_x = max_x = frame.agents.front().pose.position.x;
        min_y = max_y = frame.agents.front().pose.position.y;
        for (const FrameAgent& a : frame.agents) {
            min_x = std::min(min_x, a.pose.position.x);
            max_x = std::max(max_x, a.pose.position.x);
            min_y = std::min(min_y, a.pose.position.y);
            max_y = std::max(max_y, a.pose.position.y);
        }
    }
    const double span = std::max(max_x - min_x, max_y - min_y);
    const double margin = std::max(60.0, 0.15 * span);
    const double radius = std::max(6.0, 0.02 * (span + 2.0 * margin));
    const double arrow = 3.0 * radius;
    const double legend_h = 20.0 * kDynamicActionCount + 10.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(min_x - margin) << ' '
        << num(min_y - margin) << ' ' << num(max_x - min_x + 2.0 * margin + 220.0) << ' '
        << num(std::max(max_y - min_y + 2.0 * margin, legend_h)) << "\">\n";
    svg << "<g font-family=\"sans-serif\" font-size=\"" << num(radius) << "\">\n";
    svg << "<text x=\"" << num(min_x - margin + 4.0) << "\" y=\"" << num(min_y - margin + radius * 1.5)
        << "\">t=" << frame.t << "</text>\n";

    for (const FrameAgent& a : frame.agents) {
        const Vec2 p = a.pose.position;
        const Vec2 tip = p + a.pose.gaze * arrow;
        svg << "<line x1=\"" << num(p.x) << "\" y1=\"" << num(p.y) << "\" x2=\"" << num(tip.x)
            << "\" y2=\"" << num(tip.y) << "\" stroke=\"#333333\" stroke-width=\"" << num(radius * 0.2)
            << "\"/>\n";
        // small arrowhead
        const Vec2 dir = a.pose.gaze;
        const Vec2 left{-dir.y, dir.x};
        svg << "<path d=\"M " << num(tip.x) << ' ' << num(tip.y) << " L "
            << num(tip.x - (dir.x * 2.0 - left.x) * radius * 0.3) << ' '
            << num(tip.y - (dir.y * 2.0 - left.y) * radius * 0.3) << " L "
            << num(tip.x - (dir.x * 2.0 + left.x) * radius * 0.3) << ' '
            << num(tip.y - (dir.y * 2.0 + left.y) * radius * 0.3) << " Z\" fill=\"#333333\"/>\n";
        svg << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y) << "\" r=\"" << num(radius)
            << "\" fill=\"" << action_color(a.action) << "\" stroke=\"#000000\" stroke-width=\""
            << num(radius * 0.1) << "\"/>\n";
        svg << "<text x=\"" << num(p.x + radius * 1.2) << "\" y=\"" << num(p.y - radius * 1.2)
            << "\">" << a.id << "</text>\n";
    }

    // legend with rect swatches
    const double lx = max_x + margin + 10.0;
    double ly = min_y - margin + 20.0;
    for (int i = 0; i < kDynamicActionCount; ++i) {
        const Action a = static_cast<Action>(i);
        svg << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - radius) << "\" width=\"" << num(radius * 1.5)
            << "\" height=\"" << num(radius * 1.5) << "\" fill=\"" << action_color(a) << "\"/>\n";
        svg << "<text x=\"" << num(lx + radius * 2.0) << "\" y=\"" << num(ly + radius * 0.3) << "\">"
            << action_name(a) << "</text>\n";
        ly += radius * 2.5;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace mgpi
