#include "mgpi/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mgpi {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string& s, const std::string& what, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& what, int line_no) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
    }
}

Layout layout_from_frame(const Frame& frame) {
    Layout layout;
    layout.agents.reserve(frame.agents.size());
    for (const FrameAgent& a : frame.agents) layout.agents.push_back({a.id, a.pose, a.group_id});
    return layout;
}

}  // namespace

Layout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open layout file: " + path.string());

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty layout file: " + path.string());
    ++line_no;
    // Tolerate trailing \r from CRLF files.
    auto strip = [](std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    };
    strip(line);
    if (line != "agent_id,x,y,gaze_x,gaze_y,group_id")
        throw ParseError("line 1: expected header agent_id,x,y,gaze_x,gaze_y,group_id");

    Layout layout;
    while (std::getline(in, line)) {
        ++line_no;
        strip(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 6)
            throw ParseError("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                             std::to_string(fields.size()));
        LayoutAgent a;
        a.id = parse_int(fields[0], "agent_id", line_no);
        a.pose.position = {parse_real(fields[1], "x", line_no), parse_real(fields[2], "y", line_no)};
        Vec2 gaze{parse_real(fields[3], "gaze_x", line_no), parse_real(fields[4], "gaze_y", line_no)};
        a.group_id = parse_int(fields[5], "group_id", line_no);
        if (!gaze.is_finite() || gaze.norm() == 0.0)
            throw ParseError("line " + std::to_string(line_no) + ": zero or non-finite gaze vector");
        a.pose.gaze = gaze.normalized();
        if (!a.pose.position.is_finite())
            throw ParseError("line " + std::to_string(line_no) + ": non-finite position");
        layout.agents.push_back(a);
    }
    std::sort(layout.agents.begin(), layout.agents.end(),
              [](const LayoutAgent& a, const LayoutAgent& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < layout.agents.size(); ++i) {
        if (layout.agents[i - 1].id == layout.agents[i].id)
            throw ParseError("duplicate agent_id " + std::to_string(layout.agents[i].id) + " in " +
                             path.string());
    }
    layout.validate();
    return layout;
}

void save_layout(const Layout& layout, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write layout file: " + path.string());
    out << "agent_id,x,y,gaze_x,gaze_y,group_id\n";
    for (const LayoutAgent& a : layout.agents) {
        out << a.id << ',' << format_double(a.pose.position.x) << ',' << format_double(a.pose.position.y)
            << ',' << format_double(a.pose.gaze.x) << ',' << format_double(a.pose.gaze.y) << ','
            << a.group_id << '\n';
    }
}

void save_demonstration(const Demonstration& demo, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write demonstration file: " + path.string());

    json header;
    header["format_version"] = 1;
    header["scenario"] = scenario_name(demo.scenario);
    header["seed"] = demo.seed;
    json ids = json::array();
    for (const LayoutAgent& a : demo.layout.agents) ids.push_back(a.id);
    header["agent_ids"] = ids;
    header["source"] = demo.source;
    out << header.dump() << '\n';

    for (const Frame& frame : demo.frames) {
        json rec;
        rec["t"] = frame.t;
        json agents = json::array();
        for (const FrameAgent& a : frame.agents) {
            agents.push_back({{"id", a.id},
                              {"x", a.pose.position.x},
                              {"y", a.pose.position.y},
                              {"gx", a.pose.gaze.x},
                              {"gy", a.pose.gaze.y},
                              {"action", static_cast<int>(a.action)},
                              {"group", a.group_id}});
        }
        rec["agents"] = agents;
        out << rec.dump() << '\n';
    }
}

Demonstration load_demonstration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open demonstration file: " + path.string());

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty demonstration file: " + path.string());
    ++line_no;

    Demonstration demo;
    std::vector<int> agent_ids;
    try {
        const json header = json::parse(line);
        if (header.at("format_version").get<int>() != 1)
            throw ParseError("unsupported demonstration format_version in " + path.string());
        demo.scenario = scenario_from_name(header.at("scenario").get<std::string>());
        demo.seed = header.at("seed").get<std::uint64_t>();
        agent_ids = header.at("agent_ids").get<std::vector<int>>();
        if (header.contains("source")) demo.source = header["source"].get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError("line 1: bad demonstration header: " + std::string(e.what()));
    }

    const int U = action_count(demo.scenario);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Frame frame;
        try {
            const json rec = json::parse(line);
            frame.t = rec.at("t").get<int>();
            for (const json& ja : rec.at("agents")) {
                FrameAgent a;
                a.id = ja.at("id").get<int>();
                a.pose.position = {ja.at("x").get<double>(), ja.at("y").get<double>()};
                a.pose.gaze = {ja.at("gx").get<double>(), ja.at("gy").get<double>()};
                const int act = ja.at("action").get<int>();
                if (act < 0 || act >= U)
                    throw ParseError("action index " + std::to_string(act) + " out of range");
                a.action = static_cast<Action>(act);
                a.group_id = ja.at("group").get<int>();
                frame.agents.push_back(a);
            }
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": bad frame record: " + e.what());
        }
        std::sort(frame.agents.begin(), frame.agents.end(),
                  [](const FrameAgent& a, const FrameAgent& b) { return a.id < b.id; });
        if (frame.agents.size() != agent_ids.size())
            throw ParseError("line " + std::to_string(line_no) + ": frame agent set differs from header");
        for (std::size_t i = 0; i < agent_ids.size(); ++i) {
            // header order is the id set; frames must carry exactly those ids
            if (std::find(agent_ids.begin(), agent_ids.end(), frame.agents[i].id) == agent_ids.end())
                throw ParseError("line " + std::to_string(line_no) + ": unexpected agent id " +
                                 std::to_string(frame.agents[i].id));
        }
        demo.frames.push_back(std::move(frame));
    }
    if (demo.frames.empty()) throw ParseError("demonstration has no frames: " + path.string());
    for (std::size_t i = 0; i < demo.frames.size(); ++i) {
        if (demo.frames[i].t != static_cast<int>(i) + 1)
            throw ParseError("demonstration frames not contiguous from t=1 in " + path.string());
    }
    demo.layout = layout_from_frame(demo.frames.front());
    return demo;
}

std::vector<Demonstration> load_demonstration_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Demonstration> demos;
    demos.reserve(files.size());
    for (const auto& f : files) demos.push_back(load_demonstration(f));
    return demos;
}

}  // namespace mgpi
