#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgpi/types.hpp"

namespace mgpi {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Layout CSV: header `agent_id,x,y,gaze_x,gaze_y,group_id`, one agent per
/// row. Gazes are renormalized on load; a zero gaze, malformed row or
/// duplicate id raises ParseError naming the line number.
Layout load_layout(const std::filesystem::path& path);
void save_layout(const Layout& layout, const std::filesystem::path& path);

/// Demonstration JSON Lines: line 1 is a header record
/// {format_version, scenario, seed, agent_ids, source}; each following line
/// is one frame {t, agents:[{id,x,y,gx,gy,action,group}]}. The episode's
/// layout is the first frame's configuration.
void save_demonstration(const Demonstration& demo, const std::filesystem::path& path);
Demonstration load_demonstration(const std::filesystem::path& path);

/// All *.jsonl files in a directory, sorted by filename.
std::vector<Demonstration> load_demonstration_dir(const std::filesystem::path& dir);

/// Shortest decimal form that round-trips the exact double value.
std::string format_double(double v);

}  // namespace mgpi
