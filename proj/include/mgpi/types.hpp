#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgpi/vec2.hpp"

namespace mgpi {

/// Position plus unit gaze direction.
struct AgentPose {
    Vec2 position;
    Vec2 gaze{1.0, 0.0};
};

/// Conversational actions with their canonical one-hot indices.
/// Moving (index 6) only occurs under the dynamic scenario.
enum class Action : int {
    Speaking = 0,
    Listening = 1,
    Distracted = 2,
    StronglyAddressing = 3,
    WeaklyAddressing = 4,
    Responding = 5,
    Moving = 6,
};

inline constexpr int kStaticActionCount = 6;
inline constexpr int kDynamicActionCount = 7;

const char* action_name(Action a);

/// Speaking, StronglyAddressing, WeaklyAddressing and Responding all hold the
/// group's floor; at most one member of a group may hold it at a time.
inline bool is_speaker_role(Action a) {
    return a == Action::Speaking || a == Action::StronglyAddressing ||
           a == Action::WeaklyAddressing || a == Action::Responding;
}

enum class Scenario { Static, Dynamic };

inline int action_count(Scenario s) {
    return s == Scenario::Static ? kStaticActionCount : kDynamicActionCount;
}
std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct LayoutAgent {
    int id = 0;
    AgentPose pose;
    int group_id = 0;
};

/// Initial scene configuration. Agents are kept sorted by id and ids are
/// unique; group ids label a partition with no contiguity requirement.
struct Layout {
    std::vector<LayoutAgent> agents;

    int size() const { return static_cast<int>(agents.size()); }
    /// Index of an agent id, or -1 when absent.
    int index_of(int agent_id) const;
    /// Throws std::invalid_argument on duplicate ids, <2 agents, non-finite
    /// values or non-unit gazes.
    void validate() const;
};

struct FrameAgent {
    int id = 0;
    AgentPose pose;
    Action action = Action::Listening;
    int group_id = 0;
};

/// One simulation step: every agent's pose, action and group label.
struct Frame {
    int t = 0;
    std::vector<FrameAgent> agents;  // sorted by id

    int size() const { return static_cast<int>(agents.size()); }
    int index_of(int agent_id) const;
};

/// A full episode: the initial configuration plus frames t = 1..T.
struct Demonstration {
    Scenario scenario = Scenario::Static;
    Layout layout;
    std::vector<Frame> frames;
    std::uint64_t seed = 0;
    std::string source;  // optional dataset tag used for stratified fold splits

    int length() const { return static_cast<int>(frames.size()); }
    int num_agents() const { return layout.size(); }
};

/// A neighbor's gaze and scaled position expressed in the observer's frame,
/// where the observer's own gaze maps to (+1, 0).
struct RelativeObservation {
    Vec2 rel_gaze{1.0, 0.0};
    Vec2 rel_pos;
};

/// Network input for one (agent, time) query: per-neighbor relative gaze,
/// relative position and action histories over the horizon, plus the agent's
/// own action history. All matrices have exactly `horizon` columns.
struct AgentState {
    std::vector<int> neighbor_ids;
    std::vector<Eigen::Matrix2Xd> gaze_hist;   // 2 x H each
    std::vector<Eigen::Matrix2Xd> pos_hist;    // 2 x H each
    std::vector<Eigen::MatrixXd> action_hist;  // |U| x H each
    Eigen::MatrixXd self_hist;                 // |U| x H
    int horizon = 0;

    int num_neighbors() const { return static_cast<int>(neighbor_ids.size()); }
    int num_actions() const { return static_cast<int>(self_hist.rows()); }
};

}  // namespace mgpi
