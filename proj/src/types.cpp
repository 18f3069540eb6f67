#include "mgpi/types.hpp"

#include <algorithm>

namespace mgpi {

const char* action_name(Action a) {
    switch (a) {
        case Action::Speaking: return "Speaking";
        case Action::Listening: return "Listening";
        case Action::Distracted: return "Distracted";
        case Action::StronglyAddressing: return "StronglyAddressing";
        case Action::WeaklyAddressing: return "WeaklyAddressing";
        case Action::Responding: return "Responding";
        case Action::Moving: return "Moving";
    }
    return "?";
}

std::string scenario_name(Scenario s) {
    return s == Scenario::Static ? "static" : "dynamic";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "static") return Scenario::Static;
    if (name == "dynamic") return Scenario::Dynamic;
    throw std::invalid_argument("unknown scenario: " + name);
}

namespace {

template <typename T>
int sorted_index_of(const std::vector<T>& agents, int agent_id) {
    auto it = std::lower_bound(agents.begin(), agents.end(), agent_id,
                               [](const T& a, int id) { return a.id < id; });
    if (it == agents.end() || it->id != agent_id) return -1;
    return static_cast<int>(it - agents.begin());
}

}  // namespace

int Layout::index_of(int agent_id) const { return sorted_index_of(agents, agent_id); }

int Frame::index_of(int agent_id) const { return sorted_index_of(agents, agent_id); }

void Layout::validate() const {
    if (agents.size() < 2) throw std::invalid_argument("layout needs at least 2 agents");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const LayoutAgent& a = agents[i];
        if (i > 0 && agents[i - 1].id >= a.id)
            throw std::invalid_argument("layout agent ids must be unique and sorted");
        if (!a.pose.position.is_finite() || !a.pose.gaze.is_finite())
            throw std::invalid_argument("layout contains non-finite pose values");
        if (!a.pose.gaze.is_unit())
            throw std::invalid_argument("layout gaze vectors must be unit length");
    }
}

}  // namespace mgpi
