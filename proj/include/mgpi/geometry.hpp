#pragma once

#include <vector>

#include "mgpi/types.hpp"

namespace mgpi {

/// Expresses a neighbor's gaze and position in the observer's frame: with
/// phi = atan2(observer gaze), rel_gaze = R(phi)^T * neighbor_gaze and
/// rel_pos = R(phi)^T * (neighbor_pos - observer_pos) / position_scale.
/// The observer's own gaze maps to (+1, 0).
/// Throws std::invalid_argument for non-unit gazes or non-positive scale.
RelativeObservation relative_frame(const AgentPose& observer, const AgentPose& neighbor,
                                   double position_scale);

/// The min(J, M-1) agents nearest to `agent_id` in the frame, by ascending
/// Euclidean distance with ties broken by ascending id.
/// Throws std::out_of_range for an unknown agent id.
std::vector<int> nearest_neighbors(const Frame& frame, int agent_id, int J);

/// Assembles the network input for (agent_id, t) from a demonstration.
/// Column k of each history (k = t-H+1 .. t) holds the relative observation
/// and one-hot actions taken from frame k, with the observer pose at frame k.
/// Requires t >= H (no padding); throws std::out_of_range otherwise.
AgentState build_state(const Demonstration& demo, int agent_id, int t, int H,
                       const std::vector<int>& neighbor_ids, double position_scale);

}  // namespace mgpi
