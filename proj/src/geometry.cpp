#include "mgpi/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mgpi {

RelativeObservation relative_frame(const AgentPose& observer, const AgentPose& neighbor,
                                   double position_scale) {
    if (!observer.gaze.is_unit() || !neighbor.gaze.is_unit())
        throw std::invalid_argument("relative_frame: gaze vectors must be unit length");
    if (!(position_scale > 0.0))
        throw std::invalid_argument("relative_frame: position_scale must be positive");

    // R(phi)^T applied as rows (cos, sin) / (-sin, cos); phi = atan2 of the
    // observer gaze, so cos/sin are the gaze components themselves.
    const double c = observer.gaze.x;
    const double s = observer.gaze.y;
    const Vec2 d = neighbor.position - observer.position;

    RelativeObservation rel;
    rel.rel_gaze = {c * neighbor.gaze.x + s * neighbor.gaze.y,
                    -s * neighbor.gaze.x + c * neighbor.gaze.y};
    rel.rel_pos = Vec2{c * d.x + s * d.y, -s * d.x + c * d.y} / position_scale;
    return rel;
}

std::vector<int> nearest_neighbors(const Frame& frame, int agent_id, int J) {
    const int self = frame.index_of(agent_id);
    if (self < 0) throw std::out_of_range("nearest_neighbors: unknown agent id");

    const Vec2 origin = frame.agents[static_cast<std::size_t>(self)].pose.position;
    std::vector<std::pair<double, int>> others;
    others.reserve(frame.agents.size() - 1);
    for (const FrameAgent& a : frame.agents) {
        if (a.id == agent_id) continue;
        const Vec2 d = a.pose.position - origin;
        others.emplace_back(d.dot(d), a.id);
    }
    std::sort(others.begin(), others.end());

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(J, 0)), others.size());
    std::vector<int> ids(take);
    for (std::size_t i = 0; i < take; ++i) ids[i] = others[i].second;
    return ids;
}

AgentState build_state(const Demonstration& demo, int agent_id, int t, int H,
                       const std::vector<int>& neighbor_ids, double position_scale) {
    if (H < 1) throw std::invalid_argument("build_state: horizon must be >= 1");
    if (t < H) throw std::out_of_range("build_state: t < H (window precedes the episode)");
    if (t > demo.length()) throw std::out_of_range("build_state: t beyond episode length");

    const int U = action_count(demo.scenario);
    const int J = static_cast<int>(neighbor_ids.size());

    AgentState state;
    state.neighbor_ids = neighbor_ids;
    state.horizon = H;
    state.gaze_hist.assign(static_cast<std::size_t>(J), Eigen::Matrix2Xd(2, H));
    state.pos_hist.assign(static_cast<std::size_t>(J), Eigen::Matrix2Xd(2, H));
    state.action_hist.assign(static_cast<std::size_t>(J), Eigen::MatrixXd::Zero(U, H));
    state.self_hist = Eigen::MatrixXd::Zero(U, H);

    for (int col = 0; col < H; ++col) {
        const int k = t - H + 1 + col;  // frame time, 1-based
        const Frame& frame = demo.frames[static_cast<std::size_t>(k - 1)];
        const int self = frame.index_of(agent_id);
        if (self < 0) throw std::out_of_range("build_state: agent missing from frame");
        const FrameAgent& me = frame.agents[static_cast<std::size_t>(self)];
        state.self_hist(static_cast<int>(me.action), col) = 1.0;

        for (int j = 0; j < J; ++j) {
            const int ni = frame.index_of(neighbor_ids[static_cast<std::size_t>(j)]);
            if (ni < 0) throw std::out_of_range("build_state: neighbor missing from frame");
            const FrameAgent& nb = frame.agents[static_cast<std::size_t>(ni)];
            const RelativeObservation rel = relative_frame(me.pose, nb.pose, position_scale);
            state.gaze_hist[static_cast<std::size_t>(j)].col(col) << rel.rel_gaze.x, rel.rel_gaze.y;
            state.pos_hist[static_cast<std::size_t>(j)].col(col) << rel.rel_pos.x, rel.rel_pos.y;
            state.action_hist[static_cast<std::size_t>(j)](static_cast<int>(nb.action), col) = 1.0;
        }
    }
    return state;
}

}  // namespace mgpi
