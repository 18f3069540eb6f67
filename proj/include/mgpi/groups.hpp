#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mgpi/model.hpp"
#include "mgpi/types.hpp"

namespace mgpi::groups {

/// Symmetric pairwise distances in [0,1] with a zero diagonal, aligned with
/// an agent-id list.
using AffinityMatrix = nn::MatrixXd;

/// Disjoint agent-id sets covering the scene; members sorted, groups ordered
/// by their smallest member.
struct GroupPartition {
    std::vector<std::vector<int>> groups;
};

struct DbscanParams {
    double eps = 0.5;
    int min_pts = 2;
};

/// D(n,j) = 1 - (K(j<-n) + K(n<-j)) / 2 from the trained gate; symmetric by
/// construction.
double pair_distance(const model::MgpiNetwork& net, const AgentPose& a, const AgentPose& b,
                     double position_scale);

AffinityMatrix affinity(const model::MgpiNetwork& net, const Layout& layout, double position_scale);

/// Classic DBSCAN over a precomputed distance matrix (neighborhood D <= eps,
/// neighborhoods include the point itself). Noise points come back as
/// singleton groups; iteration order is ascending index for determinism.
GroupPartition dbscan(const AffinityMatrix& distances, const std::vector<int>& agent_ids,
                      const DbscanParams& params);
GroupPartition dbscan(const AffinityMatrix& distances, const DbscanParams& params);

GroupPartition detect_groups(const model::MgpiNetwork& net, const Layout& layout,
                             const DbscanParams& params, double position_scale);

/// DBSCAN on Euclidean distances scaled by the scene's maximum pairwise
/// distance; uses no gaze information.
GroupPartition pose_only_groups(const Layout& layout, const DbscanParams& params);

/// Ground-truth partition from a layout's group ids.
GroupPartition partition_from_layout(const Layout& layout);

struct GroupScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // raw counts, for micro-averaging across scenes
    int detected = 0;
    int pred_considered = 0;
    int truth_considered = 0;
};

/// A truth group counts as detected iff some predicted cluster equals it as a
/// set. By default groups of size 1 are excluded on both sides. F1 = 0 when
/// P + R = 0. Throws std::invalid_argument if the agent universes differ.
GroupScore score_groups(const GroupPartition& pred, const GroupPartition& truth,
                        bool include_singletons);

/// Gate response over a grid_n x grid_n world-frame lattice spanning
/// [-extent, extent]^2 (raw scene units) around an observer at the origin,
/// with fixed observer/neighbor gazes.
nn::MatrixXd attention_map(const model::MgpiNetwork& net, Vec2 observer_gaze, Vec2 neighbor_gaze,
                           int grid_n, double extent, double position_scale);

std::string attention_map_csv(const nn::MatrixXd& map, double extent);

std::string partition_to_json(const GroupPartition& partition);
GroupPartition partition_from_json_file(const std::filesystem::path& path);

}  // namespace mgpi::groups
