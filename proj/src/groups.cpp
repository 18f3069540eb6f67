#include "mgpi/groups.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "mgpi/geometry.hpp"
#include "mgpi/io.hpp"

namespace mgpi::groups {

using nlohmann::json;

double pair_distance(const model::MgpiNetwork& net, const AgentPose& a, const AgentPose& b,
                     double position_scale) {
    const double k_ab = model::kpm_gate(net, relative_frame(a, b, position_scale));
    const double k_ba = model::kpm_gate(net, relative_frame(b, a, position_scale));
    return 1.0 - 0.5 * (k_ab + k_ba);
}

AffinityMatrix affinity(const model::MgpiNetwork& net, const Layout& layout, double position_scale) {
    const int M = layout.size();
    if (M < 2) throw std::invalid_argument("affinity: need at least 2 agents");
    AffinityMatrix D = AffinityMatrix::Zero(M, M);
    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            const double d = pair_distance(net, layout.agents[static_cast<std::size_t>(i)].pose,
                                           layout.agents[static_cast<std::size_t>(j)].pose,
                                           position_scale);
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

GroupPartition dbscan(const AffinityMatrix& distances, const std::vector<int>& agent_ids,
                      const DbscanParams& params) {
    const int M = static_cast<int>(distances.rows());
    if (distances.cols() != M) throw std::invalid_argument("dbscan: matrix not square");
    if (static_cast<int>(agent_ids.size()) != M)
        throw std::invalid_argument("dbscan: id list does not match matrix");
    if (!(params.eps > 0.0) || params.min_pts < 1)
        throw std::invalid_argument("dbscan: invalid parameters");

    auto region = [&](int p) {
        std::vector<int> nb;
        for (int q = 0; q < M; ++q)
            if (distances(p, q) <= params.eps) nb.push_back(q);  // includes p itself
        return nb;
    };

    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(static_cast<std::size_t>(M), kUnvisited);
    int cluster = 0;
    for (int p = 0; p < M; ++p) {
        if (label[static_cast<std::size_t>(p)] != kUnvisited) continue;
        std::vector<int> nb = region(p);
        if (static_cast<int>(nb.size()) < params.min_pts) {
            label[static_cast<std::size_t>(p)] = kNoise;
            continue;
        }
        const int cid = cluster++;
        label[static_cast<std::size_t>(p)] = cid;
        std::deque<int> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            const int q = queue.front();
            queue.pop_front();
            if (label[static_cast<std::size_t>(q)] == kNoise) label[static_cast<std::size_t>(q)] = cid;
            if (label[static_cast<std::size_t>(q)] != kUnvisited) continue;
            label[static_cast<std::size_t>(q)] = cid;
            const std::vector<int> qnb = region(q);
            if (static_cast<int>(qnb.size()) >= params.min_pts)
                queue.insert(queue.end(), qnb.begin(), qnb.end());
        }
    }

    GroupPartition out;
    out.groups.resize(static_cast<std::size_t>(cluster));
    for (int p = 0; p < M; ++p) {
        const int l = label[static_cast<std::size_t>(p)];
        if (l >= 0)
            out.groups[static_cast<std::size_t>(l)].push_back(agent_ids[static_cast<std::size_t>(p)]);
        else
            out.groups.push_back({agent_ids[static_cast<std::size_t>(p)]});  // noise -> singleton
    }
    for (auto& g : out.groups) std::sort(g.begin(), g.end());
    std::sort(out.groups.begin(), out.groups.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
    return out;
}

GroupPartition dbscan(const AffinityMatrix& distances, const DbscanParams& params) {
    std::vector<int> ids(static_cast<std::size_t>(distances.rows()));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return dbscan(distances, ids, params);
}

namespace {

std::vector<int> layout_ids(const Layout& layout) {
    std::vector<int> ids;
    ids.reserve(layout.agents.size());
    for (const LayoutAgent& a : layout.agents) ids.push_back(a.id);
    return ids;
}

}  // namespace

GroupPartition detect_groups(const model::MgpiNetwork& net, const Layout& layout,
                             const DbscanParams& params, double position_scale) {
    return dbscan(affinity(net, layout, position_scale), layout_ids(layout), params);
}

GroupPartition pose_only_groups(const Layout& layout, const DbscanParams& params) {
    const int M = layout.size();
    if (M < 2) throw std::invalid_argument("pose_only_groups: need at least 2 agents");
    AffinityMatrix D = AffinityMatrix::Zero(M, M);
    double max_d = 0.0;
    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            const double d = (layout.agents[static_cast<std::size_t>(i)].pose.position -
                              layout.agents[static_cast<std::size_t>(j)].pose.position)
                                 .norm();
            D(i, j) = d;
            D(j, i) = d;
            max_d = std::max(max_d, d);
        }
    }
    if (max_d > 0.0) D /= max_d;  // all-coincident layouts keep the zero matrix
    return dbscan(D, layout_ids(layout), params);
}

GroupPartition partition_from_layout(const Layout& layout) {
    std::map<int, std::vector<int>> by_gid;
    for (const LayoutAgent& a : layout.agents) by_gid[a.group_id].push_back(a.id);
    GroupPartition out;
    for (auto& [gid, members] : by_gid) {
        std::sort(members.begin(), members.end());
        out.groups.push_back(members);
    }
    std::sort(out.groups.begin(), out.groups.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
    return out;
}

GroupScore score_groups(const GroupPartition& pred, const GroupPartition& truth,
                        bool include_singletons) {
    std::set<int> pred_universe, truth_universe;
    for (const auto& g : pred.groups) pred_universe.insert(g.begin(), g.end());
    for (const auto& g : truth.groups) truth_universe.insert(g.begin(), g.end());
    if (pred_universe != truth_universe)
        throw std::invalid_argument("score_groups: prediction and truth cover different agents");

    auto considered = [&](const GroupPartition& p) {
        std::vector<std::vector<int>> out;
        for (const auto& g : p.groups) {
            if (include_singletons || g.size() >= 2) {
                std::vector<int> s = g;
                std::sort(s.begin(), s.end());
                out.push_back(std::move(s));
            }
        }
        return out;
    };
    const auto pred_groups = considered(pred);
    const auto truth_groups = considered(truth);

    int detected = 0;
    for (const auto& t : truth_groups) {
        if (std::find(pred_groups.begin(), pred_groups.end(), t) != pred_groups.end()) detected += 1;
    }

    GroupScore score;
    score.detected = detected;
    score.pred_considered = static_cast<int>(pred_groups.size());
    score.truth_considered = static_cast<int>(truth_groups.size());
    score.precision = score.pred_considered > 0
                          ? static_cast<double>(detected) / score.pred_considered
                          : 0.0;
    score.recall = score.truth_considered > 0
                       ? static_cast<double>(detected) / score.truth_considered
                       : 0.0;
    score.f1 = (score.precision + score.recall) > 0.0
                   ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                   : 0.0;
    return score;
}

nn::MatrixXd attention_map(const model::MgpiNetwork& net, Vec2 observer_gaze, Vec2 neighbor_gaze,
                           int grid_n, double extent, double position_scale) {
    if (grid_n < 2) throw std::invalid_argument("attention_map: grid_n must be >= 2");
    const AgentPose observer{{0.0, 0.0}, observer_gaze.normalized()};
    nn::MatrixXd map(grid_n, grid_n);
    for (int row = 0; row < grid_n; ++row) {
        const double y = -extent + 2.0 * extent * row / (grid_n - 1);
        for (int col = 0; col < grid_n; ++col) {
            const double x = -extent + 2.0 * extent * col / (grid_n - 1);
            const AgentPose neighbor{{x, y}, neighbor_gaze.normalized()};
            map(row, col) = model::kpm_gate(net, relative_frame(observer, neighbor, position_scale));
        }
    }
    return map;
}

std::string attention_map_csv(const nn::MatrixXd& map, double extent) {
    std::ostringstream out;
    out << "row,col,x,y,gate\n";
    const int n = static_cast<int>(map.rows());
    for (int row = 0; row < n; ++row) {
        const double y = -extent + 2.0 * extent * row / (n - 1);
        for (int col = 0; col < n; ++col) {
            const double x = -extent + 2.0 * extent * col / (n - 1);
            out << row << ',' << col << ',' << format_double(x) << ',' << format_double(y) << ','
                << format_double(map(row, col)) << '\n';
        }
    }
    return out.str();
}

std::string partition_to_json(const GroupPartition& partition) {
    json doc;
    doc["format_version"] = 1;
    json groups = json::array();
    for (const auto& g : partition.groups) groups.push_back(g);
    doc["groups"] = groups;
    return doc.dump();
}

GroupPartition partition_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open groups file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("bad groups file " + path.string() + ": " + e.what());
    }
    GroupPartition out;
    for (const json& g : doc.at("groups")) out.groups.push_back(g.get<std::vector<int>>());
    for (auto& g : out.groups) std::sort(g.begin(), g.end());
    std::sort(out.groups.begin(), out.groups.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
    return out;
}

}  // namespace mgpi::groups
