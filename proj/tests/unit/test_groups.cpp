#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "mgpi/groups.hpp"
#include "mgpi/rng.hpp"

using namespace mgpi;
using groups::AffinityMatrix;
using groups::DbscanParams;
using groups::GroupPartition;

namespace {

model::MgpiNetwork gate_net(std::uint64_t seed) {
    model::MgpiConfig cfg;
    cfg.horizon = 4;
    cfg.encoder_hidden = 8;
    cfg.gate_hidden = 8;
    cfg.policy_hidden = 8;
    cfg.position_scale = 1.0;
    return model::MgpiNetwork::create(cfg, seed);
}

model::MgpiNetwork zero_gate_net() {
    model::MgpiNetwork net = gate_net(1);
    for (nn::ParamRef& ref : net.param_refs()) std::fill(ref.data, ref.data + ref.size(), 0.0);
    return net;
}

/// Connected components of the eps-graph, as an oracle for min_pts <= 2.
GroupPartition cc_oracle(const AffinityMatrix& D, double eps) {
    const int M = static_cast<int>(D.rows());
    std::vector<int> comp(static_cast<std::size_t>(M), -1);
    int next = 0;
    for (int i = 0; i < M; ++i) {
        if (comp[static_cast<std::size_t>(i)] >= 0) continue;
        std::vector<int> stack = {i};
        comp[static_cast<std::size_t>(i)] = next;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            for (int q = 0; q < M; ++q) {
                if (comp[static_cast<std::size_t>(q)] < 0 && D(p, q) <= eps) {
                    comp[static_cast<std::size_t>(q)] = next;
                    stack.push_back(q);
                }
            }
        }
        ++next;
    }
    GroupPartition out;
    out.groups.resize(static_cast<std::size_t>(next));
    for (int i = 0; i < M; ++i) out.groups[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])].push_back(i);
    std::sort(out.groups.begin(), out.groups.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
    return out;
}

bool same_partition(const GroupPartition& a, const GroupPartition& b) {
    std::set<std::vector<int>> sa(a.groups.begin(), a.groups.end());
    std::set<std::vector<int>> sb(b.groups.begin(), b.groups.end());
    return sa == sb;
}

}  // namespace

TEST_CASE("pair_distance arithmetic and symmetry") {
    const model::MgpiNetwork net = zero_gate_net();  // gate constant 0.5
    const AgentPose a{{0.0, 0.0}, {1.0, 0.0}};
    const AgentPose b{{1.0, 0.5}, {0.0, 1.0}};
    CHECK(groups::pair_distance(net, a, b, 1.0) == doctest::Approx(0.5));
    CHECK(groups::pair_distance(net, a, b, 1.0) == groups::pair_distance(net, b, a, 1.0));

    const model::MgpiNetwork trained = gate_net(9);
    const double ab = groups::pair_distance(trained, a, b, 1.0);
    const double ba = groups::pair_distance(trained, b, a, 1.0);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
}

TEST_CASE("affinity matrix is symmetric with zero diagonal") {
    Layout layout;
    layout.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0},
                     {1, {{1.0, 0.0}, {-1.0, 0.0}}, 0},
                     {2, {{0.0, 2.0}, {0.0, 1.0}}, 1}};
    const model::MgpiNetwork net = gate_net(11);
    const AffinityMatrix D = groups::affinity(net, layout, 1.0);
    CHECK(D.rows() == 3);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 3; ++i) CHECK(D(i, i) == 0.0);
    CHECK(D.maxCoeff() <= 1.0);
    CHECK(D.minCoeff() >= 0.0);
}

TEST_CASE("dbscan hand example") {
    AffinityMatrix D = AffinityMatrix::Constant(4, 4, 0.9);
    for (int i = 0; i < 4; ++i) D(i, i) = 0.0;
    D(0, 1) = D(1, 0) = 0.1;
    D(2, 3) = D(3, 2) = 0.1;
    const GroupPartition got = groups::dbscan(D, {1, 2, 3, 4}, {0.3, 2});
    REQUIRE(got.groups.size() == 2);
    CHECK(got.groups[0] == std::vector<int>{1, 2});
    CHECK(got.groups[1] == std::vector<int>{3, 4});
}

TEST_CASE("dbscan degenerate matrices") {
    AffinityMatrix zero = AffinityMatrix::Zero(5, 5);
    const GroupPartition one = groups::dbscan(zero, {0.5, 2});
    REQUIRE(one.groups.size() == 1);
    CHECK(one.groups[0].size() == 5);

    AffinityMatrix far = AffinityMatrix::Constant(4, 4, 1.0);
    for (int i = 0; i < 4; ++i) far(i, i) = 0.0;
    const GroupPartition singles = groups::dbscan(far, {0.5, 2});
    CHECK(singles.groups.size() == 4);
}

TEST_CASE("dbscan equals eps-graph components for min_pts <= 2") {
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const int M = rng.uniform_int(2, 8);
        AffinityMatrix D = AffinityMatrix::Zero(M, M);
        for (int i = 0; i < M; ++i)
            for (int j = i + 1; j < M; ++j) D(i, j) = D(j, i) = rng.uniform01();
        const double eps = rng.uniform(0.05, 1.0);
        const int min_pts = rng.uniform_int(1, 2);
        const GroupPartition got = groups::dbscan(D, {eps, min_pts});
        const GroupPartition want = cc_oracle(D, eps);
        CHECK_MESSAGE(same_partition(got, want), "trial ", trial);
        // partition property: disjoint cover
        std::set<int> seen;
        std::size_t total = 0;
        for (const auto& g : got.groups) {
            total += g.size();
            seen.insert(g.begin(), g.end());
        }
        CHECK(total == static_cast<std::size_t>(M));
        CHECK(seen.size() == static_cast<std::size_t>(M));
    }
}

TEST_CASE("detect_groups with an untrained gate keeps everyone together") {
    Layout layout;
    layout.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0},
                     {1, {{1.0, 0.0}, {-1.0, 0.0}}, 0},
                     {2, {{8.0, 0.0}, {0.0, 1.0}}, 1},
                     {3, {{9.0, 0.0}, {0.0, -1.0}}, 1}};
    const model::MgpiNetwork net = zero_gate_net();  // D = 0.5 everywhere
    const GroupPartition got = groups::detect_groups(net, layout, {0.5, 2}, 1.0);
    REQUIRE(got.groups.size() == 1);
    CHECK(got.groups[0].size() == 4);

    const GroupPartition again = groups::detect_groups(net, layout, {0.5, 2}, 1.0);
    CHECK(same_partition(got, again));
}

TEST_CASE("pose_only_groups") {
    Layout layout;
    layout.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0},
                     {1, {{1.0, 0.0}, {1.0, 0.0}}, 0},
                     {2, {{10.0, 0.0}, {1.0, 0.0}}, 1}};
    const GroupPartition got = groups::pose_only_groups(layout, {0.3, 2});
    REQUIRE(got.groups.size() == 2);
    CHECK(got.groups[0] == std::vector<int>{0, 1});
    CHECK(got.groups[1] == std::vector<int>{2});

    // scale invariance
    Layout scaled = layout;
    for (LayoutAgent& a : scaled.agents) a.pose.position = a.pose.position * 7.0;
    CHECK(same_partition(got, groups::pose_only_groups(scaled, {0.3, 2})));

    // two agents normalize to distance exactly 1
    Layout two;
    two.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0}, {1, {{5.0, 0.0}, {1.0, 0.0}}, 0}};
    const GroupPartition pair = groups::pose_only_groups(two, {0.5, 2});
    CHECK(pair.groups.size() == 2);
}

TEST_CASE("score_groups hand-enumerated examples") {
    GroupPartition truth;
    truth.groups = {{1, 2}, {3, 4, 5}};
    GroupPartition pred;
    pred.groups = {{1, 2}, {3, 4}, {5}};

    const groups::GroupScore ex = groups::score_groups(pred, truth, false);
    CHECK(ex.precision == 0.5);
    CHECK(ex.recall == 0.5);
    CHECK(ex.f1 == 0.5);

    const groups::GroupScore inc = groups::score_groups(pred, truth, true);
    CHECK(inc.precision == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(inc.recall == 0.5);
    CHECK(inc.f1 == doctest::Approx(0.4).epsilon(1e-12));

    const groups::GroupScore perfect = groups::score_groups(truth, truth, false);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    GroupPartition other_universe;
    other_universe.groups = {{1, 2}, {3, 4, 6}};
    CHECK_THROWS_AS(groups::score_groups(other_universe, truth, false), std::invalid_argument);
}

TEST_CASE("attention map bounds and zero-net baseline") {
    const model::MgpiNetwork net = zero_gate_net();
    const nn::MatrixXd map = groups::attention_map(net, {-1.0, 0.0}, {1.0, 0.0}, 11, 3.0, 1.0);
    CHECK(map.rows() == 11);
    CHECK((map.array() == 0.5).all());

    const model::MgpiNetwork trained = gate_net(31);
    const nn::MatrixXd m2 = groups::attention_map(trained, {-1.0, 0.0}, {1.0, 0.0}, 11, 3.0, 1.0);
    CHECK(m2.maxCoeff() <= 1.0);
    CHECK(m2.minCoeff() >= 0.0);

    const std::string csv = groups::attention_map_csv(m2, 3.0);
    CHECK(csv.rfind("row,col,x,y,gate\n", 0) == 0);
}

TEST_CASE("partition json round trip") {
    GroupPartition p;
    p.groups = {{3, 1}, {7}, {2, 5}};
    const std::string text = groups::partition_to_json(p);
    const std::filesystem::path path = std::filesystem::temp_directory_path() / "mgpi_groups.json";
    {
        std::ofstream out(path);
        out << text;
    }
    const GroupPartition loaded = groups::partition_from_json_file(path);
    REQUIRE(loaded.groups.size() == 3);
    CHECK(loaded.groups[0] == std::vector<int>{1, 3});
    CHECK(loaded.groups[1] == std::vector<int>{2, 5});
    CHECK(loaded.groups[2] == std::vector<int>{7});
}
