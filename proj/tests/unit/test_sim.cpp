#include <doctest.h>

#include <set>

#include "mgpi/rng.hpp"
#include "mgpi/sim.hpp"

using namespace mgpi;

namespace {

Layout pair_layout() {
    Layout layout;
    layout.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0}, {1, {{2.0, 0.0}, {-1.0, 0.0}}, 0}};
    return layout;
}

int count_action(const Frame& f, Action a) {
    int n = 0;
    for (const FrameAgent& ag : f.agents) n += ag.action == a ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("generate_layout pair geometry") {
    sim::LayoutGenParams gen;
    gen.n_groups_min = gen.n_groups_max = 1;
    gen.group_size_min = gen.group_size_max = 2;
    gen.group_radius = 1.0;
    gen.center_spacing = 10.0;
    gen.jitter = 0.0;
    Rng rng(1);
    const Layout layout = sim::generate_layout(gen, rng);
    REQUIRE(layout.size() == 2);
    const Vec2 d = layout.agents[1].pose.position - layout.agents[0].pose.position;
    CHECK(d.norm() == doctest::Approx(2.0));
    // gazes point at each other
    CHECK(layout.agents[0].pose.gaze.dot(d.normalized()) == doctest::Approx(1.0));
    CHECK(layout.agents[1].pose.gaze.dot(d.normalized()) == doctest::Approx(-1.0));
}

TEST_CASE("generate_layout separates groups") {
    sim::LayoutGenParams gen;
    gen.n_groups_min = gen.n_groups_max = 2;
    gen.group_size_min = gen.group_size_max = 3;
    gen.group_radius = 1.0;
    gen.center_spacing = 10.0;
    gen.jitter = 0.0;
    Rng rng(2);
    const Layout layout = sim::generate_layout(gen, rng);
    REQUIRE(layout.size() == 6);
    double max_intra = 0.0, min_inter = 1e18;
    for (int i = 0; i < 6; ++i) {
        for (int j = i + 1; j < 6; ++j) {
            const double d = (layout.agents[static_cast<std::size_t>(i)].pose.position -
                              layout.agents[static_cast<std::size_t>(j)].pose.position)
                                 .norm();
            if (layout.agents[static_cast<std::size_t>(i)].group_id ==
                layout.agents[static_cast<std::size_t>(j)].group_id)
                max_intra = std::max(max_intra, d);
            else
                min_inter = std::min(min_inter, d);
        }
    }
    CHECK(min_inter > max_intra);
}

TEST_CASE("generate_layout is seed deterministic") {
    sim::LayoutGenParams gen;
    Rng a(77), b(77);
    const Layout la = sim::generate_layout(gen, a);
    const Layout lb = sim::generate_layout(gen, b);
    REQUIRE(la.size() == lb.size());
    for (int i = 0; i < la.size(); ++i) {
        CHECK(la.agents[static_cast<std::size_t>(i)].pose.position.x ==
              lb.agents[static_cast<std::size_t>(i)].pose.position.x);
        CHECK(la.agents[static_cast<std::size_t>(i)].group_id ==
              lb.agents[static_cast<std::size_t>(i)].group_id);
    }
}

TEST_CASE("init_sim assigns one speaker per group") {
    Layout layout;
    layout.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0},
                     {1, {{2.0, 0.0}, {-1.0, 0.0}}, 0},
                     {2, {{0.0, 2.0}, {1.0, 0.0}}, 0},
                     {3, {{50.0, 0.0}, {1.0, 0.0}}, 1}};
    const sim::SimState st = sim::init_sim(layout, Scenario::Static, sim::RuleParams{}, 5);
    CHECK(count_action(st.frame, Action::Speaking) == 1);
    CHECK(count_action(st.frame, Action::Listening) == 2);
    // singleton group is distracted
    CHECK(st.frame.agents[3].action == Action::Distracted);

    const sim::SimState st2 = sim::init_sim(layout, Scenario::Static, sim::RuleParams{}, 5);
    for (int i = 0; i < 4; ++i)
        CHECK(st.frame.agents[static_cast<std::size_t>(i)].action ==
              st2.frame.agents[static_cast<std::size_t>(i)].action);
}

TEST_CASE("step decrements a running speak timer without transitions") {
    sim::RuleParams rules;
    rules.p_distract = 0.0;
    rules.p_weak_address = 0.0;
    sim::SimState st = sim::init_sim(pair_layout(), Scenario::Static, rules, 3);
    const int speaker = st.frame.agents[0].action == Action::Speaking ? 0 : 1;
    const int timer_before = st.timers[static_cast<std::size_t>(speaker)].speak_timer;
    REQUIRE(timer_before > 1);
    sim::step(st, rules);
    CHECK(st.frame.agents[static_cast<std::size_t>(speaker)].action == Action::Speaking);
    CHECK(st.timers[static_cast<std::size_t>(speaker)].speak_timer == timer_before - 1);
    CHECK(st.frame.agents[static_cast<std::size_t>(1 - speaker)].action == Action::Listening);
}

TEST_CASE("speak timer expiry hands the turn over") {
    sim::RuleParams rules;
    rules.p_distract = 0.0;
    rules.p_weak_address = 0.0;
    sim::SimState st = sim::init_sim(pair_layout(), Scenario::Static, rules, 3);
    const int speaker = st.frame.agents[0].action == Action::Speaking ? 0 : 1;
    const int other = 1 - speaker;
    st.timers[static_cast<std::size_t>(speaker)].speak_timer = 0;  // force expiry at entry
    sim::step(st, rules);
    CHECK(st.frame.agents[static_cast<std::size_t>(speaker)].action == Action::Listening);
    CHECK(st.frame.agents[static_cast<std::size_t>(other)].action == Action::Responding);
    CHECK(st.timers[static_cast<std::size_t>(other)].respond_timer == rules.respond_duration);
    // and the responder gets the floor after respond_duration further steps
    for (int k = 0; k < rules.respond_duration; ++k) sim::step(st, rules);
    CHECK(st.frame.agents[static_cast<std::size_t>(other)].action == Action::Responding);
    sim::step(st, rules);
    CHECK(st.frame.agents[static_cast<std::size_t>(other)].action == Action::Speaking);
}

TEST_CASE("moving agent joins as the next speaker on arrival") {
    Layout layout;
    layout.agents = {{0, {{0.0, 0.0}, {1.0, 0.0}}, 0},
                     {1, {{2.0, 0.0}, {-1.0, 0.0}}, 0},
                     {2, {{30.0, 0.0}, {1.0, 0.0}}, 1},
                     {3, {{32.0, 0.0}, {-1.0, 0.0}}, 1}};
    sim::RuleParams rules;
    rules.p_distract = 0.0;
    rules.p_weak_address = 0.0;
    rules.p_move = 0.0;
    rules.join_radius = 2.0;
    rules.arrive_epsilon = 0.5;
    rules.move_speed = 100.0;  // arrive in one step

    sim::SimState st = sim::init_sim(layout, Scenario::Dynamic, rules, 9);
    // force agent 0 into a move toward group 1
    st.frame.agents[0].action = Action::Moving;
    st.timers[0].move_group = 1;
    st.timers[0].move_target = {29.0, 0.0};
    // keep the old group's speaker stable: make agent 1 its speaker
    st.frame.agents[1].action = Action::Speaking;
    st.timers[1].speak_timer = 50;
    if (st.frame.agents[0].action != Action::Moving) FAIL("setup");

    const int old_holder =
        st.frame.agents[2].action == Action::Speaking || st.frame.agents[2].action == Action::Responding
            ? 2
            : 3;
    sim::step(st, rules);
    CHECK(st.frame.agents[0].action == Action::Responding);
    CHECK(st.frame.agents[0].group_id == 1);
    CHECK(st.frame.agents[static_cast<std::size_t>(old_holder)].action == Action::Listening);
    // departed group shrank to one member, which goes distracted
    CHECK(st.frame.agents[1].action == Action::Distracted);
}

TEST_CASE("rollout seed determinism and validation") {
    Rng rng(31);
    sim::LayoutGenParams gen;
    const Layout layout = sim::generate_layout(gen, rng);

    const Demonstration a = sim::rollout(layout, Scenario::Static, 600, sim::RuleParams{}, 17);
    const Demonstration b = sim::rollout(layout, Scenario::Static, 600, sim::RuleParams{}, 17);
    REQUIRE(a.length() == 600);
    for (int t = 0; t < 600; ++t) {
        for (int i = 0; i < a.num_agents(); ++i) {
            CHECK(a.frames[static_cast<std::size_t>(t)].agents[static_cast<std::size_t>(i)].action ==
                  b.frames[static_cast<std::size_t>(t)].agents[static_cast<std::size_t>(i)].action);
            CHECK(a.frames[static_cast<std::size_t>(t)].agents[static_cast<std::size_t>(i)].pose.gaze.x ==
                  b.frames[static_cast<std::size_t>(t)].agents[static_cast<std::size_t>(i)].pose.gaze.x);
        }
    }

    const sim::ValidationResult vr = sim::validate_demonstration(a);
    CHECK_MESSAGE(vr.ok, vr.message);

    const Demonstration single = sim::rollout(layout, Scenario::Static, 1, sim::RuleParams{}, 17);
    CHECK(single.length() == 1);
    for (int i = 0; i < single.num_agents(); ++i)
        CHECK(single.frames[0].agents[static_cast<std::size_t>(i)].action ==
              a.frames[0].agents[static_cast<std::size_t>(i)].action);
}

TEST_CASE("static scenario has no movement and constant poses") {
    Rng rng(41);
    sim::LayoutGenParams gen;
    const Layout layout = sim::generate_layout(gen, rng);
    const Demonstration demo = sim::rollout(layout, Scenario::Static, 300, sim::RuleParams{}, 7);
    for (const Frame& f : demo.frames) {
        CHECK(count_action(f, Action::Moving) == 0);
        for (int i = 0; i < f.size(); ++i) {
            CHECK(f.agents[static_cast<std::size_t>(i)].pose.position.x ==
                  demo.frames[0].agents[static_cast<std::size_t>(i)].pose.position.x);
            CHECK(f.agents[static_cast<std::size_t>(i)].group_id ==
                  demo.frames[0].agents[static_cast<std::size_t>(i)].group_id);
        }
    }
}

TEST_CASE("dynamic episodes validate and change groups only by moves") {
    Rng rng(51);
    sim::LayoutGenParams gen;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng lrng = rng.fork(seed);
        const Layout layout = sim::generate_layout(gen, lrng);
        const Demonstration demo = sim::rollout(layout, Scenario::Dynamic, 600, sim::RuleParams{}, seed);
        const sim::ValidationResult vr = sim::validate_demonstration(demo);
        CHECK_MESSAGE(vr.ok, vr.message);
    }
}

TEST_CASE("validator flags corrupted episodes") {
    Rng rng(61);
    sim::LayoutGenParams gen;
    const Layout layout = sim::generate_layout(gen, rng);
    Demonstration demo = sim::rollout(layout, Scenario::Static, 50, sim::RuleParams{}, 3);

    Demonstration bad = demo;
    // create a second speaker in some group
    bad.frames[10].agents[0].action = Action::Speaking;
    bad.frames[10].agents[1].action = Action::Speaking;
    bad.frames[10].agents[0].group_id = bad.frames[10].agents[1].group_id;
    CHECK_FALSE(sim::validate_demonstration(bad).ok);

    Demonstration bad2 = demo;
    bad2.frames[20].agents[0].pose.position.x += 1.0;  // static pose change
    CHECK_FALSE(sim::validate_demonstration(bad2).ok);
}
