#include "mgpi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mgpi/io.hpp"

namespace mgpi::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool prob_ok(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void RuleParams::validate() const {
    if (!prob_ok(p_distract) || !prob_ok(p_strong_address) || !prob_ok(p_return_addressed) ||
        !prob_ok(p_return_spontaneous) || !prob_ok(p_weak_address) || !prob_ok(p_move))
        throw std::invalid_argument("rule probabilities must lie in [0,1]");
    if (distract_trigger_steps < 1 || speak_duration_min < 1 || weak_address_min < 1 ||
        respond_duration < 1)
        throw std::invalid_argument("rule durations must be >= 1");
    if (speak_duration_max < speak_duration_min || weak_address_max < weak_address_min)
        throw std::invalid_argument("duration ranges must be non-empty");
    if (!(move_speed > 0.0) || !(arrive_epsilon > 0.0) || !(join_radius > 0.0))
        throw std::invalid_argument("speeds and radii must be positive");
}

void LayoutGenParams::validate() const {
    if (n_groups_min < 1 || n_groups_max < n_groups_min)
        throw std::invalid_argument("group count range must be non-empty");
    if (group_size_min < 1 || group_size_max < group_size_min)
        throw std::invalid_argument("group size range must be non-empty");
    if (!(group_radius > 0.0) || jitter < 0.0)
        throw std::invalid_argument("radius must be positive and jitter non-negative");
    if (!(center_spacing > 2.0 * (group_radius + jitter)))
        throw std::invalid_argument("center_spacing must exceed 2*(group_radius + jitter)");
}

std::string params_to_kv(const RuleParams& r, const LayoutGenParams& g) {
    std::ostringstream out;
    out << "p_distract=" << format_double(r.p_distract) << '\n'
        << "distract_trigger_steps=" << r.distract_trigger_steps << '\n'
        << "p_strong_address=" << format_double(r.p_strong_address) << '\n'
        << "p_return_addressed=" << format_double(r.p_return_addressed) << '\n'
        << "p_return_spontaneous=" << format_double(r.p_return_spontaneous) << '\n'
        << "speak_duration_min=" << r.speak_duration_min << '\n'
        << "speak_duration_max=" << r.speak_duration_max << '\n'
        << "p_weak_address=" << format_double(r.p_weak_address) << '\n'
        << "weak_address_min=" << r.weak_address_min << '\n'
        << "weak_address_max=" << r.weak_address_max << '\n'
        << "respond_duration=" << r.respond_duration << '\n'
        << "p_move=" << format_double(r.p_move) << '\n'
        << "move_speed=" << format_double(r.move_speed) << '\n'
        << "arrive_epsilon=" << format_double(r.arrive_epsilon) << '\n'
        << "join_radius=" << format_double(r.join_radius) << '\n'
        << "n_groups_min=" << g.n_groups_min << '\n'
        << "n_groups_max=" << g.n_groups_max << '\n'
        << "group_size_min=" << g.group_size_min << '\n'
        << "group_size_max=" << g.group_size_max << '\n'
        << "group_radius=" << format_double(g.group_radius) << '\n'
        << "center_spacing=" << format_double(g.center_spacing) << '\n'
        << "jitter=" << format_double(g.jitter) << '\n';
    return out.str();
}

void params_from_kv(const std::string& text, RuleParams& r, LayoutGenParams& g) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        auto as_d = [&] { return std::stod(val); };
        auto as_i = [&] { return std::stoi(val); };
        if (key == "p_distract") r.p_distract = as_d();
        else if (key == "distract_trigger_steps") r.distract_trigger_steps = as_i();
        else if (key == "p_strong_address") r.p_strong_address = as_d();
        else if (key == "p_return_addressed") r.p_return_addressed = as_d();
        else if (key == "p_return_spontaneous") r.p_return_spontaneous = as_d();
        else if (key == "speak_duration_min") r.speak_duration_min = as_i();
        else if (key == "speak_duration_max") r.speak_duration_max = as_i();
        else if (key == "p_weak_address") r.p_weak_address = as_d();
        else if (key == "weak_address_min") r.weak_address_min = as_i();
        else if (key == "weak_address_max") r.weak_address_max = as_i();
        else if (key == "respond_duration") r.respond_duration = as_i();
        else if (key == "p_move") r.p_move = as_d();
        else if (key == "move_speed") r.move_speed = as_d();
        else if (key == "arrive_epsilon") r.arrive_epsilon = as_d();
        else if (key == "join_radius") r.join_radius = as_d();
        else if (key == "n_groups_min") g.n_groups_min = as_i();
        else if (key == "n_groups_max") g.n_groups_max = as_i();
        else if (key == "group_size_min") g.group_size_min = as_i();
        else if (key == "group_size_max") g.group_size_max = as_i();
        else if (key == "group_radius") g.group_radius = as_d();
        else if (key == "center_spacing") g.center_spacing = as_d();
        else if (key == "jitter") g.jitter = as_d();
        else
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key " + key);
    }
}

Layout generate_layout(const LayoutGenParams& params, Rng& rng) {
    params.validate();

    const int n_groups = rng.uniform_int(params.n_groups_min, params.n_groups_max);
    std::vector<int> sizes(static_cast<std::size_t>(n_groups));
    for (int& s : sizes) s = rng.uniform_int(params.group_size_min, params.group_size_max);
    // A lone agent cannot make a scene; re-draw the last group until M >= 2.
    int total = 0;
    for (int s : sizes) total += s;
    int retries = 0;
    while (total < 2) {
        if (++retries > 64) throw std::runtime_error("generate_layout: cannot reach 2 agents");
        total -= sizes.back();
        sizes.back() = rng.uniform_int(params.group_size_min, params.group_size_max);
        total += sizes.back();
    }

    // Group centers on a jittered square grid.
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_groups))));
    std::vector<Vec2> centers;
    for (int gi = 0; gi < n_groups; ++gi) {
        const int row = gi / grid;
        const int col = gi % grid;
        const Vec2 c{col * params.center_spacing + rng.uniform(-params.jitter, params.jitter),
                     row * params.center_spacing + rng.uniform(-params.jitter, params.jitter)};
        centers.push_back(c);
    }

    Layout layout;
    int next_id = 0;
    for (int gi = 0; gi < n_groups; ++gi) {
        const int size = sizes[static_cast<std::size_t>(gi)];
        const double theta0 = rng.uniform(0.0, 2.0 * kPi);
        for (int k = 0; k < size; ++k) {
            const double theta = theta0 + 2.0 * kPi * k / size;
            Vec2 pos = centers[static_cast<std::size_t>(gi)] +
                       Vec2{std::cos(theta), std::sin(theta)} * params.group_radius;
            pos = pos + Vec2{rng.uniform(-params.jitter, params.jitter),
                             rng.uniform(-params.jitter, params.jitter)};
            Vec2 toward = centers[static_cast<std::size_t>(gi)] - pos;
            if (toward.norm() == 0.0) toward = {1.0, 0.0};
            layout.agents.push_back({next_id++, {pos, toward.normalized()}, gi});
        }
    }
    layout.validate();
    return layout;
}

namespace {

// ---- helpers over the live frame -------------------------------------------

// Members of a group that are present (not in transit); "active" below.
std::vector<int> active_members(const Frame& frame, int group_id) {
    std::vector<int> idx;
    for (int i = 0; i < frame.size(); ++i) {
        const FrameAgent& a = frame.agents[static_cast<std::size_t>(i)];
        if (a.group_id == group_id && a.action != Action::Moving) idx.push_back(i);
    }
    return idx;
}

int holder_index(const Frame& frame, int group_id, int exclude_index = -1) {
    for (int i = 0; i < frame.size(); ++i) {
        const FrameAgent& a = frame.agents[static_cast<std::size_t>(i)];
        if (i != exclude_index && a.group_id == group_id && is_speaker_role(a.action)) return i;
    }
    return -1;
}

Vec2 centroid_of(const Frame& frame, const std::vector<int>& indices) {
    Vec2 c;
    for (int i : indices) c = c + frame.agents[static_cast<std::size_t>(i)].pose.position;
    return c / static_cast<double>(indices.size());
}

void look_at(FrameAgent& agent, Vec2 point) {
    const Vec2 d = point - agent.pose.position;
    if (d.norm() > 0.0) agent.pose.gaze = d.normalized();
}

Vec2 random_unit(Rng& rng) {
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    return {std::cos(theta), std::sin(theta)};
}

void make_distracted(FrameAgent& agent, AgentTimers& tm, Rng& rng) {
    agent.action = Action::Distracted;
    tm.distract_steps = 0;
    tm.distract_gaze = random_unit(rng);
    tm.sa_target = tm.wa_target = -1;
    tm.move_group = -1;
}

std::vector<int> sorted_group_ids(const Frame& frame) {
    std::set<int> gids;
    for (const FrameAgent& a : frame.agents) gids.insert(a.group_id);
    return {gids.begin(), gids.end()};
}

void assign_gazes(SimState& st) {
    Frame& frame = st.frame;
    for (int i = 0; i < frame.size(); ++i) {
        FrameAgent& a = frame.agents[static_cast<std::size_t>(i)];
        AgentTimers& tm = st.timers[static_cast<std::size_t>(i)];
        switch (a.action) {
            case Action::Listening:
            case Action::Responding: {
                const int h = holder_index(frame, a.group_id, i);
                if (h >= 0) {
                    look_at(a, frame.agents[static_cast<std::size_t>(h)].pose.position);
                } else {
                    std::vector<int> others = active_members(frame, a.group_id);
                    others.erase(std::remove(others.begin(), others.end(), i), others.end());
                    if (!others.empty()) look_at(a, centroid_of(frame, others));
                }
                break;
            }
            case Action::Speaking: {
                std::vector<int> others = active_members(frame, a.group_id);
                others.erase(std::remove(others.begin(), others.end(), i), others.end());
                if (!others.empty()) look_at(a, centroid_of(frame, others));
                break;
            }
            case Action::StronglyAddressing: {
                const int ti = frame.index_of(tm.sa_target);
                if (ti >= 0) look_at(a, frame.agents[static_cast<std::size_t>(ti)].pose.position);
                break;
            }
            case Action::WeaklyAddressing: {
                const int ti = frame.index_of(tm.wa_target);
                if (ti >= 0) look_at(a, frame.agents[static_cast<std::size_t>(ti)].pose.position);
                break;
            }
            case Action::Distracted:
                a.pose.gaze = tm.distract_gaze;
                break;
            case Action::Moving: {
                const Vec2 d = tm.move_target - a.pose.position;
                if (d.norm() > 0.0) a.pose.gaze = d.normalized();
                break;
            }
        }
    }
}

int draw_speak_timer(Rng& rng, const RuleParams& p) {
    return rng.uniform_int(p.speak_duration_min, p.speak_duration_max);
}

}  // namespace

SimState init_sim(const Layout& layout, Scenario scenario, const RuleParams& params,
                  std::uint64_t seed) {
    layout.validate();
    params.validate();

    SimState st;
    st.scenario = scenario;
    st.rng = Rng(seed);
    st.frame.t = 1;
    st.frame.agents.reserve(layout.agents.size());
    for (const LayoutAgent& a : layout.agents)
        st.frame.agents.push_back({a.id, a.pose, Action::Listening, a.group_id});
    st.timers.assign(layout.agents.size(), AgentTimers{});

    for (int gid : sorted_group_ids(st.frame)) {
        const std::vector<int> members = active_members(st.frame, gid);
        if (members.size() == 1) {
            const int i = members.front();
            make_distracted(st.frame.agents[static_cast<std::size_t>(i)],
                            st.timers[static_cast<std::size_t>(i)], st.rng);
            continue;
        }
        const int speaker = members[static_cast<std::size_t>(
            st.rng.uniform_int(0, static_cast<int>(members.size()) - 1))];
        for (int i : members) {
            st.frame.agents[static_cast<std::size_t>(i)].action =
                (i == speaker) ? Action::Speaking : Action::Listening;
        }
        st.timers[static_cast<std::size_t>(speaker)].speak_timer = draw_speak_timer(st.rng, params);
    }
    assign_gazes(st);
    return st;
}

void step(SimState& st, const RuleParams& params) {
    Frame& frame = st.frame;
    const int M = frame.size();
    auto agent = [&](int i) -> FrameAgent& { return frame.agents[static_cast<std::size_t>(i)]; };
    auto timers = [&](int i) -> AgentTimers& { return st.timers[static_cast<std::size_t>(i)]; };

    // Eligibility for role changes later in the step also requires the agent
    // to have held the role at step entry, so each recorded frame-to-frame
    // transition is a single edge of the table (no within-step chaining).
    std::vector<Action> at_entry(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) at_entry[static_cast<std::size_t>(i)] = agent(i).action;

    // (1) Listeners may get distracted.
    for (int i = 0; i < M; ++i) {
        if (agent(i).action == Action::Listening && st.rng.bernoulli(params.p_distract))
            make_distracted(agent(i), timers(i), st.rng);
    }

    // (2a) Distracted members of non-singleton groups may return to listening;
    // being strongly addressed makes the return far more likely.
    for (int i = 0; i < M; ++i) {
        if (agent(i).action != Action::Distracted) continue;
        std::vector<int> others = active_members(frame, agent(i).group_id);
        others.erase(std::remove(others.begin(), others.end(), i), others.end());
        if (others.empty()) continue;  // singletons have no conversation to rejoin
        bool addressed = false;
        const int h = holder_index(frame, agent(i).group_id, i);
        if (h >= 0 && agent(h).action == Action::StronglyAddressing &&
            timers(h).sa_target == agent(i).id)
            addressed = true;
        const double p = addressed ? params.p_return_addressed : params.p_return_spontaneous;
        if (st.rng.bernoulli(p)) {
            agent(i).action = Action::Listening;
            timers(i).distract_steps = 0;
        }
    }

    // (2b) Strong addressing ends once its target is no longer distracted.
    for (int i = 0; i < M; ++i) {
        if (agent(i).action != Action::StronglyAddressing) continue;
        const int ti = frame.index_of(timers(i).sa_target);
        if (ti < 0 || agent(ti).action != Action::Distracted ||
            agent(ti).group_id != agent(i).group_id) {
            agent(i).action = Action::Speaking;
            timers(i).sa_target = -1;
        }
    }

    // (2c) A speaker may start strongly addressing the longest-distracted member.
    for (int i = 0; i < M; ++i) {
        if (agent(i).action != Action::Speaking) continue;
        int target = -1;
        int longest = -1;
        for (int j : active_members(frame, agent(i).group_id)) {
            if (j == i || agent(j).action != Action::Distracted) continue;
            if (timers(j).distract_steps >= params.distract_trigger_steps &&
                timers(j).distract_steps > longest) {
                longest = timers(j).distract_steps;
                target = j;
            }
        }
        if (target >= 0 && st.rng.bernoulli(params.p_strong_address)) {
            agent(i).action = Action::StronglyAddressing;
            timers(i).sa_target = agent(target).id;
        }
    }

    // (3) Weak addressing: timed aside toward one member; pauses the speak timer.
    {
        for (int i = 0; i < M; ++i) {
            if (agent(i).action == Action::WeaklyAddressing) {
                if (timers(i).wa_timer == 0) {
                    agent(i).action = Action::Speaking;
                    timers(i).wa_target = -1;
                } else {
                    timers(i).wa_timer -= 1;
                }
            } else if (agent(i).action == Action::Speaking &&
                       at_entry[static_cast<std::size_t>(i)] == Action::Speaking) {
                std::vector<int> others = active_members(frame, agent(i).group_id);
                others.erase(std::remove(others.begin(), others.end(), i), others.end());
                if (!others.empty() && st.rng.bernoulli(params.p_weak_address)) {
                    agent(i).action = Action::WeaklyAddressing;
                    timers(i).wa_timer = st.rng.uniform_int(params.weak_address_min, params.weak_address_max);
                    timers(i).wa_target = agent(others[static_cast<std::size_t>(st.rng.uniform_int(
                                                    0, static_cast<int>(others.size()) - 1))])
                                              .id;
                }
            }
        }
    }

    // (4) Speak-timer expiry yields the floor: the speaker starts listening and
    // a random non-distracted member responds, then speaks. Respond timers
    // also advance here.
    {
        std::vector<Action> entry(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i) entry[static_cast<std::size_t>(i)] = agent(i).action;
        for (int i = 0; i < M; ++i) {
            const Action a = entry[static_cast<std::size_t>(i)];
            if (at_entry[static_cast<std::size_t>(i)] == Action::WeaklyAddressing) continue;
            if (a == Action::Speaking || a == Action::StronglyAddressing) {
                if (timers(i).speak_timer == 0) {
                    std::vector<int> candidates;
                    for (int j : active_members(frame, agent(i).group_id)) {
                        if (j != i && agent(j).action == Action::Listening &&
                            at_entry[static_cast<std::size_t>(j)] == Action::Listening)
                            candidates.push_back(j);
                    }
                    if (candidates.empty()) {
                        // Nobody to yield to; keep the floor with a fresh turn.
                        agent(i).action = Action::Speaking;
                        timers(i).sa_target = -1;
                        timers(i).speak_timer = draw_speak_timer(st.rng, params);
                    } else {
                        agent(i).action = Action::Listening;
                        timers(i).sa_target = -1;
                        const int next = candidates[static_cast<std::size_t>(st.rng.uniform_int(
                            0, static_cast<int>(candidates.size()) - 1))];
                        agent(next).action = Action::Responding;
                        timers(next).respond_timer = params.respond_duration;
                    }
                } else {
                    timers(i).speak_timer -= 1;
                }
            } else if (a == Action::Responding) {
                if (timers(i).respond_timer == 0) {
                    agent(i).action = Action::Speaking;
                    timers(i).speak_timer = draw_speak_timer(st.rng, params);
                } else {
                    timers(i).respond_timer -= 1;
                }
            }
        }
    }

    // (5) Dynamic scenario: distracted agents may wander off to another group.
    if (st.scenario == Scenario::Dynamic) {
        // (5a) move draws
        std::vector<int> entry_distracted;
        for (int i = 0; i < M; ++i)
            if (agent(i).action == Action::Distracted &&
                at_entry[static_cast<std::size_t>(i)] == Action::Distracted)
                entry_distracted.push_back(i);
        for (int i : entry_distracted) {
            if (!st.rng.bernoulli(params.p_move)) continue;
            std::vector<int> candidates;
            for (int gid : sorted_group_ids(frame)) {
                if (gid == agent(i).group_id) continue;
                if (!active_members(frame, gid).empty()) candidates.push_back(gid);
            }
            if (candidates.empty()) continue;
            const int gid = candidates[static_cast<std::size_t>(
                st.rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];
            const Vec2 centroid = centroid_of(frame, active_members(frame, gid));
            Vec2 away = agent(i).pose.position - centroid;
            if (away.norm() == 0.0) away = {1.0, 0.0};
            timers(i).move_target = centroid + away.normalized() * params.join_radius;
            timers(i).move_group = gid;
            agent(i).action = Action::Moving;
            timers(i).distract_steps = 0;
        }

        // (5b) movement integration
        for (int i = 0; i < M; ++i) {
            if (agent(i).action != Action::Moving) continue;
            const Vec2 d = timers(i).move_target - agent(i).pose.position;
            const double dist = d.norm();
            if (dist > 0.0)
                agent(i).pose.position =
                    agent(i).pose.position + d * (std::min(params.move_speed, dist) / dist);
        }

        // (5c) arrivals join as the next speaker. Only agents already moving at
        // step entry may arrive, and each group welcomes at most one arrival
        // per step, so every recorded transition stays a single table edge.
        std::set<int> welcomed;
        for (int i = 0; i < M; ++i) {
            if (agent(i).action != Action::Moving) continue;
            if (at_entry[static_cast<std::size_t>(i)] != Action::Moving) continue;
            if (welcomed.count(timers(i).move_group)) continue;
            if ((timers(i).move_target - agent(i).pose.position).norm() > params.arrive_epsilon)
                continue;
            welcomed.insert(timers(i).move_group);
            const int old_gid = agent(i).group_id;
            const int new_gid = timers(i).move_group;
            agent(i).group_id = new_gid;
            timers(i).move_group = -1;

            const std::vector<int> hosts = active_members(frame, new_gid);
            if (static_cast<int>(hosts.size()) <= 1) {
                // Joined a deserted spot or a lone agent: nothing to respond to
                // yet unless someone is actually there.
                if (hosts.size() == std::size_t{1} && hosts.front() != i) {
                    agent(i).action = Action::Responding;
                    timers(i).respond_timer = params.respond_duration;
                } else {
                    make_distracted(agent(i), timers(i), st.rng);
                }
            } else {
                agent(i).action = Action::Responding;
                timers(i).respond_timer = params.respond_duration;
            }
            if (agent(i).action == Action::Responding) {
                const int h = holder_index(frame, new_gid, i);
                if (h >= 0) {
                    agent(h).action = Action::Listening;
                    timers(h).sa_target = timers(h).wa_target = -1;
                }
            }

            // The group left behind dissolves if a single member remains.
            const std::vector<int> remainder = active_members(frame, old_gid);
            if (remainder.size() == std::size_t{1})
                make_distracted(agent(remainder.front()), timers(remainder.front()), st.rng);
        }
    }

    // (6) Gaze re-assignment.
    assign_gazes(st);

    // (7) Bookkeeping: completed distracted steps and the frame counter.
    for (int i = 0; i < M; ++i)
        if (agent(i).action == Action::Distracted) timers(i).distract_steps += 1;
    frame.t += 1;
}

Demonstration rollout(const Layout& layout, Scenario scenario, int T, const RuleParams& params,
                      std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("rollout: T must be >= 1");
    SimState st = init_sim(layout, scenario, params, seed);

    Demonstration demo;
    demo.scenario = scenario;
    demo.seed = seed;
    demo.frames.reserve(static_cast<std::size_t>(T));
    demo.frames.push_back(st.frame);
    for (int t = 1; t < T; ++t) {
        step(st, params);
        demo.frames.push_back(st.frame);
    }
    // The episode's layout is its first frame's configuration.
    demo.layout.agents.clear();
    for (const FrameAgent& a : demo.frames.front().agents)
        demo.layout.agents.push_back({a.id, a.pose, a.group_id});
    return demo;
}

namespace {

bool edge_legal(Scenario scenario, Action from, Action to) {
    using A = Action;
    auto any_of = [to](std::initializer_list<A> set) {
        return std::find(set.begin(), set.end(), to) != set.end();
    };
    bool ok = false;
    switch (from) {
        case A::Speaking:
            ok = any_of({A::Speaking, A::StronglyAddressing, A::WeaklyAddressing, A::Listening});
            break;
        case A::Listening:
            ok = any_of({A::Listening, A::Distracted, A::Responding});
            break;
        case A::Distracted:
            ok = any_of({A::Distracted, A::Listening});
            if (scenario == Scenario::Dynamic && to == A::Moving) ok = true;
            break;
        case A::StronglyAddressing:
            ok = any_of({A::StronglyAddressing, A::Speaking, A::Listening});
            break;
        case A::WeaklyAddressing:
            ok = any_of({A::WeaklyAddressing, A::Speaking});
            if (scenario == Scenario::Dynamic && to == A::Listening) ok = true;
            break;
        case A::Responding:
            ok = any_of({A::Responding, A::Speaking});
            if (scenario == Scenario::Dynamic && to == A::Listening) ok = true;
            break;
        case A::Moving:
            ok = scenario == Scenario::Dynamic &&
                 any_of({A::Moving, A::Responding, A::Distracted});
            break;
    }
    // A group shrinking to one member may push any present member to Distracted.
    if (!ok && scenario == Scenario::Dynamic && to == A::Distracted && from != A::Moving) ok = true;
    return ok;
}

}  // namespace

ValidationResult validate_demonstration(const Demonstration& demo) {
    auto fail = [](std::string msg) { return ValidationResult{false, std::move(msg)}; };
    if (demo.frames.empty()) return fail("no frames");

    for (std::size_t fi = 0; fi < demo.frames.size(); ++fi) {
        const Frame& f = demo.frames[fi];
        if (f.t != static_cast<int>(fi) + 1) return fail("frames not contiguous from t=1");
        if (f.size() != demo.layout.size()) return fail("frame agent set differs from layout");
        for (int i = 0; i < f.size(); ++i) {
            if (f.agents[static_cast<std::size_t>(i)].id != demo.layout.agents[static_cast<std::size_t>(i)].id)
                return fail("frame agent ids differ from layout");
        }

        // speaker-role uniqueness per group, over present (non-moving) members
        std::map<int, int> holders;
        std::map<int, int> present;
        for (const FrameAgent& a : f.agents) {
            if (a.action == Action::Moving) continue;
            present[a.group_id] += 1;
            if (is_speaker_role(a.action)) holders[a.group_id] += 1;
        }
        for (const auto& [gid, n] : present) {
            const int h = holders.count(gid) ? holders[gid] : 0;
            if (h > 1)
                return fail("frame t=" + std::to_string(f.t) + ": group " + std::to_string(gid) +
                            " has " + std::to_string(h) + " speaker roles");
            if (n >= 2 && h != 1)
                return fail("frame t=" + std::to_string(f.t) + ": group " + std::to_string(gid) +
                            " with " + std::to_string(n) + " members has no speaker role");
        }

        // listeners watch the speaker
        for (const FrameAgent& a : f.agents) {
            if (a.action != Action::Listening && a.action != Action::Responding) continue;
            const FrameAgent* holder = nullptr;
            for (const FrameAgent& b : f.agents) {
                if (b.id != a.id && b.group_id == a.group_id && b.action != Action::Moving &&
                    is_speaker_role(b.action)) {
                    holder = &b;
                    break;
                }
            }
            if (!holder) continue;
            const Vec2 d = holder->pose.position - a.pose.position;
            if (d.norm() == 0.0) continue;
            const Vec2 dir = d.normalized();
            const double cross = std::abs(dir.x * a.pose.gaze.y - dir.y * a.pose.gaze.x);
            if (cross > 1e-6 || dir.dot(a.pose.gaze) < 0.0)
                return fail("frame t=" + std::to_string(f.t) + ": agent " + std::to_string(a.id) +
                            " not gazing at its speaker");
        }
    }

    for (std::size_t fi = 1; fi < demo.frames.size(); ++fi) {
        const Frame& prev = demo.frames[fi - 1];
        const Frame& cur = demo.frames[fi];
        for (int i = 0; i < cur.size(); ++i) {
            const FrameAgent& a0 = prev.agents[static_cast<std::size_t>(i)];
            const FrameAgent& a1 = cur.agents[static_cast<std::size_t>(i)];
            if (!edge_legal(demo.scenario, a0.action, a1.action))
                return fail("illegal transition " + std::string(action_name(a0.action)) + " -> " +
                            action_name(a1.action) + " for agent " + std::to_string(a1.id) +
                            " at t=" + std::to_string(cur.t));
            if (demo.scenario == Scenario::Static) {
                if (a1.action == Action::Moving) return fail("Moving action in static scenario");
                const Vec2 dp = a1.pose.position - a0.pose.position;
                if (dp.norm() != 0.0) return fail("pose changed in static scenario");
                if (a1.group_id != a0.group_id) return fail("group changed in static scenario");
            } else {
                if (a1.group_id != a0.group_id && a0.action != Action::Moving)
                    return fail("group changed without a completed move for agent " +
                                std::to_string(a1.id) + " at t=" + std::to_string(cur.t));
                if (a1.pose.position.x != a0.pose.position.x ||
                    a1.pose.position.y != a0.pose.position.y) {
                    if (a0.action != Action::Moving && a1.action != Action::Moving)
                        return fail("non-moving agent changed position at t=" + std::to_string(cur.t));
                }
            }
        }
    }
    return {};
}

}  // namespace mgpi::sim
