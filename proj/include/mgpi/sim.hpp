#pragma once

#include <cstdint>
#include <string>

#include "mgpi/rng.hpp"
#include "mgpi/types.hpp"

namespace mgpi::sim {

/// Per-group interaction rule knobs. Probabilities are per step.
struct RuleParams {
    double p_distract = 0.03;
    int distract_trigger_steps = 5;
    double p_strong_address = 0.5;
    double p_return_addressed = 0.5;
    double p_return_spontaneous = 0.02;
    int speak_duration_min = 20;
    int speak_duration_max = 60;
    double p_weak_address = 0.02;
    int weak_address_min = 3;
    int weak_address_max = 8;
    int respond_duration = 5;
    double p_move = 0.01;  // dynamic scenario only
    double move_speed = 10.0;
    double arrive_epsilon = 6.0;
    double join_radius = 60.0;

    void validate() const;
};

/// Synthetic multigroup layout generation: group centers on a jittered grid,
/// members evenly spaced on a circle facing the center.
struct LayoutGenParams {
    int n_groups_min = 2;
    int n_groups_max = 3;
    int group_size_min = 1;
    int group_size_max = 4;
    double group_radius = 60.0;
    double center_spacing = 200.0;
    double jitter = 15.0;

    void validate() const;
};

/// Flat key=value serialization of both parameter blocks; unknown keys are
/// rejected, missing keys keep their defaults.
std::string params_to_kv(const RuleParams& rules, const LayoutGenParams& gen);
void params_from_kv(const std::string& text, RuleParams& rules, LayoutGenParams& gen);

/// Hidden per-agent bookkeeping that the rules condition on.
struct AgentTimers {
    int speak_timer = 0;
    int respond_timer = 0;
    int wa_timer = 0;
    int wa_target = -1;
    int sa_target = -1;
    int distract_steps = 0;
    Vec2 distract_gaze{1.0, 0.0};
    Vec2 move_target;
    int move_group = -1;
};

struct SimState {
    Scenario scenario = Scenario::Static;
    Frame frame;
    std::vector<AgentTimers> timers;  // parallel to frame.agents
    Rng rng{0};
};

Layout generate_layout(const LayoutGenParams& params, Rng& rng);

/// Frame 1: per non-singleton group one random member speaks, the rest
/// listen; singletons are distracted. Gazes follow the gaze rule.
SimState init_sim(const Layout& layout, Scenario scenario, const RuleParams& params,
                  std::uint64_t seed);

/// Advances one frame in fixed phase order: distraction draws, returns and
/// strong-address trigger/release, weak-address start/stop, speak-timer
/// expiry and turn handoff, (dynamic) movement draws/integration/arrivals,
/// gaze re-assignment.
void step(SimState& state, const RuleParams& params);

/// init_sim followed by T-1 steps; a pure function of its arguments.
Demonstration rollout(const Layout& layout, Scenario scenario, int T, const RuleParams& params,
                      std::uint64_t seed);

struct ValidationResult {
    bool ok = true;
    std::string message;
};

/// Replays a demonstration and checks every frame against the rule set:
/// speaker-role uniqueness, action-transition legality, scenario constraints
/// (constant poses/groups when static, moves only completing group changes
/// when dynamic) and listener gaze locked on the speaker.
ValidationResult validate_demonstration(const Demonstration& demo);

}  // namespace mgpi::sim
