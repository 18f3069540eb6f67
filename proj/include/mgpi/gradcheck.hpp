#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgpi/model.hpp"

namespace mgpi::model {

struct GradCheckOptions {
    int horizon = 3;
    int hidden = 8;
    int neighbors = 2;
    int num_actions = kStaticActionCount;
    int batch = 4;
    double step = 1e-4;
    double tolerance = 1e-4;
};

struct GradCheckReport {
    // max relative error per top-level parameter group (N, C, Cself, K, pi)
    std::vector<std::pair<std::string, double>> per_module;
    double max_rel_err = 0.0;
    bool pass = false;
};

/// Compares every analytic parameter gradient of a toy-sized network against
/// central finite differences of the batch loss. Relative error is
/// |a - b| / max(1, |a|, |b|).
GradCheckReport gradient_check(Variant variant, std::uint64_t seed, const GradCheckOptions& opts = {});

/// Synthetic but well-formed random states (unit gazes, one-hot actions) for
/// toy-size evaluations; sample i gets `neighbors` neighbors except the last,
/// which gets one fewer when possible, to exercise ragged pooling.
std::vector<AgentState> random_states(const MgpiConfig& config, int batch, int neighbors,
                                      std::uint64_t seed);

}  // namespace mgpi::model
