#pragma once

#include <span>

#include "mgpi/model.hpp"

namespace mgpi::model {

/// A chunk of samples packed column-wise for GEMM-friendly evaluation. All
/// neighbors of all samples share one sequence batch (width = total neighbor
/// count); `owner` maps each neighbor column back to its sample.
struct SampleBatch {
    int width = 0;  // number of samples
    std::vector<nn::MatrixXd> p_steps;     // H of 4 x Jsum
    std::vector<nn::MatrixXd> d_steps;     // H of U x Jsum
    std::vector<nn::MatrixXd> self_steps;  // H of U x width
    nn::MatrixXd gate_in;                  // 4 x Jsum, current-step observation
    std::vector<int> owner;                // Jsum
    std::vector<int> neighbor_count;       // per sample
    std::vector<int> cell;                 // Jsum, SOCPOOL cell or -1
    std::vector<int> cell_count;           // width * grid^2 (SOCPOOL only)
    std::vector<int> targets;              // per sample; -1 when unused

    int total_neighbors() const { return static_cast<int>(owner.size()); }
};

SampleBatch build_batch(const MgpiConfig& config, std::span<const AgentState> states,
                        std::span<const int> targets);

/// Action probabilities for every sample (num_actions x width).
nn::MatrixXd batch_probabilities(const MgpiNetwork& net, const SampleBatch& batch);

/// Mean cross-entropy of a probability matrix against the batch targets,
/// with the same 1e-12 floor as the scalar loss.
double batch_mean_cross_entropy(const nn::MatrixXd& probs, std::span<const int> targets);

/// Forward + backward for the mean cross-entropy over `denominator` samples
/// (pass the full minibatch size when accumulating over several chunks).
/// Gradients are accumulated into `grads`; returns the summed loss / denominator.
double batch_forward_backward(const MgpiNetwork& net, const SampleBatch& batch, double denominator,
                              MgpiGrads& grads);

}  // namespace mgpi::model
