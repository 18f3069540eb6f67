#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgpi/model.hpp"
#include "mgpi/types.hpp"

namespace mgpi::train {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 4096;
    int neighbors = 4;  // J
    int horizon = 15;   // H
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    model::Variant variant = model::Variant::Mgpi;
    double position_scale = 100.0;
    int socpool_grid = 4;
    double socpool_cell = 50.0;
    // Worker threads for the within-batch gradient terms; partial sums are
    // reduced in fixed slice order, so results are deterministic for a fixed
    // thread count (bit patterns differ between thread counts).
    int threads = 1;
};

/// One training sample: predict `agent`'s action at t+1 from its state at t.
struct SampleRef {
    int demo = 0;
    int agent_index = 0;
    int t = 0;  // frame time, 1-based
    std::vector<int> neighbor_ids;
    int target = 0;
};

/// Lazy dataset: sample references plus enough context to materialize each
/// AgentState on demand. Samples are ordered by (demo, agent, t).
struct Dataset {
    const std::vector<Demonstration>* demos = nullptr;
    int horizon = 15;
    double position_scale = 100.0;
    int num_actions = kStaticActionCount;
    Scenario scenario = Scenario::Static;
    std::vector<SampleRef> samples;

    std::size_t size() const { return samples.size(); }
    AgentState materialize(const SampleRef& ref) const;
};

/// One sample per (demo, agent, t) with H <= t < T; neighbors are the J
/// nearest at time t and the target is the agent's action at t+1.
/// Demos must share scenario; an empty result is a configuration error.
Dataset make_dataset(const std::vector<Demonstration>& demos, int H, int J, double position_scale);

struct TrainResult {
    model::MgpiNetwork net;
    std::vector<double> epoch_loss;
};

/// Behavior cloning: seeded init, per-epoch shuffle, minibatch Adam on the
/// mean cross-entropy. Bit-reproducible for a fixed seed. Aborts with
/// std::runtime_error if the loss turns non-finite.
TrainResult behavior_clone(const std::vector<Demonstration>& demos, const TrainConfig& config);

struct EvalReport {
    double cross_entropy = 0.0;
    double accuracy = 0.0;
    std::vector<double> per_class_ap;  // NaN for classes with no positives
    double map = 0.0;
    nn::MatrixXd confusion;  // rows = true class, counts (reals so means exist)
    long long num_samples = 0;

    std::string to_json() const;
    std::string confusion_csv() const;
};

/// Cross-entropy, argmax accuracy (ties to the lowest class index),
/// one-vs-rest non-interpolated AP per class ranked by predicted probability,
/// mAP over classes with at least one positive, and the confusion matrix.
EvalReport evaluate(const model::MgpiNetwork& net, const std::vector<Demonstration>& demos, int H,
                    int J);

/// Non-interpolated average precision of one ranking: sort by descending
/// score (ties by ascending index), AP = sum_k precision(k) * rel(k) / n_pos.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

struct CrossValReport {
    EvalReport fold_a, fold_b, mean;
};

/// Two-fold cross-validation: demos split into halves at layout granularity
/// (stratified by source tag when present), each half trained and evaluated
/// on the other; reports both folds and their field-wise mean.
CrossValReport cross_validate(const std::vector<Demonstration>& demos, const TrainConfig& config);

}  // namespace mgpi::train
