#include "mgpi/train.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <thread>

#include "mgpi/batch.hpp"
#include "mgpi/geometry.hpp"
#include "mgpi/io.hpp"
#include "mgpi/rng.hpp"

namespace mgpi::train {

using model::MgpiConfig;
using model::MgpiNetwork;
using nn::MatrixXd;
using nn::VectorXd;

namespace {

// Samples per GEMM chunk; bounds tape memory while keeping batches wide.
constexpr int kChunk = 512;

MgpiConfig config_from(const TrainConfig& tc, Scenario scenario) {
    MgpiConfig cfg;
    cfg.horizon = tc.horizon;
    cfg.num_actions = action_count(scenario);
    cfg.position_scale = tc.position_scale;
    cfg.variant = tc.variant;
    cfg.socpool_grid = tc.socpool_grid;
    cfg.socpool_cell = tc.socpool_cell;
    return cfg;
}

}  // namespace

AgentState Dataset::materialize(const SampleRef& ref) const {
    const Demonstration& demo = (*demos)[static_cast<std::size_t>(ref.demo)];
    const int agent_id = demo.layout.agents[static_cast<std::size_t>(ref.agent_index)].id;
    return build_state(demo, agent_id, ref.t, horizon, ref.neighbor_ids, position_scale);
}

Dataset make_dataset(const std::vector<Demonstration>& demos, int H, int J, double position_scale) {
    if (demos.empty()) throw std::invalid_argument("make_dataset: no demonstrations");
    if (H < 1 || J < 1) throw std::invalid_argument("make_dataset: H and J must be >= 1");
    const Scenario scenario = demos.front().scenario;
    for (const Demonstration& d : demos) {
        if (d.scenario != scenario)
            throw std::invalid_argument("make_dataset: demonstrations mix scenarios");
    }

    Dataset ds;
    ds.demos = &demos;
    ds.horizon = H;
    ds.position_scale = position_scale;
    ds.scenario = scenario;
    ds.num_actions = action_count(scenario);

    for (int di = 0; di < static_cast<int>(demos.size()); ++di) {
        const Demonstration& demo = demos[static_cast<std::size_t>(di)];
        const int T = demo.length();
        const int M = demo.num_agents();
        for (int ai = 0; ai < M; ++ai) {
            const int agent_id = demo.layout.agents[static_cast<std::size_t>(ai)].id;
            for (int t = H; t < T; ++t) {
                SampleRef ref;
                ref.demo = di;
                ref.agent_index = ai;
                ref.t = t;
                ref.neighbor_ids =
                    nearest_neighbors(demo.frames[static_cast<std::size_t>(t - 1)], agent_id, J);
                ref.target = static_cast<int>(
                    demo.frames[static_cast<std::size_t>(t)].agents[static_cast<std::size_t>(ai)].action);
                ds.samples.push_back(std::move(ref));
            }
        }
    }
    if (ds.samples.empty())
        throw std::invalid_argument("make_dataset: no samples (episodes shorter than H+1?)");
    return ds;
}

namespace {

/// Summed chunk losses / denom over one index slice; gradients accumulate into `grads`.
double run_slice(const MgpiNetwork& net, const Dataset& ds, std::span<const std::size_t> index,
                 double denom, model::MgpiGrads& grads) {
    double loss = 0.0;
    std::vector<AgentState> states;
    std::vector<int> targets;
    for (std::size_t start = 0; start < index.size(); start += kChunk) {
        const std::size_t stop = std::min(index.size(), start + kChunk);
        states.clear();
        targets.clear();
        for (std::size_t i = start; i < stop; ++i) {
            const SampleRef& ref = ds.samples[index[i]];
            states.push_back(ds.materialize(ref));
            targets.push_back(ref.target);
        }
        const model::SampleBatch batch = model::build_batch(net.config, states, targets);
        loss += model::batch_forward_backward(net, batch, denom, grads);
    }
    return loss;
}

/// Mean loss over one minibatch with gradients. With several workers the
/// minibatch splits into contiguous slices whose partial gradients and losses
/// are reduced in slice order.
double minibatch_step(const MgpiNetwork& net, const Dataset& ds, std::span<const std::size_t> index,
                      model::MgpiGrads& grads, int threads) {
    grads.set_zero();
    const double denom = static_cast<double>(index.size());
    const int workers =
        std::max(1, std::min<int>(threads, static_cast<int>(index.size() / 32 + 1)));
    if (workers == 1) return run_slice(net, ds, index, denom, grads);

    std::vector<model::MgpiGrads> partial;
    std::vector<double> losses(static_cast<std::size_t>(workers), 0.0);
    for (int w = 0; w < workers; ++w) partial.push_back(model::MgpiGrads::zeros(net));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = index.size() * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers);
        const std::size_t hi =
            index.size() * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(workers);
        pool.emplace_back([&, w, lo, hi] {
            partial[static_cast<std::size_t>(w)].set_zero();
            losses[static_cast<std::size_t>(w)] =
                run_slice(net, ds, index.subspan(lo, hi - lo), denom, partial[static_cast<std::size_t>(w)]);
        });
    }
    for (std::thread& t : pool) t.join();

    double loss = 0.0;
    std::vector<nn::ParamRef> total = grads.param_refs(net.config);
    for (int w = 0; w < workers; ++w) {
        loss += losses[static_cast<std::size_t>(w)];
        std::vector<nn::ParamRef> part = partial[static_cast<std::size_t>(w)].param_refs(net.config);
        for (std::size_t p = 0; p < total.size(); ++p) {
            Eigen::Map<nn::VectorXd>(total[p].data, total[p].size()) +=
                Eigen::Map<const nn::VectorXd>(part[p].data, part[p].size());
        }
    }
    return loss;
}

}  // namespace

TrainResult behavior_clone(const std::vector<Demonstration>& demos, const TrainConfig& config) {
    if (config.epochs < 1 || config.batch_size < 1)
        throw std::invalid_argument("behavior_clone: epochs and batch size must be >= 1");
    const Dataset ds = make_dataset(demos, config.horizon, config.neighbors, config.position_scale);

    TrainResult result;
    result.net = MgpiNetwork::create(config_from(config, ds.scenario), config.seed);
    MgpiNetwork& net = result.net;

    model::MgpiGrads grads = model::MgpiGrads::zeros(net);
    std::vector<nn::ParamRef> param_refs = net.param_refs();
    std::vector<nn::ParamRef> grad_refs = grads.param_refs(net.config);
    nn::AdamState adam;
    adam.lr = config.learning_rate;

    Rng shuffle_rng = Rng(config.seed).fork(1);
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const std::span<const std::size_t> index(order.data() + start, stop - start);
            const double loss = minibatch_step(net, ds, index, grads, config.threads);
            if (!std::isfinite(loss))
                throw std::runtime_error("behavior_clone: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch + 1));
            epoch_loss_sum += loss * static_cast<double>(index.size());
            nn::adam_update(param_refs, grad_refs, adam);
        }
        result.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    long long n_pos = 0;
    for (int l : labels) n_pos += l;
    if (n_pos == 0) return std::numeric_limits<double>::quiet_NaN();
    double ap = 0.0;
    long long hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (labels[rank[k]] == 1) {
            hits += 1;
            ap += static_cast<double>(hits) / static_cast<double>(k + 1);
        }
    }
    return ap / static_cast<double>(n_pos);
}

EvalReport evaluate(const MgpiNetwork& net, const std::vector<Demonstration>& demos, int H, int J) {
    const Dataset ds = make_dataset(demos, H, J, net.config.position_scale);
    if (ds.num_actions != net.config.num_actions)
        throw std::invalid_argument("evaluate: scenario action count differs from checkpoint");
    const int U = net.config.num_actions;
    const std::size_t n = ds.size();

    MatrixXd probs(U, static_cast<Eigen::Index>(n));
    std::vector<AgentState> states;
    std::vector<int> targets;
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t stop = std::min(n, start + kChunk);
        states.clear();
        targets.clear();
        for (std::size_t i = start; i < stop; ++i) {
            states.push_back(ds.materialize(ds.samples[i]));
            targets.push_back(ds.samples[i].target);
        }
        const model::SampleBatch batch = model::build_batch(net.config, states, targets);
        probs.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(stop - start)) =
            model::batch_probabilities(net, batch);
    }

    EvalReport report;
    report.num_samples = static_cast<long long>(n);
    report.confusion = MatrixXd::Zero(U, U);
    double ce = 0.0;
    long long correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int target = ds.samples[i].target;
        ce += -std::log(std::max(probs(target, static_cast<Eigen::Index>(i)), nn::kLogFloor));
        int arg = 0;
        for (int u = 1; u < U; ++u)
            if (probs(u, static_cast<Eigen::Index>(i)) > probs(arg, static_cast<Eigen::Index>(i))) arg = u;
        if (arg == target) correct += 1;
        report.confusion(target, arg) += 1.0;
    }
    report.cross_entropy = ce / static_cast<double>(n);
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);

    std::vector<double> scores(n);
    std::vector<int> labels(n);
    double ap_sum = 0.0;
    int ap_classes = 0;
    for (int u = 0; u < U; ++u) {
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = probs(u, static_cast<Eigen::Index>(i));
            labels[i] = ds.samples[i].target == u ? 1 : 0;
        }
        const double ap = average_precision(scores, labels);
        report.per_class_ap.push_back(ap);
        if (!std::isnan(ap)) {
            ap_sum += ap;
            ap_classes += 1;
        }
    }
    report.map = ap_classes > 0 ? ap_sum / ap_classes : 0.0;
    return report;
}

std::string EvalReport::to_json() const {
    nlohmann::json doc;
    doc["cross_entropy"] = cross_entropy;
    doc["accuracy"] = accuracy;
    doc["map"] = map;
    doc["num_samples"] = num_samples;
    nlohmann::json ap = nlohmann::json::array();
    for (double a : per_class_ap) {
        if (std::isnan(a))
            ap.push_back(nullptr);
        else
            ap.push_back(a);
    }
    doc["per_class_ap"] = ap;
    nlohmann::json conf = nlohmann::json::array();
    for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < confusion.cols(); ++c) row.push_back(confusion(r, c));
        conf.push_back(row);
    }
    doc["confusion"] = conf;
    return doc.dump(2);
}

std::string EvalReport::confusion_csv() const {
    std::ostringstream out;
    out << "true_class";
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << ",pred_" << c;
    out << '\n';
    for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
        out << r;
        for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << ',' << format_double(confusion(r, c));
        out << '\n';
    }
    return out.str();
}

namespace {

EvalReport mean_report(const EvalReport& a, const EvalReport& b) {
    EvalReport m;
    m.cross_entropy = 0.5 * (a.cross_entropy + b.cross_entropy);
    m.accuracy = 0.5 * (a.accuracy + b.accuracy);
    m.map = 0.5 * (a.map + b.map);
    m.num_samples = a.num_samples + b.num_samples;
    for (std::size_t i = 0; i < a.per_class_ap.size(); ++i)
        m.per_class_ap.push_back(0.5 * (a.per_class_ap[i] + b.per_class_ap[i]));
    m.confusion = 0.5 * (a.confusion + b.confusion);
    return m;
}

}  // namespace

CrossValReport cross_validate(const std::vector<Demonstration>& demos, const TrainConfig& config) {
    if (demos.size() < 2) throw std::invalid_argument("cross_validate: need at least 2 demonstrations");

    // Stratified fold assignment: per source tag, shuffled, alternating.
    std::map<std::string, std::vector<std::size_t>> by_source;
    for (std::size_t i = 0; i < demos.size(); ++i) by_source[demos[i].source].push_back(i);
    Rng fold_rng = Rng(config.seed).fork(2);
    std::vector<std::size_t> fold_of(demos.size(), 0);
    int flip = 0;
    for (auto& [tag, idx] : by_source) {
        fold_rng.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k) fold_of[idx[k]] = (k + flip) % 2;
        flip += static_cast<int>(idx.size() % 2);  // balance across odd-sized strata
    }

    std::vector<Demonstration> fold[2];
    for (std::size_t i = 0; i < demos.size(); ++i)
        fold[fold_of[i]].push_back(demos[i]);
    if (fold[0].empty() || fold[1].empty())
        throw std::invalid_argument("cross_validate: degenerate fold split");

    CrossValReport report;
    TrainConfig tc = config;
    tc.seed = Rng(config.seed).fork(3).next_u64();
    const TrainResult on_a = behavior_clone(fold[0], tc);
    report.fold_b = evaluate(on_a.net, fold[1], config.horizon, config.neighbors);
    tc.seed = Rng(config.seed).fork(4).next_u64();
    const TrainResult on_b = behavior_clone(fold[1], tc);
    report.fold_a = evaluate(on_b.net, fold[0], config.horizon, config.neighbors);
    report.mean = mean_report(report.fold_a, report.fold_b);
    return report;
}

}  // namespace mgpi::train
