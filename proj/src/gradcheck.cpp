#include "mgpi/gradcheck.hpp"

#include <cmath>
#include <map>

#include "mgpi/batch.hpp"
#include "mgpi/rng.hpp"

namespace mgpi::model {

std::vector<AgentState> random_states(const MgpiConfig& config, int batch, int neighbors,
                                      std::uint64_t seed) {
    Rng rng(seed);
    const int H = config.horizon;
    const int U = config.num_actions;
    std::vector<AgentState> states;
    for (int b = 0; b < batch; ++b) {
        int J = neighbors;
        if (b == batch - 1 && neighbors > 1) J = neighbors - 1;
        AgentState s;
        s.horizon = H;
        s.self_hist = Eigen::MatrixXd::Zero(U, H);
        for (int t = 0; t < H; ++t) s.self_hist(rng.uniform_int(0, U - 1), t) = 1.0;
        for (int j = 0; j < J; ++j) {
            s.neighbor_ids.push_back(j + 1);
            Eigen::Matrix2Xd gaze(2, H), pos(2, H);
            Eigen::MatrixXd act = Eigen::MatrixXd::Zero(U, H);
            for (int t = 0; t < H; ++t) {
                const double theta = rng.uniform(0.0, 6.283185307179586);
                gaze(0, t) = std::cos(theta);
                gaze(1, t) = std::sin(theta);
                pos(0, t) = rng.uniform(-1.5, 1.5);
                pos(1, t) = rng.uniform(-1.5, 1.5);
                act(rng.uniform_int(0, U - 1), t) = 1.0;
            }
            s.gaze_hist.push_back(gaze);
            s.pos_hist.push_back(pos);
            s.action_hist.push_back(act);
        }
        states.push_back(std::move(s));
    }
    return states;
}

GradCheckReport gradient_check(Variant variant, std::uint64_t seed, const GradCheckOptions& opts) {
    MgpiConfig cfg;
    cfg.variant = variant;
    cfg.horizon = opts.horizon;
    cfg.num_actions = opts.num_actions;
    cfg.encoder_hidden = opts.hidden;
    cfg.gate_hidden = opts.hidden;
    cfg.policy_hidden = opts.hidden;
    cfg.position_scale = 1.0;  // toy states already live at gate scale
    cfg.socpool_grid = 2;
    cfg.socpool_cell = 1.5;

    MgpiNetwork net = MgpiNetwork::create(cfg, seed);
    const std::vector<AgentState> states = random_states(cfg, opts.batch, opts.neighbors, seed + 1);
    std::vector<int> targets;
    Rng trng(seed + 2);
    for (int b = 0; b < opts.batch; ++b) targets.push_back(trng.uniform_int(0, cfg.num_actions - 1));
    const SampleBatch batch = build_batch(cfg, states, targets);

    MgpiGrads grads = MgpiGrads::zeros(net);
    grads.set_zero();
    batch_forward_backward(net, batch, static_cast<double>(opts.batch), grads);

    auto loss_now = [&]() {
        return batch_mean_cross_entropy(batch_probabilities(net, batch), targets);
    };

    std::vector<nn::ParamRef> prefs = net.param_refs();
    std::vector<nn::ParamRef> grefs = grads.param_refs(cfg);

    GradCheckReport report;
    std::map<std::string, double> per_module;
    for (std::size_t p = 0; p < prefs.size(); ++p) {
        const std::string module = prefs[p].name.substr(0, prefs[p].name.find('.'));
        double& worst = per_module[module];
        for (Eigen::Index i = 0; i < prefs[p].size(); ++i) {
            double& theta = prefs[p].data[i];
            const double saved = theta;
            theta = saved + opts.step;
            const double lp = loss_now();
            theta = saved - opts.step;
            const double lm = loss_now();
            theta = saved;
            const double fd = (lp - lm) / (2.0 * opts.step);
            const double an = grefs[p].data[i];
            const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
            worst = std::max(worst, rel);
            report.max_rel_err = std::max(report.max_rel_err, rel);
        }
    }
    for (const auto& [module, err] : per_module) report.per_module.emplace_back(module, err);
    report.pass = report.max_rel_err < opts.tolerance;
    return report;
}

}  // namespace mgpi::model
