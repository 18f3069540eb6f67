#include "mgpi/batch.hpp"

#include <stdexcept>

namespace mgpi::model {

using nn::MatrixXd;
using nn::VectorXd;

SampleBatch build_batch(const MgpiConfig& config, std::span<const AgentState> states,
                        std::span<const int> targets) {
    const int B = static_cast<int>(states.size());
    const int H = config.horizon;
    const int U = config.num_actions;

    SampleBatch batch;
    batch.width = B;
    batch.neighbor_count.resize(static_cast<std::size_t>(B));
    batch.targets.assign(static_cast<std::size_t>(B), -1);
    for (std::size_t i = 0; i < targets.size(); ++i) batch.targets[i] = targets[i];

    int jsum = 0;
    for (int b = 0; b < B; ++b) {
        const AgentState& s = states[static_cast<std::size_t>(b)];
        if (s.horizon != H) throw std::invalid_argument("build_batch: state horizon mismatch");
        if (s.num_actions() != U) throw std::invalid_argument("build_batch: action count mismatch");
        batch.neighbor_count[static_cast<std::size_t>(b)] = s.num_neighbors();
        jsum += s.num_neighbors();
    }

    const bool social = config.has_social();
    if (social) {
        batch.p_steps.assign(static_cast<std::size_t>(H), MatrixXd(4, jsum));
        batch.d_steps.assign(static_cast<std::size_t>(H), MatrixXd::Zero(U, jsum));
        batch.gate_in.resize(4, jsum);
        batch.owner.resize(static_cast<std::size_t>(jsum));
        if (config.variant == Variant::Socpool) {
            batch.cell.resize(static_cast<std::size_t>(jsum));
            batch.cell_count.assign(static_cast<std::size_t>(B) * config.socpool_grid * config.socpool_grid, 0);
        }
    }
    if (config.has_self()) batch.self_steps.assign(static_cast<std::size_t>(H), MatrixXd::Zero(U, B));

    int col = 0;
    for (int b = 0; b < B; ++b) {
        const AgentState& s = states[static_cast<std::size_t>(b)];
        if (config.has_self()) {
            for (int t = 0; t < H; ++t)
                batch.self_steps[static_cast<std::size_t>(t)].col(b) = s.self_hist.col(t);
        }
        if (!social) continue;
        for (int j = 0; j < s.num_neighbors(); ++j, ++col) {
            batch.owner[static_cast<std::size_t>(col)] = b;
            const auto& gaze = s.gaze_hist[static_cast<std::size_t>(j)];
            const auto& pos = s.pos_hist[static_cast<std::size_t>(j)];
            for (int t = 0; t < H; ++t) {
                MatrixXd& p = batch.p_steps[static_cast<std::size_t>(t)];
                p(0, col) = gaze(0, t);
                p(1, col) = gaze(1, t);
                p(2, col) = pos(0, t);
                p(3, col) = pos(1, t);
                batch.d_steps[static_cast<std::size_t>(t)].col(col) =
                    s.action_hist[static_cast<std::size_t>(j)].col(t);
            }
            batch.gate_in(0, col) = gaze(0, H - 1);
            batch.gate_in(1, col) = gaze(1, H - 1);
            batch.gate_in(2, col) = pos(0, H - 1);
            batch.gate_in(3, col) = pos(1, H - 1);
            if (config.variant == Variant::Socpool) {
                const int cell = socpool_cell_index(config, pos(0, H - 1) * config.position_scale,
                                                    pos(1, H - 1) * config.position_scale);
                batch.cell[static_cast<std::size_t>(col)] = cell;
                if (cell >= 0)
                    batch.cell_count[static_cast<std::size_t>(b) * config.socpool_grid * config.socpool_grid +
                                     cell] += 1;
            }
        }
    }
    return batch;
}

namespace {

/// Everything the backward pass needs from one forward evaluation.
struct Tape {
    nn::GruTape N, C, Cself;
    MatrixXd msg;      // message_width x Jsum
    MatrixXd gate_h1;  // gate hidden x Jsum (elu outputs)
    MatrixXd gate_pre2;
    MatrixXd gate_k;  // 1 x Jsum
    MatrixXd polin;   // policy input x B
    MatrixXd h1;      // policy hidden x B (elu outputs)
    MatrixXd probs;   // U x B
};

MatrixXd elu_columns(MatrixXd m) {
    return m.unaryExpr([](double a) { return nn::elu(a); });
}

/// Shared forward; fills the tape when training.
void run_forward(const MgpiNetwork& net, const SampleBatch& batch, Tape* tape, MatrixXd& probs_out) {
    const MgpiConfig& cfg = net.config;
    const int B = batch.width;
    const int Hd = cfg.encoder_hidden;
    const int W = cfg.message_width();
    const int jsum = batch.total_neighbors();

    MatrixXd social;
    MatrixXd msg;
    if (cfg.has_social()) {
        const MatrixXd nout =
            nn::gru_forward_batch(net.N, batch.p_steps, tape ? &tape->N : nullptr);
        const MatrixXd cout =
            nn::gru_forward_batch(net.C, batch.d_steps, tape ? &tape->C : nullptr);
        msg.resize(W, jsum);
        msg.topRows(Hd) = nout;
        msg.bottomRows(Hd) = cout;

        MatrixXd weighted;
        if (cfg.has_gate()) {
            MatrixXd g1 = elu_columns((net.k1.W * batch.gate_in).colwise() + net.k1.b);
            MatrixXd pre2 = (net.k2.W * g1).colwise() + net.k2.b;
            MatrixXd k = pre2.unaryExpr([](double a) { return nn::hard_sigmoid(a); });
            weighted = msg * k.row(0).asDiagonal();
            if (tape) {
                tape->gate_h1 = std::move(g1);
                tape->gate_pre2 = std::move(pre2);
                tape->gate_k = std::move(k);
            }
        } else {
            weighted = msg;
        }

        if (cfg.variant == Variant::Socpool) {
            const int cells = cfg.socpool_grid * cfg.socpool_grid;
            social = MatrixXd::Zero(static_cast<Eigen::Index>(W) * cells, B);
            for (int j = 0; j < jsum; ++j) {
                const int cell = batch.cell[static_cast<std::size_t>(j)];
                if (cell < 0) continue;
                social.col(batch.owner[static_cast<std::size_t>(j)])
                    .segment(static_cast<Eigen::Index>(cell) * W, W) += weighted.col(j);
            }
            for (int b = 0; b < B; ++b) {
                for (int cell = 0; cell < cells; ++cell) {
                    const int n = batch.cell_count[static_cast<std::size_t>(b) * cells + cell];
                    if (n > 1) social.col(b).segment(static_cast<Eigen::Index>(cell) * W, W) /= n;
                }
            }
        } else {
            social = MatrixXd::Zero(W, B);
            for (int j = 0; j < jsum; ++j)
                social.col(batch.owner[static_cast<std::size_t>(j)]) += weighted.col(j);
            for (int b = 0; b < B; ++b) {
                const int n = batch.neighbor_count[static_cast<std::size_t>(b)];
                if (n > 1) social.col(b) /= n;
            }
        }
        if (tape) tape->msg = std::move(msg);
    }

    MatrixXd self;
    if (cfg.has_self())
        self = nn::gru_forward_batch(net.Cself, batch.self_steps, tape ? &tape->Cself : nullptr);

    MatrixXd polin(cfg.policy_input_width(), B);
    switch (cfg.variant) {
        case Variant::Mgpi:
        case Variant::Eqpool:
        case Variant::Socpool:
            polin.topRows(social.rows()) = social;
            polin.bottomRows(Hd) = self;
            break;
        case Variant::Nso: polin = social; break;
        case Variant::Sso: polin = self; break;
    }

    MatrixXd h1 = elu_columns((net.p1.W * polin).colwise() + net.p1.b);
    MatrixXd logits = (net.p2.W * h1).colwise() + net.p2.b;
    nn::softmax_inplace_columns(logits);
    if (tape) {
        tape->polin = std::move(polin);
        tape->h1 = std::move(h1);
        tape->probs = logits;
    }
    probs_out = std::move(logits);
}

}  // namespace

MatrixXd batch_probabilities(const MgpiNetwork& net, const SampleBatch& batch) {
    MatrixXd probs;
    run_forward(net, batch, nullptr, probs);
    return probs;
}

double batch_mean_cross_entropy(const MatrixXd& probs, std::span<const int> targets) {
    double sum = 0.0;
    for (std::size_t b = 0; b < targets.size(); ++b)
        sum += -std::log(std::max(probs(targets[b], static_cast<Eigen::Index>(b)), nn::kLogFloor));
    return sum / static_cast<double>(targets.size());
}

double batch_forward_backward(const MgpiNetwork& net, const SampleBatch& batch, double denominator,
                              MgpiGrads& grads) {
    const MgpiConfig& cfg = net.config;
    const int B = batch.width;
    const int Hd = cfg.encoder_hidden;
    const int W = cfg.message_width();
    const int jsum = batch.total_neighbors();

    Tape tape;
    MatrixXd probs;
    run_forward(net, batch, &tape, probs);

    double loss_sum = 0.0;
    MatrixXd dlogits = tape.probs;
    for (int b = 0; b < B; ++b) {
        const int target = batch.targets[static_cast<std::size_t>(b)];
        loss_sum += -std::log(std::max(tape.probs(target, b), nn::kLogFloor));
        dlogits(target, b) -= 1.0;
    }
    dlogits /= denominator;

    // policy
    grads.p2W.noalias() += dlogits * tape.h1.transpose();
    grads.p2b += dlogits.rowwise().sum();
    MatrixXd dh1 = net.p2.W.transpose() * dlogits;
    MatrixXd dpre1 = dh1.cwiseProduct(
        tape.h1.unaryExpr([](double y) { return nn::elu_grad_from_output(y); }));
    grads.p1W.noalias() += dpre1 * tape.polin.transpose();
    grads.p1b += dpre1.rowwise().sum();
    const MatrixXd dpolin = net.p1.W.transpose() * dpre1;

    // split policy input gradient
    MatrixXd dsocial, dself;
    switch (cfg.variant) {
        case Variant::Mgpi:
        case Variant::Eqpool:
        case Variant::Socpool:
            dsocial = dpolin.topRows(dpolin.rows() - Hd);
            dself = dpolin.bottomRows(Hd);
            break;
        case Variant::Nso: dsocial = dpolin; break;
        case Variant::Sso: dself = dpolin; break;
    }

    if (cfg.has_self())
        nn::gru_backward_batch(net.Cself, batch.self_steps, tape.Cself, std::move(dself), grads.Cself);

    if (cfg.has_social()) {
        // un-pool onto neighbor columns
        MatrixXd dx(W, jsum);
        if (cfg.variant == Variant::Socpool) {
            const int cells = cfg.socpool_grid * cfg.socpool_grid;
            for (int j = 0; j < jsum; ++j) {
                const int cell = batch.cell[static_cast<std::size_t>(j)];
                if (cell < 0) {
                    dx.col(j).setZero();
                    continue;
                }
                const int b = batch.owner[static_cast<std::size_t>(j)];
                const int n = batch.cell_count[static_cast<std::size_t>(b) * cells + cell];
                dx.col(j) = dsocial.col(b).segment(static_cast<Eigen::Index>(cell) * W, W) /
                            std::max(n, 1);
            }
        } else {
            for (int j = 0; j < jsum; ++j) {
                const int b = batch.owner[static_cast<std::size_t>(j)];
                dx.col(j) = dsocial.col(b) / batch.neighbor_count[static_cast<std::size_t>(b)];
            }
        }

        MatrixXd dmsg;
        if (cfg.has_gate()) {
            MatrixXd dk(1, jsum);
            for (int j = 0; j < jsum; ++j) dk(0, j) = tape.msg.col(j).dot(dx.col(j));
            dmsg = dx * tape.gate_k.row(0).asDiagonal();

            const MatrixXd dpre2 = dk.cwiseProduct(
                tape.gate_pre2.unaryExpr([](double a) { return nn::hard_sigmoid_grad(a); }));
            grads.k2W.noalias() += dpre2 * tape.gate_h1.transpose();
            grads.k2b += dpre2.rowwise().sum();
            MatrixXd dg1 = net.k2.W.transpose() * dpre2;
            const MatrixXd dpre1g = dg1.cwiseProduct(
                tape.gate_h1.unaryExpr([](double y) { return nn::elu_grad_from_output(y); }));
            grads.k1W.noalias() += dpre1g * batch.gate_in.transpose();
            grads.k1b += dpre1g.rowwise().sum();
        } else {
            dmsg = std::move(dx);
        }

        nn::gru_backward_batch(net.N, batch.p_steps, tape.N, dmsg.topRows(Hd), grads.N);
        nn::gru_backward_batch(net.C, batch.d_steps, tape.C, dmsg.bottomRows(Hd), grads.C);
    }

    return loss_sum / denominator;
}

}  // namespace mgpi::model
