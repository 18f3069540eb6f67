#include "mgpi/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace mgpi::nn {

VectorXd softmax(const VectorXd& v) {
    VectorXd out = v;
    const double mx = out.maxCoeff();
    out = (out.array() - mx).exp();
    out /= out.sum();
    return out;
}

void softmax_inplace_columns(MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double mx = m.col(c).maxCoeff();
        m.col(c) = (m.col(c).array() - mx).exp();
        m.col(c) /= m.col(c).sum();
    }
}

ParamArray to_param_array(const ParamRef& ref) {
    ParamArray arr;
    arr.name = ref.name;
    if (ref.cols == 1) {
        arr.shape = {ref.rows};
        arr.data.assign(ref.data, ref.data + ref.rows);
    } else {
        arr.shape = {ref.rows, ref.cols};
        arr.data.resize(static_cast<std::size_t>(ref.size()));
        // column-major storage -> row-major payload
        for (int r = 0; r < ref.rows; ++r)
            for (int c = 0; c < ref.cols; ++c)
                arr.data[static_cast<std::size_t>(r) * ref.cols + c] =
                    ref.data[static_cast<std::size_t>(c) * ref.rows + r];
    }
    return arr;
}

void from_param_array(const ParamArray& arr, const ParamRef& ref) {
    Eigen::Index expected = 1;
    for (int d : arr.shape) expected *= d;
    if (expected != ref.size())
        throw std::invalid_argument("parameter " + arr.name + ": shape mismatch");
    if (ref.cols == 1) {
        std::copy(arr.data.begin(), arr.data.end(), ref.data);
    } else {
        if (arr.shape.size() != 2 || arr.shape[0] != ref.rows || arr.shape[1] != ref.cols)
            throw std::invalid_argument("parameter " + arr.name + ": shape mismatch");
        for (int r = 0; r < ref.rows; ++r)
            for (int c = 0; c < ref.cols; ++c)
                ref.data[static_cast<std::size_t>(c) * ref.rows + r] =
                    arr.data[static_cast<std::size_t>(r) * ref.cols + c];
    }
}

GruCell GruCell::zeros(int input, int hidden) {
    GruCell c;
    c.Wz = MatrixXd::Zero(hidden, input);
    c.Wr = MatrixXd::Zero(hidden, input);
    c.Wh = MatrixXd::Zero(hidden, input);
    c.Uz = MatrixXd::Zero(hidden, hidden);
    c.Ur = MatrixXd::Zero(hidden, hidden);
    c.Uh = MatrixXd::Zero(hidden, hidden);
    c.bz = VectorXd::Zero(hidden);
    c.br = VectorXd::Zero(hidden);
    c.bh = VectorXd::Zero(hidden);
    return c;
}

void GruTape::clear() {
    z.clear();
    r.clear();
    hcand.clear();
    hprev.clear();
}

GruGrads GruGrads::zeros(const GruCell& cell) {
    GruGrads g;
    g.Wz = MatrixXd::Zero(cell.Wz.rows(), cell.Wz.cols());
    g.Wr = MatrixXd::Zero(cell.Wr.rows(), cell.Wr.cols());
    g.Wh = MatrixXd::Zero(cell.Wh.rows(), cell.Wh.cols());
    g.Uz = MatrixXd::Zero(cell.Uz.rows(), cell.Uz.cols());
    g.Ur = MatrixXd::Zero(cell.Ur.rows(), cell.Ur.cols());
    g.Uh = MatrixXd::Zero(cell.Uh.rows(), cell.Uh.cols());
    g.bz = VectorXd::Zero(cell.bz.size());
    g.br = VectorXd::Zero(cell.br.size());
    g.bh = VectorXd::Zero(cell.bh.size());
    return g;
}

MatrixXd gru_forward_batch(const GruCell& cell, std::span<const MatrixXd> steps, GruTape* tape) {
    if (steps.empty()) throw std::invalid_argument("gru_forward: empty sequence");
    const Eigen::Index hidden = cell.Wz.rows();
    const Eigen::Index input = cell.Wz.cols();
    const Eigen::Index width = steps.front().cols();
    if (tape) {
        tape->clear();
        tape->z.reserve(steps.size());
        tape->r.reserve(steps.size());
        tape->hcand.reserve(steps.size());
        tape->hprev.reserve(steps.size());
    }

    // Fused parameter blocks: one input-projection GEMM and one z/r
    // recurrence GEMM per step instead of five.
    MatrixXd wall(3 * hidden, input);
    wall.topRows(hidden) = cell.Wz;
    wall.middleRows(hidden, hidden) = cell.Wr;
    wall.bottomRows(hidden) = cell.Wh;
    MatrixXd uzr(2 * hidden, hidden);
    uzr.topRows(hidden) = cell.Uz;
    uzr.bottomRows(hidden) = cell.Ur;

    MatrixXd h = MatrixXd::Zero(hidden, width);
    MatrixXd wx(3 * hidden, width), zr(2 * hidden, width);
    MatrixXd z(hidden, width), r(hidden, width), hcand(hidden, width), rh(hidden, width);
    for (const MatrixXd& x : steps) {
        if (x.rows() != input || x.cols() != width)
            throw std::invalid_argument("gru_forward: step shape mismatch");
        wx.noalias() = wall * x;
        zr.noalias() = uzr * h;
        z = wx.topRows(hidden);
        z += zr.topRows(hidden);
        z.colwise() += cell.bz;
        z.array() = 1.0 / (1.0 + (-z.array()).exp());
        r = wx.middleRows(hidden, hidden);
        r += zr.bottomRows(hidden);
        r.colwise() += cell.br;
        r.array() = 1.0 / (1.0 + (-r.array()).exp());
        rh.array() = r.array() * h.array();
        hcand = wx.bottomRows(hidden);
        hcand.colwise() += cell.bh;
        hcand.noalias() += cell.Uh * rh;
        if (tape) {
            tape->z.push_back(z);
            tape->r.push_back(r);
            tape->hcand.push_back(hcand);
            tape->hprev.push_back(std::move(h));
            h.resize(hidden, width);
            h.array() = (1.0 - z.array()) * tape->hprev.back().array() + z.array() * hcand.array();
        } else {
            h.array() = (1.0 - z.array()) * h.array() + z.array() * hcand.array();
        }
    }
    return h;
}

VectorXd gru_forward(const GruCell& cell, const MatrixXd& sequence, const VectorXd& h0) {
    if (sequence.rows() != cell.Wz.cols())
        throw std::invalid_argument("gru_forward: input size mismatch");
    if (h0.size() != cell.Wz.rows()) throw std::invalid_argument("gru_forward: hidden size mismatch");
    if (sequence.cols() < 1) throw std::invalid_argument("gru_forward: empty sequence");

    VectorXd h = h0;
    for (Eigen::Index t = 0; t < sequence.cols(); ++t) {
        const VectorXd x = sequence.col(t);
        const VectorXd z = (cell.Wz * x + cell.Uz * h + cell.bz).unaryExpr([](double a) { return logistic(a); });
        const VectorXd r = (cell.Wr * x + cell.Ur * h + cell.br).unaryExpr([](double a) { return logistic(a); });
        const VectorXd hcand = cell.Wh * x + cell.Uh * (r.cwiseProduct(h)) + cell.bh;
        h = ((1.0 - z.array()) * h.array() + z.array() * hcand.array()).matrix();
    }
    return h;
}

void gru_backward_batch(const GruCell& cell, std::span<const MatrixXd> steps, const GruTape& tape,
                        MatrixXd dh, GruGrads& grads) {
    const int H = static_cast<int>(steps.size());
    const Eigen::Index hidden = dh.rows();
    const Eigen::Index width = dh.cols();
    const Eigen::Index input = cell.Wz.cols();

    MatrixXd uzr(2 * hidden, hidden);
    uzr.topRows(hidden) = cell.Uz;
    uzr.bottomRows(hidden) = cell.Ur;

    MatrixXd duzr = MatrixXd::Zero(2 * hidden, hidden);
    MatrixXd dwall = MatrixXd::Zero(3 * hidden, input);
    VectorXd dball = VectorXd::Zero(3 * hidden);

    // da3 stacks the three pre-activation gradients [daz; dar; dhcand].
    MatrixXd da3(3 * hidden, width);
    MatrixXd dhprev(hidden, width), dq(hidden, width), rh(hidden, width);
    for (int t = H - 1; t >= 0; --t) {
        const MatrixXd& z = tape.z[static_cast<std::size_t>(t)];
        const MatrixXd& r = tape.r[static_cast<std::size_t>(t)];
        const MatrixXd& hcand = tape.hcand[static_cast<std::size_t>(t)];
        const MatrixXd& hprev = tape.hprev[static_cast<std::size_t>(t)];
        const MatrixXd& x = steps[static_cast<std::size_t>(t)];

        auto dhcand = da3.bottomRows(hidden);
        dhcand.array() = dh.array() * z.array();
        dhprev.array() = dh.array() * (1.0 - z.array());

        // hcand = Wh x + bh + Uh (r .* hprev); identity candidate activation
        rh.array() = r.array() * hprev.array();
        grads.Uh.noalias() += dhcand * rh.transpose();
        dq.noalias() = cell.Uh.transpose() * dhcand;  // d(r .* hprev)
        dhprev.array() += dq.array() * r.array();

        auto dazr = da3.topRows(2 * hidden);
        da3.topRows(hidden).array() =
            dh.array() * (hcand - hprev).array() * z.array() * (1.0 - z.array());
        da3.middleRows(hidden, hidden).array() =
            dq.array() * hprev.array() * r.array() * (1.0 - r.array());

        duzr.noalias() += dazr * hprev.transpose();
        dhprev.noalias() += uzr.transpose() * dazr;
        dwall.noalias() += da3 * x.transpose();
        dball += da3.rowwise().sum();

        std::swap(dh, dhprev);
    }

    grads.Uz += duzr.topRows(hidden);
    grads.Ur += duzr.bottomRows(hidden);
    grads.Wz += dwall.topRows(hidden);
    grads.Wr += dwall.middleRows(hidden, hidden);
    grads.Wh += dwall.bottomRows(hidden);
    grads.bz += dball.head(hidden);
    grads.br += dball.segment(hidden, hidden);
    grads.bh += dball.tail(hidden);
}

Dense Dense::zeros(int in, int out, Activation act) {
    Dense d;
    d.W = MatrixXd::Zero(out, in);
    d.b = VectorXd::Zero(out);
    d.act = act;
    return d;
}

VectorXd dense_forward(const Dense& layer, const VectorXd& v) {
    if (v.size() != layer.W.cols()) throw std::invalid_argument("dense_forward: input size mismatch");
    VectorXd pre = layer.W * v + layer.b;
    switch (layer.act) {
        case Activation::Identity: return pre;
        case Activation::Elu: return pre.unaryExpr([](double a) { return elu(a); });
        case Activation::HardSigmoid: return pre.unaryExpr([](double a) { return hard_sigmoid(a); });
        case Activation::Softmax: return softmax(pre);
    }
    return pre;
}

double cross_entropy(const VectorXd& pred, int target_index) {
    if (target_index < 0 || target_index >= pred.size())
        throw std::invalid_argument("cross_entropy: target index out of range");
    if (std::abs(pred.sum() - 1.0) > 1e-6 || pred.minCoeff() < -1e-12)
        throw std::invalid_argument("cross_entropy: pred is not a probability vector");
    return -std::log(std::max(pred(target_index), kLogFloor));
}

double cross_entropy(const VectorXd& pred, const VectorXd& target_one_hot) {
    if (pred.size() != target_one_hot.size())
        throw std::invalid_argument("cross_entropy: size mismatch");
    int idx = -1;
    for (Eigen::Index i = 0; i < target_one_hot.size(); ++i) {
        const double v = target_one_hot(i);
        if (v == 1.0) {
            if (idx >= 0) throw std::invalid_argument("cross_entropy: target not one-hot");
            idx = static_cast<int>(i);
        } else if (v != 0.0) {
            throw std::invalid_argument("cross_entropy: target not one-hot");
        }
    }
    if (idx < 0) throw std::invalid_argument("cross_entropy: target not one-hot");
    return cross_entropy(pred, idx);
}

void adam_update(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
                 AdamState& state) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam_update: ref count mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const ParamRef& p = params[i];
        const ParamRef& g = grads[i];
        if (p.size() != g.size()) throw std::invalid_argument("adam_update: size mismatch for " + p.name);
        VectorXd& m = state.m[p.name];
        VectorXd& v = state.v[p.name];
        if (m.size() != p.size()) m = VectorXd::Zero(p.size());
        if (v.size() != p.size()) v = VectorXd::Zero(p.size());
        Eigen::Map<VectorXd> theta(p.data, p.size());
        Eigen::Map<const VectorXd> grad(g.data, g.size());
        m = state.beta1 * m + (1.0 - state.beta1) * grad;
        v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
        theta.array() -= state.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
    }
}

double glorot_bound(int fan_in, int fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace mgpi::nn
