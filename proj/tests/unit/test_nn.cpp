#include <doctest.h>

#include <cmath>

#include "mgpi/nn.hpp"
#include "mgpi/rng.hpp"

using namespace mgpi;
using nn::MatrixXd;
using nn::VectorXd;

TEST_CASE("activation values") {
    CHECK(nn::elu(0.0) == 0.0);
    CHECK(nn::elu(2.0) == 2.0);
    CHECK(nn::elu(-50.0) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(nn::hard_sigmoid(0.0) == 0.5);
    CHECK(nn::hard_sigmoid(2.5) == 1.0);
    CHECK(nn::hard_sigmoid(-2.5) == 0.0);
    CHECK(nn::hard_sigmoid(100.0) == 1.0);

    const VectorXd u = nn::softmax(VectorXd::Zero(3));
    CHECK(u(0) == doctest::Approx(1.0 / 3));
    CHECK(u(1) == doctest::Approx(1.0 / 3));
    CHECK(u(2) == doctest::Approx(1.0 / 3));
}

TEST_CASE("softmax stays normalized for huge inputs") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        VectorXd v(5);
        for (int i = 0; i < 5; ++i) v(i) = rng.uniform(-1e3, 1e3);
        const VectorXd p = nn::softmax(v);
        CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
        CHECK(p.minCoeff() >= 0.0);
        for (int i = 0; i < 5; ++i) CHECK(std::isfinite(p(i)));
    }
    // shift invariance
    VectorXd v(4);
    v << 0.3, -1.2, 2.0, 0.0;
    const VectorXd a = nn::softmax(v);
    const VectorXd b = nn::softmax((v.array() + 123.0).matrix());
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gru zero parameters give zero output") {
    const nn::GruCell cell = nn::GruCell::zeros(3, 4);
    MatrixXd seq = MatrixXd::Random(3, 7);
    const VectorXd h = nn::gru_forward(cell, seq, VectorXd::Zero(4));
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gru single step with identity candidate") {
    // zero gates give z = 1/2; identity-like Wh maps input straight through
    nn::GruCell cell = nn::GruCell::zeros(2, 2);
    cell.Wh.setIdentity();
    MatrixXd seq(2, 1);
    seq << 3.0, -1.0;
    const VectorXd h = nn::gru_forward(cell, seq, VectorXd::Zero(2));
    CHECK(h(0) == doctest::Approx(1.5));
    CHECK(h(1) == doctest::Approx(-0.5));
}

namespace {

// independent single-step oracle for the recurrence
VectorXd gru_step_oracle(const nn::GruCell& c, const VectorXd& x, const VectorXd& h) {
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const VectorXd z = (c.Wz * x + c.Uz * h + c.bz).unaryExpr(sig);
    const VectorXd r = (c.Wr * x + c.Ur * h + c.br).unaryExpr(sig);
    const VectorXd hc = c.Wh * x + c.Uh * r.cwiseProduct(h) + c.bh;
    return ((1.0 - z.array()) * h.array() + z.array() * hc.array()).matrix();
}

nn::GruCell random_cell(int in, int hidden, std::uint64_t seed) {
    nn::GruCell c = nn::GruCell::zeros(in, hidden);
    Rng rng(seed);
    for (MatrixXd* m : {&c.Wz, &c.Wr, &c.Wh, &c.Uz, &c.Ur, &c.Uh})
        for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.uniform(-0.5, 0.5);
    for (VectorXd* v : {&c.bz, &c.br, &c.bh})
        for (Eigen::Index i = 0; i < v->size(); ++i) v->data()[i] = rng.uniform(-0.2, 0.2);
    return c;
}

}  // namespace

TEST_CASE("gru run equals iterated single steps") {
    const nn::GruCell cell = random_cell(3, 5, 11);
    Rng rng(12);
    MatrixXd seq(3, 8);
    for (Eigen::Index i = 0; i < seq.size(); ++i) seq.data()[i] = rng.uniform(-1, 1);

    VectorXd h = VectorXd::Zero(5);
    for (int t = 0; t < 8; ++t) h = gru_step_oracle(cell, seq.col(t), h);
    const VectorXd got = nn::gru_forward(cell, seq, VectorXd::Zero(5));
    CHECK((h - got).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gru is length-composable") {
    const nn::GruCell cell = random_cell(2, 4, 21);
    Rng rng(22);
    MatrixXd seq(2, 10);
    for (Eigen::Index i = 0; i < seq.size(); ++i) seq.data()[i] = rng.uniform(-1, 1);

    const VectorXd full = nn::gru_forward(cell, seq, VectorXd::Zero(4));
    const VectorXd mid = nn::gru_forward(cell, seq.leftCols(4), VectorXd::Zero(4));
    const VectorXd tail = nn::gru_forward(cell, seq.rightCols(6), mid);
    CHECK((full - tail).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("batched gru matches per-sample gru") {
    const nn::GruCell cell = random_cell(3, 6, 31);
    Rng rng(32);
    const int H = 7, W = 5;
    std::vector<MatrixXd> steps(H, MatrixXd(3, W));
    for (auto& m : steps)
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);

    const MatrixXd out = nn::gru_forward_batch(cell, steps);
    for (int w = 0; w < W; ++w) {
        MatrixXd seq(3, H);
        for (int t = 0; t < H; ++t) seq.col(t) = steps[static_cast<std::size_t>(t)].col(w);
        const VectorXd one = nn::gru_forward(cell, seq, VectorXd::Zero(6));
        CHECK((out.col(w) - one).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dense forward") {
    nn::Dense d = nn::Dense::zeros(2, 2, nn::Activation::Identity);
    CHECK(nn::dense_forward(d, VectorXd::Ones(2)).cwiseAbs().maxCoeff() == 0.0);

    d.W.setIdentity();
    d.act = nn::Activation::Elu;
    VectorXd v(2);
    v << -50.0, 2.0;
    const VectorXd out = nn::dense_forward(d, v);
    CHECK(out(0) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(out(1) == doctest::Approx(2.0));

    nn::Dense sm = nn::Dense::zeros(2, 4, nn::Activation::Softmax);
    Rng rng(5);
    for (Eigen::Index i = 0; i < sm.W.size(); ++i) sm.W.data()[i] = rng.uniform(-2, 2);
    const VectorXd p = nn::dense_forward(sm, v);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
}

TEST_CASE("cross entropy") {
    VectorXd pred(3);
    pred << 1.0, 0.0, 0.0;
    VectorXd onehot = VectorXd::Zero(3);
    onehot(0) = 1.0;
    CHECK(nn::cross_entropy(pred, onehot) == doctest::Approx(0.0));

    const VectorXd u6 = VectorXd::Constant(6, 1.0 / 6);
    CHECK(nn::cross_entropy(u6, 3) == doctest::Approx(std::log(6.0)));
    const VectorXd u7 = VectorXd::Constant(7, 1.0 / 7);
    CHECK(nn::cross_entropy(u7, 0) == doctest::Approx(std::log(7.0)));

    VectorXd bad(3);
    bad << 0.5, 0.2, 0.1;  // sums to 0.8
    CHECK_THROWS_AS(nn::cross_entropy(bad, 0), std::invalid_argument);
    VectorXd not_onehot(3);
    not_onehot << 0.5, 0.5, 0.0;
    CHECK_THROWS_AS(nn::cross_entropy(pred, not_onehot), std::invalid_argument);
}

TEST_CASE("adam first step and determinism") {
    double theta = 1.0;
    double grad = 0.1;
    nn::ParamRef p{"w", &theta, 1, 1};
    nn::ParamRef g{"w", &grad, 1, 1};
    nn::AdamState state;
    nn::adam_update({p}, {g}, state);
    CHECK(state.t == 1);
    CHECK(theta == doctest::Approx(1.0 - 1e-3 * 0.1 / (0.1 + 1e-8)).epsilon(1e-9));

    // zero grad leaves parameters untouched but advances the step counter
    double theta2 = 0.7, zero = 0.0;
    nn::ParamRef p2{"w2", &theta2, 1, 1};
    nn::ParamRef g2{"w2", &zero, 1, 1};
    nn::AdamState s2;
    nn::adam_update({p2}, {g2}, s2);
    CHECK(theta2 == 0.7);
    CHECK(s2.t == 1);

    // identical states and inputs give identical results
    double ta = 0.3, tb = 0.3, ga = -0.05, gb = -0.05;
    nn::AdamState sa, sb;
    for (int i = 0; i < 5; ++i) {
        nn::adam_update({{"x", &ta, 1, 1}}, {{"x", &ga, 1, 1}}, sa);
        nn::adam_update({{"x", &tb, 1, 1}}, {{"x", &gb, 1, 1}}, sb);
    }
    CHECK(ta == tb);
}

TEST_CASE("param array round trip is exact") {
    Rng rng(9);
    MatrixXd m(3, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
    const MatrixXd original = m;
    nn::ParamRef ref{"m", m.data(), 3, 4};
    const nn::ParamArray arr = nn::to_param_array(ref);
    CHECK(arr.shape == std::vector<int>{3, 4});
    m.setZero();
    nn::from_param_array(arr, ref);
    CHECK(m == original);
}
