#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mgpi::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---- activations ------------------------------------------------------------

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

/// Derivative of ELU expressed through its output (exp(x) = y + 1 for x <= 0).
inline double elu_grad_from_output(double y) { return y > 0.0 ? 1.0 : y + 1.0; }

inline double hard_sigmoid(double x) {
    const double y = 0.2 * x + 0.5;
    return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
}

inline double hard_sigmoid_grad(double x) { return (x > -2.5 && x < 2.5) ? 0.2 : 0.0; }

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Max-subtracted softmax; valid distribution for any finite input.
VectorXd softmax(const VectorXd& v);
void softmax_inplace_columns(MatrixXd& m);

// ---- parameters -------------------------------------------------------------

/// Flat named view of one trainable array (row-major data).
struct ParamArray {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;
};

/// Borrowed view over a parameter's storage; rows/cols describe its shape
/// (cols == 1 for biases). Eigen stores column-major; ParamArray data is
/// row-major, conversion happens at the boundary.
struct ParamRef {
    std::string name;
    double* data = nullptr;
    int rows = 0;
    int cols = 0;

    Eigen::Index size() const { return static_cast<Eigen::Index>(rows) * cols; }
};

ParamArray to_param_array(const ParamRef& ref);
void from_param_array(const ParamArray& arr, const ParamRef& ref);

// ---- GRU ---------------------------------------------------------------------

/// Gated recurrent unit with logistic update/reset gates and an identity
/// (linear) candidate activation:
///   z = sigm(Wz x + Uz h + bz), r = sigm(Wr x + Ur h + br)
///   hcand = Wh x + bh + Uh (r .* h)
///   h' = (1 - z) .* h + z .* hcand
struct GruCell {
    MatrixXd Wz, Wr, Wh;  // hidden x input
    MatrixXd Uz, Ur, Uh;  // hidden x hidden
    VectorXd bz, br, bh;  // hidden

    int input_size() const { return static_cast<int>(Wz.cols()); }
    int hidden_size() const { return static_cast<int>(Wz.rows()); }
    static GruCell zeros(int input, int hidden);
};

/// Per-step forward record for one batched run (each matrix hidden x width).
struct GruTape {
    std::vector<MatrixXd> z, r, hcand, hprev;
    void clear();
};

struct GruGrads {
    MatrixXd Wz, Wr, Wh, Uz, Ur, Uh;
    VectorXd bz, br, bh;
    static GruGrads zeros(const GruCell& cell);
};

/// Runs the recurrence over `steps` (each input x width) from h = 0 and
/// returns the final hidden state (hidden x width). With a tape the
/// intermediates needed for the backward pass are recorded.
MatrixXd gru_forward_batch(const GruCell& cell, std::span<const MatrixXd> steps,
                           GruTape* tape = nullptr);

/// Single-sequence forward from an explicit initial hidden state.
VectorXd gru_forward(const GruCell& cell, const MatrixXd& sequence, const VectorXd& h0);

/// Accumulates parameter gradients for a recorded run; `dh` is the loss
/// gradient w.r.t. the final hidden state and is consumed.
void gru_backward_batch(const GruCell& cell, std::span<const MatrixXd> steps, const GruTape& tape,
                        MatrixXd dh, GruGrads& grads);

// ---- dense -------------------------------------------------------------------

enum class Activation { Identity, Elu, HardSigmoid, Softmax };

struct Dense {
    MatrixXd W;  // out x in
    VectorXd b;  // out
    Activation act = Activation::Identity;

    static Dense zeros(int in, int out, Activation act);
};

VectorXd dense_forward(const Dense& layer, const VectorXd& v);

// ---- loss ---------------------------------------------------------------------

/// -log(pred[target]) with pred floored at 1e-12. `pred` must sum to 1 within
/// 1e-6 and `target` must be exactly one-hot.
double cross_entropy(const VectorXd& pred, const VectorXd& target_one_hot);
double cross_entropy(const VectorXd& pred, int target_index);

inline constexpr double kLogFloor = 1e-12;

// ---- Adam ----------------------------------------------------------------------

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::map<std::string, VectorXd> m, v;
};

/// Standard bias-corrected Adam step over paired parameter/gradient views.
void adam_update(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
                 AdamState& state);

// ---- init ----------------------------------------------------------------------

/// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
double glorot_bound(int fan_in, int fan_out);

}  // namespace mgpi::nn
