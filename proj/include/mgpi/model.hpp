#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mgpi/nn.hpp"
#include "mgpi/types.hpp"

namespace mgpi::model {

enum class Variant { Mgpi, Nso, Sso, Eqpool, Socpool };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct MgpiConfig {
    int horizon = 15;
    int num_actions = kStaticActionCount;
    int encoder_hidden = 64;
    int gate_hidden = 64;
    int policy_hidden = 64;
    double position_scale = 100.0;
    Variant variant = Variant::Mgpi;
    int socpool_grid = 4;
    double socpool_cell = 50.0;

    /// Social side present for everything but SSO; self side for everything
    /// but NSO; only MGPI carries the gate.
    bool has_social() const { return variant != Variant::Sso; }
    bool has_self() const { return variant != Variant::Nso; }
    bool has_gate() const { return variant == Variant::Mgpi; }
    int message_width() const { return 2 * encoder_hidden; }
    int policy_input_width() const;
    void validate() const;
};

/// All trainable parameters: neighbor encoders N (non-verbal) and C
/// (conversational), self encoder C', gate MLP K and policy MLP pi. Only the
/// blocks used by the configured variant are allocated.
struct MgpiNetwork {
    MgpiConfig config;
    nn::GruCell N, C, Cself;
    nn::Dense k1, k2;  // gate: elu then hard-sigmoid
    nn::Dense p1, p2;  // policy: elu then softmax

    /// Allocates and seeds all parameters (Glorot-uniform weights, zero biases).
    static MgpiNetwork create(const MgpiConfig& config, std::uint64_t seed);

    /// Stable dotted-path views of every parameter, in a fixed order.
    std::vector<nn::ParamRef> param_refs();
    std::vector<nn::ParamRef> param_refs() const;
};

/// Gradient buffers mirroring a network's parameters.
struct MgpiGrads {
    nn::GruGrads N, C, Cself;
    nn::MatrixXd k1W, k2W, p1W, p2W;
    nn::VectorXd k1b, k2b, p1b, p2b;

    static MgpiGrads zeros(const MgpiNetwork& net);
    void set_zero();
    /// Views aligned name-for-name with MgpiNetwork::param_refs().
    std::vector<nn::ParamRef> param_refs(const MgpiConfig& config);
};

/// Importance weight in [0,1] from a neighbor's current relative observation.
double kpm_gate(const MgpiNetwork& net, const RelativeObservation& rel);

/// [N(P_hist), C(D_hist)] for one neighbor; P_hist stacks gaze over position.
nn::VectorXd encode_neighbor(const MgpiNetwork& net, const nn::MatrixXd& P_hist,
                             const nn::MatrixXd& D_hist);

struct PooledSignal {
    nn::VectorXd value;
    bool empty = false;  // no neighbors contributed; value is the zero vector
};

/// Coordinate-wise arithmetic mean of weighted messages.
PooledSignal pool_signals(const std::vector<nn::VectorXd>& messages);

/// Probability distribution over the agent's next conversational action.
nn::VectorXd forward(const MgpiNetwork& net, const AgentState& state);

/// Element-wise forward, order preserved.
std::vector<nn::VectorXd> batch_forward(const MgpiNetwork& net, const std::vector<AgentState>& states);

/// SOCPOOL cell index for a raw-unit offset in the observer frame, row-major
/// over an n x n grid centered on the observer; -1 when outside the grid.
int socpool_cell_index(const MgpiConfig& config, double raw_x, double raw_y);

/// Checkpoint: single JSON document with the config, training metadata and
/// every parameter as {shape, row-major data}.
struct Checkpoint {
    MgpiNetwork net;
    int neighbors = 4;
    Scenario scenario = Scenario::Static;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mgpi::model
