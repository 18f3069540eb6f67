#include "mgpi/model.hpp"

#include <fstream>
#include <json.hpp>

#include "mgpi/rng.hpp"

namespace mgpi::model {

using nn::MatrixXd;
using nn::VectorXd;
using nlohmann::json;

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Mgpi: return "mgpi";
        case Variant::Nso: return "nso";
        case Variant::Sso: return "sso";
        case Variant::Eqpool: return "eqpool";
        case Variant::Socpool: return "socpool";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "mgpi") return Variant::Mgpi;
    if (name == "nso") return Variant::Nso;
    if (name == "sso") return Variant::Sso;
    if (name == "eqpool") return Variant::Eqpool;
    if (name == "socpool") return Variant::Socpool;
    throw std::invalid_argument("unknown model variant: " + name);
}

int MgpiConfig::policy_input_width() const {
    switch (variant) {
        case Variant::Mgpi:
        case Variant::Eqpool: return message_width() + encoder_hidden;
        case Variant::Nso: return message_width();
        case Variant::Sso: return encoder_hidden;
        case Variant::Socpool: return message_width() * socpool_grid * socpool_grid + encoder_hidden;
    }
    return 0;
}

void MgpiConfig::validate() const {
    if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (num_actions != kStaticActionCount && num_actions != kDynamicActionCount)
        throw std::invalid_argument("config: action count must be 6 or 7");
    if (encoder_hidden < 1 || gate_hidden < 1 || policy_hidden < 1)
        throw std::invalid_argument("config: hidden sizes must be >= 1");
    if (!(position_scale > 0.0)) throw std::invalid_argument("config: position_scale must be positive");
    if (variant == Variant::Socpool && (socpool_grid < 1 || !(socpool_cell > 0.0)))
        throw std::invalid_argument("config: socpool grid/cell invalid");
}

namespace {

void glorot_fill(MatrixXd& w, Rng& rng) {
    const double s = nn::glorot_bound(static_cast<int>(w.cols()), static_cast<int>(w.rows()));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-s, s);
}

void push_gru_refs(std::vector<nn::ParamRef>& out, const std::string& prefix, const nn::GruCell& cell) {
    auto& c = const_cast<nn::GruCell&>(cell);
    auto add = [&](const std::string& n, MatrixXd& m) {
        out.push_back({prefix + "." + n, m.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols())});
    };
    auto addb = [&](const std::string& n, VectorXd& v) {
        out.push_back({prefix + "." + n, v.data(), static_cast<int>(v.size()), 1});
    };
    add("W_z", c.Wz);
    add("W_r", c.Wr);
    add("W_h", c.Wh);
    add("U_z", c.Uz);
    add("U_r", c.Ur);
    add("U_h", c.Uh);
    addb("b_z", c.bz);
    addb("b_r", c.br);
    addb("b_h", c.bh);
}

void push_dense_refs(std::vector<nn::ParamRef>& out, const std::string& prefix, const nn::Dense& d) {
    auto& dd = const_cast<nn::Dense&>(d);
    out.push_back({prefix + ".weight", dd.W.data(), static_cast<int>(dd.W.rows()),
                   static_cast<int>(dd.W.cols())});
    out.push_back({prefix + ".bias", dd.b.data(), static_cast<int>(dd.b.size()), 1});
}

std::vector<nn::ParamRef> collect_refs(const MgpiConfig& config, const nn::GruCell& N,
                                       const nn::GruCell& C, const nn::GruCell& Cself,
                                       const nn::Dense& k1, const nn::Dense& k2, const nn::Dense& p1,
                                       const nn::Dense& p2) {
    std::vector<nn::ParamRef> refs;
    if (config.has_social()) {
        push_gru_refs(refs, "N", N);
        push_gru_refs(refs, "C", C);
    }
    if (config.has_self()) push_gru_refs(refs, "Cself", Cself);
    if (config.has_gate()) {
        push_dense_refs(refs, "K.layer1", k1);
        push_dense_refs(refs, "K.layer2", k2);
    }
    push_dense_refs(refs, "pi.layer1", p1);
    push_dense_refs(refs, "pi.layer2", p2);
    return refs;
}

}  // namespace

MgpiNetwork MgpiNetwork::create(const MgpiConfig& config, std::uint64_t seed) {
    config.validate();
    MgpiNetwork net;
    net.config = config;
    const int U = config.num_actions;
    const int Hd = config.encoder_hidden;
    if (config.has_social()) {
        net.N = nn::GruCell::zeros(4, Hd);
        net.C = nn::GruCell::zeros(U, Hd);
    }
    if (config.has_self()) net.Cself = nn::GruCell::zeros(U, Hd);
    if (config.has_gate()) {
        net.k1 = nn::Dense::zeros(4, config.gate_hidden, nn::Activation::Elu);
        net.k2 = nn::Dense::zeros(config.gate_hidden, 1, nn::Activation::HardSigmoid);
    }
    net.p1 = nn::Dense::zeros(config.policy_input_width(), config.policy_hidden, nn::Activation::Elu);
    net.p2 = nn::Dense::zeros(config.policy_hidden, U, nn::Activation::Softmax);

    Rng rng(seed);
    for (nn::ParamRef& ref : net.param_refs()) {
        if (ref.cols == 1) continue;  // biases stay zero
        Eigen::Map<MatrixXd> w(ref.data, ref.rows, ref.cols);
        MatrixXd tmp(ref.rows, ref.cols);
        glorot_fill(tmp, rng);
        w = tmp;
    }
    return net;
}

std::vector<nn::ParamRef> MgpiNetwork::param_refs() {
    return collect_refs(config, N, C, Cself, k1, k2, p1, p2);
}

std::vector<nn::ParamRef> MgpiNetwork::param_refs() const {
    return collect_refs(config, N, C, Cself, k1, k2, p1, p2);
}

MgpiGrads MgpiGrads::zeros(const MgpiNetwork& net) {
    MgpiGrads g;
    const MgpiConfig& cfg = net.config;
    if (cfg.has_social()) {
        g.N = nn::GruGrads::zeros(net.N);
        g.C = nn::GruGrads::zeros(net.C);
    }
    if (cfg.has_self()) g.Cself = nn::GruGrads::zeros(net.Cself);
    if (cfg.has_gate()) {
        g.k1W = MatrixXd::Zero(net.k1.W.rows(), net.k1.W.cols());
        g.k1b = VectorXd::Zero(net.k1.b.size());
        g.k2W = MatrixXd::Zero(net.k2.W.rows(), net.k2.W.cols());
        g.k2b = VectorXd::Zero(net.k2.b.size());
    }
    g.p1W = MatrixXd::Zero(net.p1.W.rows(), net.p1.W.cols());
    g.p1b = VectorXd::Zero(net.p1.b.size());
    g.p2W = MatrixXd::Zero(net.p2.W.rows(), net.p2.W.cols());
    g.p2b = VectorXd::Zero(net.p2.b.size());
    return g;
}

void MgpiGrads::set_zero() {
    auto zero_gru = [](nn::GruGrads& g) {
        if (g.Wz.size() == 0) return;
        g.Wz.setZero();
        g.Wr.setZero();
        g.Wh.setZero();
        g.Uz.setZero();
        g.Ur.setZero();
        g.Uh.setZero();
        g.bz.setZero();
        g.br.setZero();
        g.bh.setZero();
    };
    zero_gru(N);
    zero_gru(C);
    zero_gru(Cself);
    if (k1W.size() > 0) {
        k1W.setZero();
        k1b.setZero();
        k2W.setZero();
        k2b.setZero();
    }
    p1W.setZero();
    p1b.setZero();
    p2W.setZero();
    p2b.setZero();
}

std::vector<nn::ParamRef> MgpiGrads::param_refs(const MgpiConfig& config) {
    std::vector<nn::ParamRef> refs;
    auto push_gru = [&](const std::string& prefix, nn::GruGrads& g) {
        auto add = [&](const std::string& n, MatrixXd& m) {
            refs.push_back({prefix + "." + n, m.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols())});
        };
        auto addb = [&](const std::string& n, VectorXd& v) {
            refs.push_back({prefix + "." + n, v.data(), static_cast<int>(v.size()), 1});
        };
        add("W_z", g.Wz);
        add("W_r", g.Wr);
        add("W_h", g.Wh);
        add("U_z", g.Uz);
        add("U_r", g.Ur);
        add("U_h", g.Uh);
        addb("b_z", g.bz);
        addb("b_r", g.br);
        addb("b_h", g.bh);
    };
    auto push_dense = [&](const std::string& prefix, MatrixXd& W, VectorXd& b) {
        refs.push_back({prefix + ".weight", W.data(), static_cast<int>(W.rows()), static_cast<int>(W.cols())});
        refs.push_back({prefix + ".bias", b.data(), static_cast<int>(b.size()), 1});
    };
    if (config.has_social()) {
        push_gru("N", N);
        push_gru("C", C);
    }
    if (config.has_self()) push_gru("Cself", Cself);
    if (config.has_gate()) {
        push_dense("K.layer1", k1W, k1b);
        push_dense("K.layer2", k2W, k2b);
    }
    push_dense("pi.layer1", p1W, p1b);
    push_dense("pi.layer2", p2W, p2b);
    return refs;
}

double kpm_gate(const MgpiNetwork& net, const RelativeObservation& rel) {
    if (!net.config.has_gate()) throw std::logic_error("kpm_gate: variant has no gate");
    VectorXd in(4);
    in << rel.rel_gaze.x, rel.rel_gaze.y, rel.rel_pos.x, rel.rel_pos.y;
    return nn::dense_forward(net.k2, nn::dense_forward(net.k1, in))(0);
}

VectorXd encode_neighbor(const MgpiNetwork& net, const MatrixXd& P_hist, const MatrixXd& D_hist) {
    const int Hd = net.config.encoder_hidden;
    const VectorXd h0 = VectorXd::Zero(Hd);
    VectorXd out(2 * Hd);
    out.head(Hd) = nn::gru_forward(net.N, P_hist, h0);
    out.tail(Hd) = nn::gru_forward(net.C, D_hist, h0);
    return out;
}

PooledSignal pool_signals(const std::vector<VectorXd>& messages) {
    PooledSignal out;
    if (messages.empty()) {
        out.empty = true;
        out.value = VectorXd::Zero(0);
        return out;
    }
    out.value = VectorXd::Zero(messages.front().size());
    for (const VectorXd& m : messages) {
        if (m.size() != out.value.size()) throw std::invalid_argument("pool_signals: length mismatch");
        out.value += m;
    }
    out.value /= static_cast<double>(messages.size());
    return out;
}

int socpool_cell_index(const MgpiConfig& config, double raw_x, double raw_y) {
    const int n = config.socpool_grid;
    const double half = 0.5 * n * config.socpool_cell;
    const int cx = static_cast<int>(std::floor((raw_x + half) / config.socpool_cell));
    const int cy = static_cast<int>(std::floor((raw_y + half) / config.socpool_cell));
    if (cx < 0 || cx >= n || cy < 0 || cy >= n) return -1;
    return cy * n + cx;
}

VectorXd forward(const MgpiNetwork& net, const AgentState& state) {
    const MgpiConfig& cfg = net.config;
    if (state.horizon != cfg.horizon)
        throw std::invalid_argument("forward: state horizon differs from config");
    if (state.num_actions() != cfg.num_actions)
        throw std::invalid_argument("forward: state action count differs from config");

    const int Hd = cfg.encoder_hidden;
    const int W = cfg.message_width();
    VectorXd social;

    if (cfg.has_social()) {
        const int J = state.num_neighbors();
        if (cfg.variant == Variant::Socpool) {
            social = VectorXd::Zero(static_cast<Eigen::Index>(W) * cfg.socpool_grid * cfg.socpool_grid);
            std::vector<int> counts(static_cast<std::size_t>(cfg.socpool_grid * cfg.socpool_grid), 0);
            for (int j = 0; j < J; ++j) {
                const auto& pos = state.pos_hist[static_cast<std::size_t>(j)];
                const int cell = socpool_cell_index(cfg, pos(0, cfg.horizon - 1) * cfg.position_scale,
                                                    pos(1, cfg.horizon - 1) * cfg.position_scale);
                if (cell < 0) continue;
                MatrixXd P(4, cfg.horizon);
                P.topRows(2) = state.gaze_hist[static_cast<std::size_t>(j)];
                P.bottomRows(2) = state.pos_hist[static_cast<std::size_t>(j)];
                social.segment(static_cast<Eigen::Index>(cell) * W, W) +=
                    encode_neighbor(net, P, state.action_hist[static_cast<std::size_t>(j)]);
                counts[static_cast<std::size_t>(cell)] += 1;
            }
            for (std::size_t cell = 0; cell < counts.size(); ++cell) {
                if (counts[cell] > 1)
                    social.segment(static_cast<Eigen::Index>(cell) * W, W) /= counts[cell];
            }
        } else {
            std::vector<VectorXd> messages;
            messages.reserve(static_cast<std::size_t>(J));
            for (int j = 0; j < J; ++j) {
                MatrixXd P(4, cfg.horizon);
                P.topRows(2) = state.gaze_hist[static_cast<std::size_t>(j)];
                P.bottomRows(2) = state.pos_hist[static_cast<std::size_t>(j)];
                VectorXd msg = encode_neighbor(net, P, state.action_hist[static_cast<std::size_t>(j)]);
                if (cfg.has_gate()) {
                    RelativeObservation rel;
                    rel.rel_gaze = {state.gaze_hist[static_cast<std::size_t>(j)](0, cfg.horizon - 1),
                                    state.gaze_hist[static_cast<std::size_t>(j)](1, cfg.horizon - 1)};
                    rel.rel_pos = {state.pos_hist[static_cast<std::size_t>(j)](0, cfg.horizon - 1),
                                   state.pos_hist[static_cast<std::size_t>(j)](1, cfg.horizon - 1)};
                    msg *= kpm_gate(net, rel);
                }
                messages.push_back(std::move(msg));
            }
            PooledSignal pooled = pool_signals(messages);
            social = pooled.empty ? VectorXd::Zero(W) : pooled.value;
        }
    }

    VectorXd self;
    if (cfg.has_self())
        self = nn::gru_forward(net.Cself, state.self_hist, VectorXd::Zero(Hd));

    VectorXd polin(cfg.policy_input_width());
    switch (cfg.variant) {
        case Variant::Mgpi:
        case Variant::Eqpool:
        case Variant::Socpool:
            polin << social, self;
            break;
        case Variant::Nso: polin = social; break;
        case Variant::Sso: polin = self; break;
    }
    return nn::dense_forward(net.p2, nn::dense_forward(net.p1, polin));
}

std::vector<VectorXd> batch_forward(const MgpiNetwork& net, const std::vector<AgentState>& states) {
    std::vector<VectorXd> out;
    out.reserve(states.size());
    for (const AgentState& s : states) out.push_back(forward(net, s));
    return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json doc;
    doc["format_version"] = 1;
    const MgpiConfig& c = ckpt.net.config;
    doc["config"] = {{"variant", variant_name(c.variant)},
                     {"horizon", c.horizon},
                     {"num_actions", c.num_actions},
                     {"encoder_hidden", c.encoder_hidden},
                     {"gate_hidden", c.gate_hidden},
                     {"policy_hidden", c.policy_hidden},
                     {"position_scale", c.position_scale},
                     {"socpool_grid", c.socpool_grid},
                     {"socpool_cell", c.socpool_cell},
                     {"neighbors", ckpt.neighbors},
                     {"scenario", scenario_name(ckpt.scenario)}};
    json params = json::object();
    for (const nn::ParamRef& ref : ckpt.net.param_refs()) {
        const nn::ParamArray arr = nn::to_param_array(ref);
        params[arr.name] = {{"shape", arr.shape}, {"data", arr.data}};
    }
    doc["params"] = params;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    json doc;
    in >> doc;
    if (doc.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint format_version");

    const json& jc = doc.at("config");
    MgpiConfig cfg;
    cfg.variant = variant_from_name(jc.at("variant").get<std::string>());
    cfg.horizon = jc.at("horizon").get<int>();
    cfg.num_actions = jc.at("num_actions").get<int>();
    cfg.encoder_hidden = jc.at("encoder_hidden").get<int>();
    cfg.gate_hidden = jc.at("gate_hidden").get<int>();
    cfg.policy_hidden = jc.at("policy_hidden").get<int>();
    cfg.position_scale = jc.at("position_scale").get<double>();
    cfg.socpool_grid = jc.at("socpool_grid").get<int>();
    cfg.socpool_cell = jc.at("socpool_cell").get<double>();

    Checkpoint ckpt;
    ckpt.net = MgpiNetwork::create(cfg, 0);
    ckpt.neighbors = jc.at("neighbors").get<int>();
    ckpt.scenario = scenario_from_name(jc.at("scenario").get<std::string>());

    const json& params = doc.at("params");
    for (nn::ParamRef& ref : ckpt.net.param_refs()) {
        if (!params.contains(ref.name))
            throw std::runtime_error("checkpoint missing parameter " + ref.name);
        nn::ParamArray arr;
        arr.name = ref.name;
        arr.shape = params[ref.name].at("shape").get<std::vector<int>>();
        arr.data = params[ref.name].at("data").get<std::vector<double>>();
        nn::from_param_array(arr, ref);
    }
    return ckpt;
}

}  // namespace mgpi::model
