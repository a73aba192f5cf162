#include "stef/model.hpp"

#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

#include "stef/io.hpp"

namespace stef {

using nlohmann::json;

void StefConfig::validate() const {
    auto positive = [](int64_t v, const char* name) {
        if (v < 1)
            throw std::invalid_argument("StefConfig: " + std::string(name) + " must be positive, got " +
                                        std::to_string(v));
    };
    positive(L, "L");
    positive(W, "W");
    positive(H, "H");
    positive(K, "K");
    positive(M, "M");
    positive(d, "d");
    positive(u, "u");
}

std::vector<Tensor> ModelParams::trainable() {
    std::vector<Tensor> out = {conv1_k, conv1_b, bn1.gamma, bn1.beta,
                               conv2_k, conv2_b, bn2.gamma, bn2.beta};
    for (DenseParams& dp : dense1) {
        out.push_back(dp.w);
        out.push_back(dp.b);
    }
    out.push_back(lstm.w_ih);
    out.push_back(lstm.w_hh);
    out.push_back(lstm.bias);
    out.push_back(dense2.w);
    out.push_back(dense2.b);
    return out;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named_arrays() {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("conv1.kernels", conv1_k);
    out.emplace_back("conv1.bias", conv1_b);
    out.emplace_back("bn1.gamma", bn1.gamma);
    out.emplace_back("bn1.beta", bn1.beta);
    out.emplace_back("bn1.running_mean", bn1.running_mean);
    out.emplace_back("bn1.running_var", bn1.running_var);
    out.emplace_back("conv2.kernels", conv2_k);
    out.emplace_back("conv2.bias", conv2_b);
    out.emplace_back("bn2.gamma", bn2.gamma);
    out.emplace_back("bn2.beta", bn2.beta);
    out.emplace_back("bn2.running_mean", bn2.running_mean);
    out.emplace_back("bn2.running_var", bn2.running_var);
    for (size_t l = 0; l < dense1.size(); ++l) {
        const std::string base = "dense1." + std::to_string(l);
        out.emplace_back(base + ".weights", dense1[l].w);
        out.emplace_back(base + ".bias", dense1[l].b);
    }
    out.emplace_back("lstm.w_ih", lstm.w_ih);
    out.emplace_back("lstm.w_hh", lstm.w_hh);
    out.emplace_back("lstm.bias", lstm.bias);
    out.emplace_back("dense2.weights", dense2.w);
    out.emplace_back("dense2.bias", dense2.b);
    return out;
}

int64_t ModelParams::parameter_count(const StefConfig& c) {
    const int64_t conv1 = 3 * 3 * 1 * c.K + c.K + 2 * c.K;           // kernels + bias + gamma/beta
    const int64_t conv2 = 3 * 3 * c.K * c.K + c.K + 2 * c.K;
    const int64_t dense1 = c.L * (c.flat_width() * c.d + c.d);
    const int64_t lstm = c.d * 4 * c.u + c.u * 4 * c.u + 4 * c.u;
    const int64_t dense2 = c.u * c.N() + c.N();
    return conv1 + conv2 + dense1 + lstm + dense2;
}

ModelParams ModelParams::clone() const {
    ModelParams out;
    out.config = config;
    out.conv1_k = conv1_k.clone();
    out.conv1_b = conv1_b.clone();
    out.bn1 = bn1.clone();
    out.conv2_k = conv2_k.clone();
    out.conv2_b = conv2_b.clone();
    out.bn2 = bn2.clone();
    out.dense1.reserve(dense1.size());
    for (const DenseParams& dp : dense1) out.dense1.push_back({dp.w.clone(), dp.b.clone()});
    out.lstm = {lstm.w_ih.clone(), lstm.w_hh.clone(), lstm.bias.clone()};
    out.dense2 = {dense2.w.clone(), dense2.b.clone()};
    return out;
}

bool ModelParams::all_finite() const {
    for (auto& [name, t] : const_cast<ModelParams*>(this)->named_arrays())
        if (!t.all_finite_values()) return false;
    return true;
}

namespace {

Tensor glorot_uniform(Rng& rng, Shape shape, int64_t fan_in, int64_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace

ModelParams init_params(const StefConfig& config, uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ModelParams p;
    p.config = config;
    const int64_t K = config.K;

    p.conv1_k = glorot_uniform(rng, {3, 3, 1, K}, 9 * 1, 9 * K);
    p.conv1_b = Tensor::zeros({K});
    p.bn1 = BatchNormParams::make(K);
    p.conv2_k = glorot_uniform(rng, {3, 3, K, K}, 9 * K, 9 * K);
    p.conv2_b = Tensor::zeros({K});
    p.bn2 = BatchNormParams::make(K);

    const int64_t Z = config.flat_width();
    for (int64_t l = 0; l < config.L; ++l) {
        DenseParams dp;
        dp.w = glorot_uniform(rng, {Z, config.d}, Z, config.d);
        dp.b = Tensor::zeros({config.d});
        p.dense1.push_back(std::move(dp));
    }

    p.lstm.w_ih = glorot_uniform(rng, {config.d, 4 * config.u}, config.d, 4 * config.u);
    p.lstm.w_hh = glorot_uniform(rng, {config.u, 4 * config.u}, config.u, 4 * config.u);
    p.lstm.bias = Tensor::zeros({4 * config.u});

    p.dense2.w = glorot_uniform(rng, {config.u, config.N()}, config.u, config.N());
    p.dense2.b = Tensor::zeros({config.N()});
    return p;
}

namespace {

void check_stage(const char* stage, const Tensor& t, const Shape& want) {
    if (t.shape() != want)
        throw std::invalid_argument("forward: stage '" + std::string(stage) + "' produced " +
                                    shape_str(t.shape()) + ", expected " + shape_str(want));
}

void trace_stage(ForwardTrace* trace, const char* stage, Shape shape) {
    if (trace) trace->stages.emplace_back(stage, std::move(shape));
}

}  // namespace

Tensor forward(Tape& tape, ModelParams& params, const Tensor& E, const Tensor& F, Mode mode,
               ForwardTrace* trace) {
    const StefConfig& c = params.config;
    c.validate();
    if (E.ndim() != 4 || E.dim(1) != c.L || E.dim(2) != c.W || E.dim(3) != c.H)
        throw std::invalid_argument("forward: demand stack must be [B, " + std::to_string(c.L) +
                                    ", " + std::to_string(c.W) + ", " + std::to_string(c.H) +
                                    "], got " + shape_str(E.shape()));
    const int64_t B = E.dim(0);
    if (F.ndim() != 5 || F.dim(0) != B || F.dim(1) != c.L || F.dim(2) != c.W || F.dim(3) != c.H ||
        F.dim(4) != c.M)
        throw std::invalid_argument("forward: factor stack must be [" + std::to_string(B) + ", " +
                                    std::to_string(c.L) + ", " + std::to_string(c.W) + ", " +
                                    std::to_string(c.H) + ", " + std::to_string(c.M) + "], got " +
                                    shape_str(F.shape()));

    // Lag slices run through the conv stack as independent single-channel
    // images; both kernel sets are shared across lags.
    Tensor x = ops::reshape(tape, E, {B * c.L, c.W, c.H, 1});
    x = ops::conv2d_same(tape, x, params.conv1_k, params.conv1_b);
    x = ops::batch_norm(tape, x, params.bn1, mode);
    x = ops::relu(tape, x);
    x = ops::conv2d_same(tape, x, params.conv2_k, params.conv2_b);
    x = ops::batch_norm(tape, x, params.bn2, mode);
    x = ops::relu(tape, x);
    check_stage("conv_stack", x, {B * c.L, c.W, c.H, c.K});
    Tensor conv_out = ops::reshape(tape, x, {B, c.L, c.W, c.H, c.K});
    trace_stage(trace, "conv_stack", conv_out.shape());

    Tensor fused = ops::concat_last_axis(tape, conv_out, F);
    check_stage("factor_concat", fused, {B, c.L, c.W, c.H, c.K + c.M});
    trace_stage(trace, "factor_concat", fused.shape());

    Tensor flat = ops::reshape(tape, fused, {B, c.L, c.flat_width()});
    trace_stage(trace, "flatten", flat.shape());

    // One dense layer per lag, each with its own weights.
    std::vector<Tensor> lag_features;
    lag_features.reserve(static_cast<size_t>(c.L));
    for (int64_t l = 0; l < c.L; ++l) {
        Tensor lag = ops::select_axis1(tape, flat, l);
        Tensor a = ops::relu(
            tape, ops::dense_affine(tape, lag, params.dense1[static_cast<size_t>(l)].w,
                                    params.dense1[static_cast<size_t>(l)].b));
        check_stage("lag_dense", a, {B, c.d});
        lag_features.push_back(std::move(a));
    }
    trace_stage(trace, "lag_dense", {B, c.L, c.d});

    // Scan oldest lag first so the most recent hour is the last input.
    Tensor h = Tensor::zeros({B, c.u});
    Tensor cell = Tensor::zeros({B, c.u});
    for (int64_t l = c.L - 1; l >= 0; --l) {
        auto [h_next, c_next] =
            ops::lstm_step(tape, lag_features[static_cast<size_t>(l)], h, cell, params.lstm);
        h = std::move(h_next);
        cell = std::move(c_next);
    }
    check_stage("lstm", h, {B, c.u});
    trace_stage(trace, "lstm", h.shape());

    Tensor head = ops::dense_affine(tape, h, params.dense2.w, params.dense2.b);
    check_stage("head", head, {B, c.N()});
    trace_stage(trace, "head", head.shape());

    Tensor out = ops::reshape(tape, head, {B, c.W, c.H});
    trace_stage(trace, "output", out.shape());
    return out;
}

Tensor predict_batch(const ModelParams& params, const Tensor& E, const Tensor& F) {
    if (params.bn1.batches_seen < 1 || params.bn2.batches_seen < 1)
        throw std::invalid_argument(
            "predict_batch: batch-norm running statistics are unpopulated; train first");
    if (!params.all_finite())
        throw std::invalid_argument("predict_batch: parameters contain non-finite values");
    Tape tape;
    // Infer mode never mutates parameters or batch-norm state.
    return forward(tape, const_cast<ModelParams&>(params), E, F, Mode::infer).clone();
}

Tensor predict_batch(const ModelParams& params, const SampleSet& samples) {
    return predict_batch(params, samples.E, samples.F);
}

void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t seed,
                     int64_t trained_epochs, double demand_scale) {
    ModelParams& p = const_cast<ModelParams&>(params);
    json meta = {{"kind", "checkpoint"},
                 {"checkpoint_version", kCheckpointFormatVersion},
                 {"config",
                  {{"L", p.config.L},
                   {"W", p.config.W},
                   {"H", p.config.H},
                   {"K", p.config.K},
                   {"M", p.config.M},
                   {"d", p.config.d},
                   {"u", p.config.u}}},
                 {"seed", seed},
                 {"trained_epochs", trained_epochs},
                 {"demand_scale", demand_scale},
                 {"bn1_batches_seen", p.bn1.batches_seen},
                 {"bn2_batches_seen", p.bn2.batches_seen}};
    std::vector<ContainerArray> arrays;
    for (auto& [name, t] : p.named_arrays())
        arrays.push_back(make_f64_array(name, t.shape(), t.values()));
    write_container(path, meta, arrays);
}

Checkpoint load_checkpoint(const std::string& path) {
    const Container c = read_container(path);
    if (c.header.value("kind", "") != "checkpoint")
        throw std::runtime_error("'" + path + "' is not a checkpoint container (kind='" +
                                 c.header.value("kind", "") + "')");
    const int version = c.header.value("checkpoint_version", -1);
    if (version != kCheckpointFormatVersion)
        throw std::runtime_error("'" + path + "': checkpoint_version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kCheckpointFormatVersion) + ")");
    const json& jc = c.header.at("config");
    StefConfig config;
    config.L = jc.at("L").get<int64_t>();
    config.W = jc.at("W").get<int64_t>();
    config.H = jc.at("H").get<int64_t>();
    config.K = jc.at("K").get<int64_t>();
    config.M = jc.at("M").get<int64_t>();
    config.d = jc.at("d").get<int64_t>();
    config.u = jc.at("u").get<int64_t>();
    config.validate();

    Checkpoint ck;
    ck.params = init_params(config, 0);  // shapes only; overwritten below
    ck.seed = c.header.at("seed").get<uint64_t>();
    ck.trained_epochs = c.header.at("trained_epochs").get<int64_t>();
    ck.demand_scale = c.header.value("demand_scale", 1.0);
    ck.params.bn1.batches_seen = c.header.value("bn1_batches_seen", static_cast<int64_t>(0));
    ck.params.bn2.batches_seen = c.header.value("bn2_batches_seen", static_cast<int64_t>(0));

    for (auto& [name, t] : ck.params.named_arrays()) {
        const ContainerArray& a = c.get(name);
        if (a.dtype != "f64")
            throw std::runtime_error("'" + path + "': array '" + name + "' has dtype '" + a.dtype +
                                     "', expected f64");
        if (a.shape != t.shape())
            throw std::runtime_error("'" + path + "': array '" + name + "' has shape " +
                                     shape_str(a.shape) + " but the header config implies " +
                                     shape_str(t.shape()));
        std::memcpy(t.data(), a.bytes.data(), a.bytes.size());
    }
    return ck;
}

}  // namespace stef
