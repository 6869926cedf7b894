#include "rrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rrl/rng.hpp"

namespace rrl {

namespace {

constexpr int kFormatVersion = 1;

void append_layer_input(const RRLModel& model,
                        std::span<const double> c_row,
                        const std::uint8_t* b_row, ForwardTrace& trace) {
    const std::size_t bin_width = model.bounds.output_width();
    const std::size_t b_width = model.schema.binary_width();
    const std::size_t u0_width = bin_width + b_width;

    trace.u0.resize(u0_width);
    binarize(model.bounds, c_row, trace.u0.data());
    for (std::size_t j = 0; j < b_width; ++j) {
        trace.u0[bin_width + j] = b_row[j] ? 1.0 : 0.0;
    }

    trace.u0_bits = BitVec(u0_width);
    binarize_bits(model.bounds, c_row, trace.u0_bits, 0);
    for (std::size_t j = 0; j < b_width; ++j) {
        if (b_row[j]) trace.u0_bits.set(bin_width + j, true);
    }
}

void linear_head(const RRLModel& model, const std::vector<double>& concat,
                 std::vector<double>& logits) {
    const std::size_t n_cls = model.n_classes();
    logits.resize(n_cls);
    for (std::size_t cls = 0; cls < n_cls; ++cls) {
        double acc = model.linear_b[cls];
        const double* w = model.linear_w.row(cls);
        for (std::size_t j = 0; j < concat.size(); ++j) acc += w[j] * concat[j];
        logits[cls] = acc;
    }
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        rows.push_back(std::vector<double>(m.row(i), m.row(i) + m.cols));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m;
    m.rows = j.size();
    m.cols = m.rows ? j.at(0).size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : j) {
        if (row.size() != m.cols) throw ModelError("ragged weight matrix");
        for (const auto& v : row) m.data.push_back(v.get<double>());
    }
    return m;
}

}  // namespace

void validate_config(const RRLConfig& config, const DatasetSchema& schema) {
    if (config.layer_nodes.empty()) {
        throw ModelError("config needs at least one logical layer");
    }
    for (std::size_t n : config.layer_nodes) {
        if (n < 2 || n % 2 != 0) {
            throw ModelError("logical layer widths must be even and >= 2");
        }
    }
    if (config.bounds_per_side == 0) throw ModelError("bounds_per_side must be >= 1");
    if (!(config.eps >= 0.0)) throw ModelError("eps must be >= 0");
    if (schema.n_classes() < 2) throw ModelError("need at least two classes");
}

DiscreteWeights binarize_params(const RRLModel& model) {
    DiscreteWeights disc;
    disc.layers.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        disc.layers.push_back(pack_discrete(layer));
    }
    return disc;
}

RRLModel build(const RRLConfig& config, const EncodedDataset& train) {
    validate_config(config, train.schema);

    RRLModel model;
    model.config = config;
    model.schema = train.schema;
    model.bounds = sample_bounds(train.c, config.bounds_per_side,
                                 mix_seed(config.seed, 0xb0u));

    Rng rng(mix_seed(config.seed, 0x11u));
    std::size_t prev_width = model.input_width();
    std::size_t linear_width = 0;
    for (std::size_t n_nodes : config.layer_nodes) {
        LogicalLayerParams layer;
        layer.eps = config.eps;
        layer.derivative_trick = config.derivative_trick;
        layer.w_conj = Matrix(n_nodes / 2, prev_width);
        layer.w_disj = Matrix(n_nodes / 2, prev_width);
        for (double& w : layer.w_conj.data) w = rng.uniform(0.0, 0.1);
        for (double& w : layer.w_disj.data) w = rng.uniform(0.0, 0.1);
        model.layers.push_back(std::move(layer));
        prev_width = n_nodes;
        linear_width += n_nodes;
    }

    const std::size_t n_cls = train.n_classes();
    const double scale = 1.0 / std::sqrt(static_cast<double>(linear_width));
    model.linear_w = Matrix(n_cls, linear_width);
    for (double& w : model.linear_w.data) w = rng.uniform(-scale, scale);
    model.linear_b.assign(n_cls, 0.0);
    return model;
}

ForwardTrace forward_with_layers(const RRLModel& model,
                                 std::span<const LogicalLayerParams> layers,
                                 const DiscreteWeights& disc,
                                 std::span<const double> c_row,
                                 const std::uint8_t* b_row) {
    if (c_row.size() != model.schema.n_continuous()) {
        throw ModelError("continuous width mismatch in forward");
    }
    ForwardTrace trace;
    append_layer_input(model, c_row, b_row, trace);

    trace.continuous_concat.reserve(model.linear_input_width());
    trace.discrete_concat.reserve(model.linear_input_width());

    std::span<const double> u_cont(trace.u0);
    const BitVec* u_bits = &trace.u0_bits;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        trace.layer_acts.push_back(layer_forward_continuous(layers[l], u_cont));
        u_cont = trace.layer_acts.back().out;
        trace.continuous_concat.insert(trace.continuous_concat.end(),
                                       u_cont.begin(), u_cont.end());

        trace.discrete_outs.push_back(
            layer_forward_discrete(disc.layers[l], *u_bits));
        u_bits = &trace.discrete_outs.back();
        for (std::size_t i = 0; i < u_bits->n; ++i) {
            trace.discrete_concat.push_back(u_bits->get(i) ? 1.0 : 0.0);
        }
    }

    linear_head(model, trace.continuous_concat, trace.logits_continuous);
    linear_head(model, trace.discrete_concat, trace.logits_discrete);
    return trace;
}

ForwardTrace forward(const RRLModel& model, const DiscreteWeights& disc,
                     std::span<const double> c_row, const std::uint8_t* b_row) {
    return forward_with_layers(model, model.layers, disc, c_row, b_row);
}

void forward_discrete(const RRLModel& model, const DiscreteWeights& disc,
                      std::span<const double> c_row, const std::uint8_t* b_row,
                      std::vector<double>& logits_out) {
    const std::size_t bin_width = model.bounds.output_width();
    const std::size_t b_width = model.schema.binary_width();
    BitVec u(bin_width + b_width);
    binarize_bits(model.bounds, c_row, u, 0);
    for (std::size_t j = 0; j < b_width; ++j) {
        if (b_row[j]) u.set(bin_width + j, true);
    }

    const std::size_t n_cls = model.n_classes();
    logits_out.assign(n_cls, 0.0);
    for (std::size_t cls = 0; cls < n_cls; ++cls) logits_out[cls] = model.linear_b[cls];

    std::size_t col = 0;
    for (std::size_t l = 0; l < disc.layers.size(); ++l) {
        BitVec out = layer_forward_discrete(disc.layers[l], u);
        for (std::size_t i = 0; i < out.n; ++i, ++col) {
            const double v = out.get(i) ? 1.0 : 0.0;
            for (std::size_t cls = 0; cls < n_cls; ++cls) {
                logits_out[cls] += model.linear_w.at(cls, col) * v;
            }
        }
        u = std::move(out);
    }
}

std::vector<int> predict(const RRLModel& model, const DiscreteWeights& disc,
                         const EncodedDataset& ds) {
    std::vector<int> preds(ds.size());
    std::vector<double> logits;
    const std::size_t m = ds.schema.n_continuous();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        forward_discrete(model, disc, {ds.c.row(i), m}, ds.b_row(i), logits);
        preds[i] = static_cast<int>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
    return preds;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double hi = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - hi);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double cross_entropy(std::span<const double> logits, int true_class) {
    const double hi = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - hi);
    return std::log(sum) - (logits[true_class] - hi);
}

double l2_penalty(const RRLModel& model) {
    double sum = 0.0;
    for (const auto& layer : model.layers) {
        for (double w : layer.w_conj.data) sum += w * w;
        for (double w : layer.w_disj.data) sum += w * w;
    }
    return sum;
}

double loss(std::span<const double> logits, int true_class,
            const RRLModel& model, double lambda) {
    return cross_entropy(logits, true_class) + lambda * l2_penalty(model);
}

void save(const RRLModel& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = "rrl-checkpoint";
    j["format_version"] = kFormatVersion;
    j["config"] = {{"layer_nodes", model.config.layer_nodes},
                   {"bounds_per_side", model.config.bounds_per_side},
                   {"eps", model.config.eps},
                   {"lambda", model.config.lambda},
                   {"derivative_trick", model.config.derivative_trick},
                   {"seed", model.config.seed}};
    j["schema_fingerprint"] = model.schema.fingerprint();

    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : model.schema.features) {
        features.push_back(
            {{"name", f.name},
             {"kind", f.kind == FeatureKind::Continuous ? "continuous" : "discrete"},
             {"categories", f.categories}});
    }
    j["schema"] = {{"features", features},
                   {"label_name", model.schema.label_name},
                   {"class_names", model.schema.class_names}};

    j["bounds"] = {{"n_features", model.bounds.n_features},
                   {"k", model.bounds.k},
                   {"seed", model.bounds.seed},
                   {"lower", model.bounds.lower},
                   {"upper", model.bounds.upper}};

    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        layers.push_back({{"eps", layer.eps},
                          {"derivative_trick", layer.derivative_trick},
                          {"w_conj", matrix_to_json(layer.w_conj)},
                          {"w_disj", matrix_to_json(layer.w_disj)}});
    }
    j["layers"] = std::move(layers);
    j["linear_w"] = matrix_to_json(model.linear_w);
    j["linear_b"] = model.linear_b;

    std::ofstream out(path);
    if (!out) throw ModelError("cannot write checkpoint: " + path);
    out << j.dump(1) << '\n';
    if (!out) throw ModelError("failed writing checkpoint: " + path);
}

RRLModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("corrupt checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.at("format") != "rrl-checkpoint") {
            throw ModelError("not an rrl checkpoint: " + path);
        }
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw ModelError("unsupported checkpoint version " +
                             j.at("format_version").dump() + " in " + path);
        }

        RRLModel model;
        const auto& jc = j.at("config");
        model.config.layer_nodes =
            jc.at("layer_nodes").get<std::vector<std::size_t>>();
        model.config.bounds_per_side = jc.at("bounds_per_side").get<std::size_t>();
        model.config.eps = jc.at("eps").get<double>();
        model.config.lambda = jc.at("lambda").get<double>();
        model.config.derivative_trick = jc.at("derivative_trick").get<bool>();
        model.config.seed = jc.at("seed").get<std::uint64_t>();

        const auto& js = j.at("schema");
        for (const auto& jf : js.at("features")) {
            FeatureDesc f;
            f.name = jf.at("name").get<std::string>();
            f.kind = jf.at("kind") == "continuous" ? FeatureKind::Continuous
                                                   : FeatureKind::Discrete;
            f.categories = jf.at("categories").get<std::vector<std::string>>();
            model.schema.features.push_back(std::move(f));
        }
        model.schema.label_name = js.at("label_name").get<std::string>();
        model.schema.class_names =
            js.at("class_names").get<std::vector<std::string>>();

        if (j.at("schema_fingerprint").get<std::uint64_t>() !=
            model.schema.fingerprint()) {
            throw ModelError("schema fingerprint mismatch in " + path);
        }

        const auto& jb = j.at("bounds");
        model.bounds.n_features = jb.at("n_features").get<std::size_t>();
        model.bounds.k = jb.at("k").get<std::size_t>();
        model.bounds.seed = jb.at("seed").get<std::uint64_t>();
        model.bounds.lower = jb.at("lower").get<std::vector<double>>();
        model.bounds.upper = jb.at("upper").get<std::vector<double>>();

        for (const auto& jl : j.at("layers")) {
            LogicalLayerParams layer;
            layer.eps = jl.at("eps").get<double>();
            layer.derivative_trick = jl.at("derivative_trick").get<bool>();
            layer.w_conj = matrix_from_json(jl.at("w_conj"));
            layer.w_disj = matrix_from_json(jl.at("w_disj"));
            model.layers.push_back(std::move(layer));
        }
        model.linear_w = matrix_from_json(j.at("linear_w"));
        model.linear_b = j.at("linear_b").get<std::vector<double>>();

        // Structural sanity before handing the model out.
        std::size_t prev = model.input_width();
        std::size_t linear_width = 0;
        for (const auto& layer : model.layers) {
            if (layer.w_conj.cols != prev || layer.w_disj.cols != prev ||
                layer.w_conj.rows != layer.w_disj.rows) {
                throw ModelError("inconsistent layer shapes in " + path);
            }
            prev = layer.n_out();
            linear_width += layer.n_out();
        }
        if (model.linear_w.cols != linear_width ||
            model.linear_w.rows != model.linear_b.size()) {
            throw ModelError("inconsistent linear shapes in " + path);
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("corrupt checkpoint " + path + ": " + e.what());
    }
}

}  // namespace rrl
