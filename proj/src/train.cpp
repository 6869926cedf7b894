#include "rrl/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "rrl/rng.hpp"

namespace rrl {

namespace {

std::vector<LogicalLayerParams> binarized_layers(const RRLModel& model) {
    std::vector<LogicalLayerParams> out;
    out.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        LogicalLayerParams b = layer;
        for (double& w : b.w_conj.data) w = w > 0.5 ? 1.0 : 0.0;
        for (double& w : b.w_disj.data) w = w > 0.5 ? 1.0 : 0.0;
        out.push_back(std::move(b));
    }
    return out;
}

void check_finite(const Gradients& grads) {
    for (std::size_t l = 0; l < grads.w_conj.size(); ++l) {
        for (double g : grads.w_conj[l].data) {
            if (!std::isfinite(g)) {
                throw TrainError("non-finite gradient in logical layer " +
                                 std::to_string(l + 1) + " (conjunction weights)");
            }
        }
        for (double g : grads.w_disj[l].data) {
            if (!std::isfinite(g)) {
                throw TrainError("non-finite gradient in logical layer " +
                                 std::to_string(l + 1) + " (disjunction weights)");
            }
        }
    }
    for (double g : grads.linear_w.data) {
        if (!std::isfinite(g)) throw TrainError("non-finite gradient in linear layer");
    }
    for (double g : grads.linear_b) {
        if (!std::isfinite(g)) throw TrainError("non-finite gradient in linear bias");
    }
}

void adam_tensor(std::span<double> theta, std::span<const double> grad,
                 std::vector<double>& m, std::vector<double>& v,
                 const AdamState& s, double lr) {
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
        theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.stab);
    }
}

double run_step(RRLModel& model, AdamState& state, const EncodedDataset& ds,
                std::span<const std::size_t> indices, double lr, double lambda,
                TrainerKind kind, Gradients& grads) {
    const double batch_loss =
        compute_gradients(model, ds, indices, kind, lambda, grads);
    ++state.step;
    adam_update(model, state, grads, lr);
    clamp_logical_weights(model);
    return batch_loss;
}

}  // namespace

AdamState AdamState::init(const RRLModel& model) {
    AdamState s;
    for (const auto& layer : model.layers) {
        s.m.emplace_back(layer.w_conj.data.size(), 0.0);
        s.m.emplace_back(layer.w_disj.data.size(), 0.0);
    }
    s.m.emplace_back(model.linear_w.data.size(), 0.0);
    s.m.emplace_back(model.linear_b.size(), 0.0);
    s.v = s.m;
    return s;
}

Gradients Gradients::init(const RRLModel& model) {
    Gradients g;
    for (const auto& layer : model.layers) {
        g.w_conj.emplace_back(layer.w_conj.rows, layer.w_conj.cols);
        g.w_disj.emplace_back(layer.w_disj.rows, layer.w_disj.cols);
    }
    g.linear_w = Matrix(model.linear_w.rows, model.linear_w.cols);
    g.linear_b.assign(model.linear_b.size(), 0.0);
    return g;
}

void Gradients::zero() {
    for (auto& m : w_conj) m.fill(0.0);
    for (auto& m : w_disj) m.fill(0.0);
    linear_w.fill(0.0);
    linear_b.assign(linear_b.size(), 0.0);
}

double compute_gradients(const RRLModel& model, const EncodedDataset& ds,
                         std::span<const std::size_t> indices,
                         TrainerKind kind, double lambda, Gradients& grads) {
    if (indices.empty()) throw TrainError("empty batch");
    grads.zero();

    const DiscreteWeights disc = binarize_params(model);
    // STE evaluates the backward formulas at the binarized parameter point.
    std::vector<LogicalLayerParams> ste_layers;
    if (kind == TrainerKind::Ste) ste_layers = binarized_layers(model);
    const std::span<const LogicalLayerParams> fwd_layers =
        kind == TrainerKind::Ste ? std::span<const LogicalLayerParams>(ste_layers)
                                 : std::span<const LogicalLayerParams>(model.layers);

    const std::size_t n_cls = model.n_classes();
    const std::size_t n_layers = model.layers.size();
    const std::size_t m_cont = model.schema.n_continuous();
    const double inv_batch = 1.0 / static_cast<double>(indices.size());

    std::vector<LayerGradients> layer_grads;
    for (const auto& layer : fwd_layers) layer_grads.emplace_back(layer);

    double ce_sum = 0.0;
    std::vector<double> g_logits(n_cls);
    for (const std::size_t row : indices) {
        const ForwardTrace trace = forward_with_layers(
            model, fwd_layers, disc, {ds.c.row(row), m_cont}, ds.b_row(row));
        const int label = ds.labels[row];
        ce_sum += cross_entropy(trace.logits_discrete, label);

        // dL/dȲ at the discrete logits, scaled for the batch mean.
        const std::vector<double> p = softmax(trace.logits_discrete);
        for (std::size_t cls = 0; cls < n_cls; ++cls) {
            g_logits[cls] = (p[cls] - (static_cast<int>(cls) == label ? 1.0 : 0.0)) *
                            inv_batch;
        }

        // Linear head: grad wrt weights uses the continuous-path inputs.
        for (std::size_t cls = 0; cls < n_cls; ++cls) {
            grads.linear_b[cls] += g_logits[cls];
            double* gw = grads.linear_w.row(cls);
            const auto& concat = trace.continuous_concat;
            for (std::size_t j = 0; j < concat.size(); ++j) {
                gw[j] += g_logits[cls] * concat[j];
            }
        }

        // Gradient reaching each layer's output segment of the skip concat.
        std::size_t col = 0;
        std::vector<std::vector<double>> seg_grad(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l) {
            seg_grad[l].assign(fwd_layers[l].n_out(), 0.0);
            for (std::size_t i = 0; i < seg_grad[l].size(); ++i, ++col) {
                double acc = 0.0;
                for (std::size_t cls = 0; cls < n_cls; ++cls) {
                    acc += g_logits[cls] * model.linear_w.at(cls, col);
                }
                seg_grad[l][i] = acc;
            }
        }

        for (std::size_t l = n_layers; l-- > 0;) {
            layer_backward(fwd_layers[l], trace.layer_acts[l], seg_grad[l],
                           layer_grads[l]);
            if (l > 0) {
                for (std::size_t i = 0; i < layer_grads[l].input.size(); ++i) {
                    seg_grad[l - 1][i] += layer_grads[l].input[i];
                }
                layer_grads[l].input.assign(layer_grads[l].input.size(), 0.0);
            }
        }
    }

    for (std::size_t l = 0; l < n_layers; ++l) {
        grads.w_conj[l] = std::move(layer_grads[l].w_conj);
        grads.w_disj[l] = std::move(layer_grads[l].w_disj);
    }

    // L2 pulls the continuous weights toward 0 (shorter rules); applied to
    // the true parameters for both trainer kinds.
    if (lambda != 0.0) {
        for (std::size_t l = 0; l < n_layers; ++l) {
            for (std::size_t i = 0; i < grads.w_conj[l].data.size(); ++i) {
                grads.w_conj[l].data[i] += 2.0 * lambda * model.layers[l].w_conj.data[i];
            }
            for (std::size_t i = 0; i < grads.w_disj[l].data.size(); ++i) {
                grads.w_disj[l].data[i] += 2.0 * lambda * model.layers[l].w_disj.data[i];
            }
        }
    }

    check_finite(grads);
    return ce_sum * inv_batch + lambda * l2_penalty(model);
}

void adam_update(RRLModel& model, AdamState& state, const Gradients& grads,
                 double lr) {
    std::size_t t = 0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        adam_tensor(model.layers[l].w_conj.data, grads.w_conj[l].data,
                    state.m[t], state.v[t], state, lr);
        ++t;
        adam_tensor(model.layers[l].w_disj.data, grads.w_disj[l].data,
                    state.m[t], state.v[t], state, lr);
        ++t;
    }
    adam_tensor(model.linear_w.data, grads.linear_w.data, state.m[t], state.v[t],
                state, lr);
    ++t;
    adam_tensor(model.linear_b, grads.linear_b, state.m[t], state.v[t], state, lr);
}

void clamp_logical_weights(RRLModel& model) {
    for (auto& layer : model.layers) {
        for (double& w : layer.w_conj.data) w = clamp01(w);
        for (double& w : layer.w_disj.data) w = clamp01(w);
    }
}

double grafted_step(RRLModel& model, AdamState& state, const EncodedDataset& ds,
                    std::span<const std::size_t> indices, double lr,
                    double lambda) {
    Gradients grads = Gradients::init(model);
    return run_step(model, state, ds, indices, lr, lambda, TrainerKind::Grafting,
                    grads);
}

double ste_step(RRLModel& model, AdamState& state, const EncodedDataset& ds,
                std::span<const std::size_t> indices, double lr, double lambda) {
    Gradients grads = Gradients::init(model);
    return run_step(model, state, ds, indices, lr, lambda, TrainerKind::Ste,
                    grads);
}

TrainLog fit(RRLModel& model, const EncodedDataset& train,
             const TrainConfig& config) {
    if (config.lr <= 0.0) throw TrainError("learning rate must be positive");
    if (config.batch_size < 1) throw TrainError("batch size must be >= 1");
    if (config.epochs < 1) throw TrainError("epochs must be >= 1");

    // Optional stratified validation holdout.
    std::vector<std::size_t> train_idx, valid_idx;
    if (config.valid_fraction > 0.0) {
        std::vector<std::vector<std::size_t>> by_class(train.n_classes());
        for (std::size_t i = 0; i < train.size(); ++i) {
            by_class[train.labels[i]].push_back(i);
        }
        Rng rng(mix_seed(config.seed, 0xa11d));
        for (auto& members : by_class) {
            rng.shuffle(members);
            const auto n_valid = static_cast<std::size_t>(
                config.valid_fraction * static_cast<double>(members.size()));
            for (std::size_t i = 0; i < members.size(); ++i) {
                (i < n_valid ? valid_idx : train_idx).push_back(members[i]);
            }
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(valid_idx.begin(), valid_idx.end());
    } else {
        train_idx.resize(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) train_idx[i] = i;
    }
    const EncodedDataset valid_ds =
        valid_idx.empty() ? EncodedDataset{} : train.subset(valid_idx);

    AdamState state = AdamState::init(model);
    Gradients grads = Gradients::init(model);
    TrainLog log;

    const EncodedDataset train_view = train.subset(train_idx);
    std::vector<std::size_t> order = train_idx;
    std::vector<int> train_truth(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        train_truth[i] = train.labels[train_idx[i]];
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr =
            config.lr *
            std::pow(config.lr_decay, epoch / std::max(1, config.lr_decay_period));

        Rng shuffle_rng(mix_seed(config.seed, 0x9000u + static_cast<std::uint64_t>(epoch)));
        order = train_idx;
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t len = std::min<std::size_t>(config.batch_size,
                                                          order.size() - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            const double batch_loss =
                compute_gradients(model, train, batch, config.trainer,
                                  config.lambda, grads);
            ++state.step;
            adam_update(model, state, grads, lr);
            clamp_logical_weights(model);
            loss_sum += batch_loss * static_cast<double>(len);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss_discrete = loss_sum / static_cast<double>(order.size());
        rec.lr = lr;
        rec.f1_train = std::numeric_limits<double>::quiet_NaN();
        rec.f1_valid = std::numeric_limits<double>::quiet_NaN();
        const bool log_metrics = config.log_every > 0 &&
                                 (epoch % config.log_every == 0 ||
                                  epoch + 1 == config.epochs);
        if (log_metrics) {
            const DiscreteWeights disc = binarize_params(model);
            const std::vector<int> pred = predict(model, disc, train_view);
            rec.f1_train = macro_f1(pred, train_truth, train.n_classes());
            if (!valid_idx.empty()) {
                const std::vector<int> vp = predict(model, disc, valid_ds);
                rec.f1_valid = macro_f1(vp, valid_ds.labels, train.n_classes());
            }
        }
        rec.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        log.records.push_back(rec);
    }
    return log;
}

void TrainLog::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw TrainError("cannot write train log: " + path);
    out << "epoch,loss_discrete,f1_train,f1_valid,lr\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                      r.loss_discrete, r.f1_train, r.f1_valid, r.lr);
        out << buf;
    }
}

}  // namespace rrl
