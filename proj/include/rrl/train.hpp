#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrl/dataset.hpp"
#include "rrl/model.hpp"

namespace rrl {

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TrainerKind { Grafting, Ste };

struct TrainConfig {
    double lr = 2e-3;
    int epochs = 400;
    int batch_size = 32;
    double lr_decay = 0.75;
    int lr_decay_period = 100;  // epochs between decays
    double lambda = 0.0;
    std::uint64_t seed = 0;
    TrainerKind trainer = TrainerKind::Grafting;
    int log_every = 1;             // F1 cadence; loss is logged every epoch
    double valid_fraction = 0.0;   // e.g. 0.05 when tuning
};

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double stab = 1e-8;
    long step = 0;
    // Tensor order: per layer w_conj, w_disj; then linear_w, linear_b.
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState init(const RRLModel& model);
};

struct Gradients {
    std::vector<Matrix> w_conj;  // per layer
    std::vector<Matrix> w_disj;
    Matrix linear_w;
    std::vector<double> linear_b;

    static Gradients init(const RRLModel& model);
    void zero();
};

struct EpochRecord {
    int epoch = 0;
    double loss_discrete = 0.0;
    double f1_train = 0.0;
    double f1_valid = 0.0;  // NaN when no validation split
    double lr = 0.0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> records;
    void to_csv(const std::string& path) const;
};

// Gradient Grafting: the loss gradient is taken at the discrete model's
// output (softmax(Ȳ) - y) and backpropagated through the continuous graph.
// The STE variant backpropagates through the continuous formulas evaluated
// at the binarized weights instead. Returns the batch loss
// (mean cross-entropy of Ȳ plus lambda * sum(Ŵ^2)) and accumulates the
// batch-mean gradients into `grads` (zeroed here).
double compute_gradients(const RRLModel& model, const EncodedDataset& ds,
                         std::span<const std::size_t> indices,
                         TrainerKind kind, double lambda, Gradients& grads);

void adam_update(RRLModel& model, AdamState& state, const Gradients& grads,
                 double lr);

// Projection back to the box [0,1] after each optimizer step.
void clamp_logical_weights(RRLModel& model);

double grafted_step(RRLModel& model, AdamState& state, const EncodedDataset& ds,
                    std::span<const std::size_t> indices, double lr,
                    double lambda);

double ste_step(RRLModel& model, AdamState& state, const EncodedDataset& ds,
                std::span<const std::size_t> indices, double lr, double lambda);

// Full optimization loop: per-epoch seeded shuffles, mini-batches,
// learning-rate decay, optional stratified validation holdout, per-epoch
// discrete-loss/F1 logging. The model is trained in place.
TrainLog fit(RRLModel& model, const EncodedDataset& train,
             const TrainConfig& config);

}  // namespace rrl
