#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrl/binarization.hpp"
#include "rrl/dataset.hpp"
#include "rrl/logic.hpp"
#include "rrl/matrix.hpp"

namespace rrl {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RRLConfig {
    std::vector<std::size_t> layer_nodes;  // logical layer widths, each even
    std::size_t bounds_per_side = 5;       // k
    double eps = 1e-10;
    double lambda = 0.0;  // L2 coefficient on logical weights
    bool derivative_trick = false;
    std::uint64_t seed = 0;
};

// Binarization layer + logical layer stack + linear head. Logical weights
// live in [0,1] and the discrete model is their strict-0.5 threshold view;
// the linear layer stays continuous in both. The linear head consumes the
// concatenation of every logical layer's output (skip connections), so its
// input width is sum(layer_nodes).
struct RRLModel {
    RRLConfig config;
    DatasetSchema schema;
    BinarizationBounds bounds;
    std::vector<LogicalLayerParams> layers;
    Matrix linear_w;               // M x D
    std::vector<double> linear_b;  // M

    std::size_t n_classes() const { return linear_b.size(); }
    std::size_t input_width() const {
        return bounds.output_width() + schema.binary_width();
    }
    std::size_t linear_input_width() const { return linear_w.cols; }
};

// Thresholded (q(θ)) view of the logical weights, packed for evaluation.
struct DiscreteWeights {
    std::vector<PackedLayerWeights> layers;
};

DiscreteWeights binarize_params(const RRLModel& model);

struct ForwardTrace {
    std::vector<double> u0;  // binarize(C) ⊕ B as 0.0/1.0
    BitVec u0_bits;
    std::vector<LayerActivations> layer_acts;  // continuous path
    std::vector<BitVec> discrete_outs;         // exact Boolean path
    std::vector<double> continuous_concat;     // all layers' û, length D
    std::vector<double> discrete_concat;       // all layers' bits as 0.0/1.0
    std::vector<double> logits_continuous;     // Ŷ
    std::vector<double> logits_discrete;       // Ȳ
};

// Validate config against a dataset; throws ModelError on bad structure.
void validate_config(const RRLConfig& config, const DatasetSchema& schema);

// Samples bounds from the training split and initializes parameters:
// logical weights i.i.d. uniform on [0, 0.1], linear weights uniform on
// [-1/sqrt(D), 1/sqrt(D)], bias zero. Deterministic given config.seed.
RRLModel build(const RRLConfig& config, const EncodedDataset& train);

// Runs both the continuous and the discrete path for one instance.
// `disc` must be binarize_params(model) for the current weights.
ForwardTrace forward(const RRLModel& model, const DiscreteWeights& disc,
                     std::span<const double> c_row, const std::uint8_t* b_row);

// Continuous path evaluated with substitute logical weights (the STE
// trainer passes a binarized copy); discrete path still from `disc`.
ForwardTrace forward_with_layers(const RRLModel& model,
                                 std::span<const LogicalLayerParams> layers,
                                 const DiscreteWeights& disc,
                                 std::span<const double> c_row,
                                 const std::uint8_t* b_row);

// Discrete-path logits only (metrics / prediction loops).
void forward_discrete(const RRLModel& model, const DiscreteWeights& disc,
                      std::span<const double> c_row, const std::uint8_t* b_row,
                      std::vector<double>& logits_out);

std::vector<int> predict(const RRLModel& model, const DiscreteWeights& disc,
                         const EncodedDataset& ds);

std::vector<double> softmax(std::span<const double> logits);

// Numerically stable -ln softmax(logits)[true_class].
double cross_entropy(std::span<const double> logits, int true_class);

// Sum of squared logical-layer weights (the L2 term's body).
double l2_penalty(const RRLModel& model);

// Single-instance loss: cross-entropy plus lambda * sum(Ŵ^2).
double loss(std::span<const double> logits, int true_class,
            const RRLModel& model, double lambda);

// JSON checkpoint; load refuses version or structural mismatches and never
// returns a partially initialized model.
void save(const RRLModel& model, const std::string& path);
RRLModel load(const std::string& path);

}  // namespace rrl
