#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrl/matrix.hpp"

namespace rrl {

// Raised for malformed files, schema mismatches, or bad cell values.
// The CLI maps it to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FeatureKind { Continuous, Discrete };

struct FeatureDesc {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    // Discrete features only: deduplicated, lexicographically sorted, fixed
    // at load time.
    std::vector<std::string> categories;
};

struct DatasetSchema {
    std::vector<FeatureDesc> features;  // sidecar order
    std::string label_name;
    std::vector<std::string> class_names;  // lexicographically sorted

    std::size_t n_continuous() const;
    std::size_t binary_width() const;  // sum of category counts
    std::size_t n_classes() const { return class_names.size(); }

    // FNV-1a over the canonical serialization (names, kinds, categories,
    // classes). Checkpoints embed it; eval refuses on mismatch.
    std::uint64_t fingerprint() const;
};

// Tabular data split into a continuous matrix C, a one-hot binary matrix B,
// and class labels. X_i = C_i ⊕ B_i with all continuous blocks first, then
// the binary blocks, both in schema order. Immutable after construction.
struct EncodedDataset {
    DatasetSchema schema;
    Matrix c;                     // N x m
    std::vector<std::uint8_t> b;  // N x binary_width, row-major
    std::vector<int> labels;      // N, indices into schema.class_names
    std::vector<double> c_min;    // observed in this data only
    std::vector<double> c_max;

    std::size_t size() const { return labels.size(); }
    std::size_t n_classes() const { return schema.n_classes(); }
    std::size_t binary_width() const { return schema.binary_width(); }

    const std::uint8_t* b_row(std::size_t i) const {
        return b.data() + i * binary_width();
    }

    // Category value of discrete feature `d` (index among discrete features)
    // decoded from the one-hot block of row i.
    const std::string& decode_category(std::size_t i, std::size_t d) const;

    EncodedDataset subset(std::span<const std::size_t> indices) const;
};

// Parses the schema sidecar: one `name,kind` line per column with
// kind in {continuous, discrete, label}; exactly one label column.
DatasetSchema load_schema(const std::string& schema_path);

// Loads a CSV (header row, comma-separated, '.' decimal point) against its
// sidecar. Discrete categories and class names are collected from the data.
EncodedDataset load_dataset(const std::string& data_path,
                            const std::string& schema_path);

// Encodes against a schema whose categories/classes are already fixed;
// unseen category or label values raise DataError naming row and column.
EncodedDataset encode_dataset(const DatasetSchema& schema,
                              const std::string& data_path);

struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> train;  // per fold, ascending
    std::vector<std::vector<std::size_t>> test;

    std::string to_json() const;
};

// Deterministic stratified k-fold partition: folds partition [0, N) and
// per-class counts differ by at most 1 across folds.
FoldPlan stratified_kfold(const EncodedDataset& ds, std::size_t k,
                          std::uint64_t seed);

// Unweighted mean of per-class F1. A class with no predictions and no truth
// instances contributes 0.
double macro_f1(std::span<const int> pred, std::span<const int> truth,
                std::size_t n_classes);

double accuracy(std::span<const int> pred, std::span<const int> truth);

}  // namespace rrl
