#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrl/matrix.hpp"

namespace rrl {

// Fixed (non-trainable) thresholds of the binarization layer: per continuous
// feature j, k lower bounds and k upper bounds sampled uniformly from the
// feature's observed training range. Output node layout per feature:
//   [ q(c_j - T_{j,1}), ..., q(c_j - T_{j,k}),
//     q(H_{j,1} - c_j), ..., q(H_{j,k} - c_j) ]   with q(x) = 1 iff x > 0,
// features concatenated in order; total width 2*k*m.
struct BinarizationBounds {
    std::size_t n_features = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<double> lower;  // n_features * k, feature-major
    std::vector<double> upper;  // n_features * k, feature-major

    std::size_t output_width() const { return 2 * k * n_features; }

    double lower_bound(std::size_t feature, std::size_t i) const {
        return lower[feature * k + i];
    }
    double upper_bound(std::size_t feature, std::size_t i) const {
        return upper[feature * k + i];
    }
};

// Draws k lower and k upper bounds per feature, i.i.d. uniform on the
// feature's [min, max] over `train_c` rows. Constant features yield bounds
// all equal to that constant.
BinarizationBounds sample_bounds(const Matrix& train_c, std::size_t k,
                                 std::uint64_t seed);

// Indicator vector for one continuous instance; out must have output_width()
// entries. Values are exactly 0.0 / 1.0.
void binarize(const BinarizationBounds& bounds, std::span<const double> c,
              double* out);

// Same indicators as packed bits.
void binarize_bits(const BinarizationBounds& bounds, std::span<const double> c,
                   BitVec& out, std::size_t bit_offset);

// Human-readable predicate for one indicator node: "feature > v" for lower
// bounds, "feature < v" for upper bounds (6 significant digits). Throws
// std::out_of_range for node_index >= 2*k*m.
std::string literal_text(const BinarizationBounds& bounds,
                         std::size_t node_index,
                         std::span<const std::string> feature_names);

}  // namespace rrl
