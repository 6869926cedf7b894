#include "rrl/binarization.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "rrl/rng.hpp"

namespace rrl {

BinarizationBounds sample_bounds(const Matrix& train_c, std::size_t k,
                                 std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("sample_bounds: k must be >= 1");
    const std::size_t m = train_c.cols;

    BinarizationBounds bounds;
    bounds.n_features = m;
    bounds.k = k;
    bounds.seed = seed;
    bounds.lower.resize(m * k);
    bounds.upper.resize(m * k);

    Rng rng(seed);
    for (std::size_t j = 0; j < m; ++j) {
        double lo = train_c.at(0, j), hi = train_c.at(0, j);
        for (std::size_t i = 1; i < train_c.rows; ++i) {
            lo = std::min(lo, train_c.at(i, j));
            hi = std::max(hi, train_c.at(i, j));
        }
        for (std::size_t b = 0; b < k; ++b) bounds.lower[j * k + b] = rng.uniform(lo, hi);
        for (std::size_t b = 0; b < k; ++b) bounds.upper[j * k + b] = rng.uniform(lo, hi);
    }
    return bounds;
}

void binarize(const BinarizationBounds& bounds, std::span<const double> c,
              double* out) {
    const std::size_t k = bounds.k;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < bounds.n_features; ++j) {
        const double v = c[j];
        for (std::size_t b = 0; b < k; ++b) {
            out[pos++] = v > bounds.lower[j * k + b] ? 1.0 : 0.0;
        }
        for (std::size_t b = 0; b < k; ++b) {
            out[pos++] = v < bounds.upper[j * k + b] ? 1.0 : 0.0;
        }
    }
}

void binarize_bits(const BinarizationBounds& bounds, std::span<const double> c,
                   BitVec& out, std::size_t bit_offset) {
    const std::size_t k = bounds.k;
    std::size_t pos = bit_offset;
    for (std::size_t j = 0; j < bounds.n_features; ++j) {
        const double v = c[j];
        for (std::size_t b = 0; b < k; ++b) {
            out.set(pos++, v > bounds.lower[j * k + b]);
        }
        for (std::size_t b = 0; b < k; ++b) {
            out.set(pos++, v < bounds.upper[j * k + b]);
        }
    }
}

std::string literal_text(const BinarizationBounds& bounds,
                         std::size_t node_index,
                         std::span<const std::string> feature_names) {
    if (node_index >= bounds.output_width()) {
        throw std::out_of_range("literal_text: node index " +
                                std::to_string(node_index) +
                                " is outside the binarization layer");
    }
    const std::size_t k = bounds.k;
    const std::size_t feature = node_index / (2 * k);
    const std::size_t r = node_index % (2 * k);
    const bool is_lower = r < k;
    const double v = is_lower ? bounds.lower_bound(feature, r)
                              : bounds.upper_bound(feature, r - k);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return feature_names[feature] + (is_lower ? " > " : " < ") + buf;
}

}  // namespace rrl
