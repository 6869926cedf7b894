#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rrl {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    void fill(double v) { data.assign(data.size(), v); }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

// Bit vector packed into 64-bit words; AND/OR over rows reduce to word ops.
struct BitVec {
    std::size_t n = 0;
    std::vector<std::uint64_t> words;

    BitVec() = default;
    explicit BitVec(std::size_t bits) : n(bits), words((bits + 63) / 64, 0) {}

    void set(std::size_t i, bool v) {
        const std::uint64_t m = 1ULL << (i & 63);
        if (v)
            words[i >> 6] |= m;
        else
            words[i >> 6] &= ~m;
    }

    bool get(std::size_t i) const { return (words[i >> 6] >> (i & 63)) & 1; }

    void clear() { words.assign(words.size(), 0); }
};

// w subset of u: every set bit of w is set in u.
inline bool bits_subset(const BitVec& w, const BitVec& u) {
    for (std::size_t k = 0; k < w.words.size(); ++k) {
        if (w.words[k] & ~u.words[k]) return false;
    }
    return true;
}

inline bool bits_intersect(const BitVec& w, const BitVec& u) {
    for (std::size_t k = 0; k < w.words.size(); ++k) {
        if (w.words[k] & u.words[k]) return true;
    }
    return false;
}

}  // namespace rrl
