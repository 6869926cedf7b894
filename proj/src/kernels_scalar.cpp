#include "rrl/kernels.hpp"

#include <cmath>

namespace rrl::kernels {

namespace {

// Terms evaluate as fma(-w, x, 1) + eps in every backend, so backends agree
// on each term to the rounding of the log and the summation order alone.
double log_prod_affine_scalar(const double* w, const double* x, std::size_t n,
                              double eps) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += std::log(std::fma(-w[j], x[j], 1.0) + eps);
    }
    return acc;
}

void logic_backward_row_scalar(const double* w, const double* x, std::size_t n,
                               double eps, double sw, double su, double* gw,
                               double* gx) {
    for (std::size_t j = 0; j < n; ++j) {
        const double inv = 1.0 / (std::fma(-w[j], x[j], 1.0) + eps);
        gw[j] += sw * x[j] * inv;
        gx[j] += su * w[j] * inv;
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", &log_prod_affine_scalar,
                         &logic_backward_row_scalar};
    return ops;
}

}  // namespace rrl::kernels
