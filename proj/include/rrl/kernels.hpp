#pragma once

#include <cstddef>
#include <string_view>

namespace rrl::kernels {

// Inner loops of the continuous logical layers. Both node kinds reduce to
// the same two row kernels once the input is phrased as x:
//   conjunction: x_j = 1 - u_j   (term F_c + eps = 1 - w_j*x_j + eps)
//   disjunction: x_j = u_j       (term 1 - F_d + eps = 1 - w_j*x_j + eps)
struct Ops {
    const char* name;

    // sum_j log(1 - w[j]*x[j] + eps); terms of exactly 0 contribute -inf.
    double (*log_prod_affine)(const double* w, const double* x, std::size_t n,
                              double eps);

    // For each j with t_j = 1 - w[j]*x[j] + eps:
    //   gw[j] += sw * x[j] / t_j;   gx[j] += su * w[j] / t_j;
    void (*logic_backward_row)(const double* w, const double* x, std::size_t n,
                               double eps, double sw, double su, double* gw,
                               double* gx);
};

enum class Backend { Auto, Scalar, Avx2 };

const Ops& scalar_ops();

// nullptr when the build or the CPU lacks AVX2+FMA.
const Ops* avx2_ops();

// Active implementation. Defaults to the widest backend the CPU supports;
// the RRL_KERNELS environment variable (auto|scalar|avx2) overrides.
const Ops& active();

// Explicit selection; throws std::runtime_error for an unavailable backend.
void select(Backend b);

Backend parse_backend(std::string_view name);

}  // namespace rrl::kernels
