#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rrl/matrix.hpp"

namespace rrl {

// Log-domain projection P(v) = -1/(-1 + ln v). Maps the product of node
// terms back into [0,1]-like range while keeping gradients alive: P(1) = 1,
// P(v) -> 0 as v -> 0+, strictly increasing. Precondition: v > 0, ln v < 1.
double projection(double v);

// P given ln v directly; the layers keep ln v and never materialize v.
inline double projection_from_log(double log_v) { return 1.0 / (1.0 - log_v); }

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Improved continuous activations. conj = P(prod_j (F_c(h_j,w_j) + eps)),
// disj = 1 - P(prod_j (1 - F_d(h_j,w_j) + eps)), F_c(h,w) = 1 - w*(1-h),
// F_d(h,w) = h*w. Results clamped to [0,1].
double conj_plus(std::span<const double> h, std::span<const double> w, double eps);
double disj_plus(std::span<const double> h, std::span<const double> w, double eps);

// Original multiplicative activations. Training never uses these; they back
// the vanishing-gradient property suite.
double conj_original(std::span<const double> h, std::span<const double> w);
double disj_original(std::span<const double> h, std::span<const double> w);

// d conj_original / d w_j for all j, via prefix/suffix products.
std::vector<double> conj_original_grad_w(std::span<const double> h,
                                         std::span<const double> w);

// d conj_plus / d w_j for all j (closed form; derivative_trick swaps the
// P^2(v)/v factor for P(P^2(v))/v).
std::vector<double> conj_plus_grad_w(std::span<const double> h,
                                     std::span<const double> w, double eps,
                                     bool derivative_trick);

// Discrete node evaluation: AND / OR over inputs selected by binary weights.
// Empty selection is 1 for conjunction, 0 for disjunction.
int conj_discrete(std::span<const std::uint8_t> h, std::span<const std::uint8_t> w);
int disj_discrete(std::span<const std::uint8_t> h, std::span<const std::uint8_t> w);

// One logical layer: a conjunction half and a disjunction half over the same
// input, output r ⊕ s. Weights live in [0,1]; the discrete view thresholds
// them at 0.5 (strict).
struct LogicalLayerParams {
    Matrix w_conj;  // n_half x n_in
    Matrix w_disj;  // n_half x n_in
    double eps = 1e-10;
    bool derivative_trick = false;

    std::size_t n_in() const { return w_conj.cols; }
    std::size_t n_half() const { return w_conj.rows; }
    std::size_t n_out() const { return 2 * w_conj.rows; }
};

// Forward cache: ln v per node is enough to rebuild the pre-clamp
// activation and every backward factor.
struct LayerActivations {
    std::vector<double> input;
    std::vector<double> one_minus_input;
    std::vector<double> log_v_conj;  // per conjunction node
    std::vector<double> log_v_disj;  // per disjunction node
    std::vector<double> out;         // clamped, size n_out
};

LayerActivations layer_forward_continuous(const LogicalLayerParams& params,
                                          std::span<const double> u_prev);

// Discrete weights packed row-wise for word-parallel evaluation.
struct PackedLayerWeights {
    std::vector<BitVec> conj_rows;
    std::vector<BitVec> disj_rows;
};

PackedLayerWeights pack_discrete(const LogicalLayerParams& params);

// Exact Boolean layer evaluation; no eps, no floating point.
BitVec layer_forward_discrete(const PackedLayerWeights& weights,
                              const BitVec& u_prev);

struct LayerGradients {
    Matrix w_conj;
    Matrix w_disj;
    std::vector<double> input;

    explicit LayerGradients(const LogicalLayerParams& p)
        : w_conj(p.w_conj.rows, p.w_conj.cols),
          w_disj(p.w_disj.rows, p.w_disj.cols),
          input(p.n_in(), 0.0) {}
    void zero();
};

// Closed-form backward for the improved activations, accumulated into
// `grads`. `upstream` is d loss / d (r ⊕ s) at this layer's output.
void layer_backward(const LogicalLayerParams& params,
                    const LayerActivations& acts,
                    std::span<const double> upstream, LayerGradients& grads);

}  // namespace rrl
