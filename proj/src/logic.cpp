#include "rrl/logic.hpp"

#include <cmath>
#include <stdexcept>

#include "rrl/kernels.hpp"

namespace rrl {

namespace {

// P^2(v) factor of dP/dv, or P(P^2(v)) with the derivative trick. Computed
// from ln v: ln P^2 = -2 ln(1 - ln v).
double backward_base(double log_v, bool derivative_trick) {
    const double p = projection_from_log(log_v);
    if (!derivative_trick) return p * p;
    return 1.0 / (1.0 + 2.0 * std::log(1.0 - log_v));
}

std::vector<double> one_minus(std::span<const double> h) {
    std::vector<double> r(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) r[i] = 1.0 - h[i];
    return r;
}

}  // namespace

double projection(double v) {
    if (!(v > 0.0)) throw std::domain_error("projection: v must be positive");
    return projection_from_log(std::log(v));
}

double conj_plus(std::span<const double> h, std::span<const double> w,
                 double eps) {
    const auto x = one_minus(h);
    const double lv =
        kernels::active().log_prod_affine(w.data(), x.data(), h.size(), eps);
    return clamp01(projection_from_log(lv));
}

double disj_plus(std::span<const double> h, std::span<const double> w,
                 double eps) {
    const double lv =
        kernels::active().log_prod_affine(w.data(), h.data(), h.size(), eps);
    return clamp01(1.0 - projection_from_log(lv));
}

double conj_original(std::span<const double> h, std::span<const double> w) {
    double prod = 1.0;
    for (std::size_t j = 0; j < h.size(); ++j) prod *= 1.0 - w[j] * (1.0 - h[j]);
    return prod;
}

double disj_original(std::span<const double> h, std::span<const double> w) {
    double prod = 1.0;
    for (std::size_t j = 0; j < h.size(); ++j) prod *= 1.0 - h[j] * w[j];
    return 1.0 - prod;
}

std::vector<double> conj_original_grad_w(std::span<const double> h,
                                         std::span<const double> w) {
    const std::size_t n = h.size();
    std::vector<double> fc(n), prefix(n + 1, 1.0), suffix(n + 1, 1.0);
    for (std::size_t j = 0; j < n; ++j) fc[j] = 1.0 - w[j] * (1.0 - h[j]);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] * fc[j];
    for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] * fc[j];
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) {
        g[j] = (h[j] - 1.0) * prefix[j] * suffix[j + 1];
    }
    return g;
}

std::vector<double> conj_plus_grad_w(std::span<const double> h,
                                     std::span<const double> w, double eps,
                                     bool derivative_trick) {
    const std::size_t n = h.size();
    const auto x = one_minus(h);
    const double lv =
        kernels::active().log_prod_affine(w.data(), x.data(), n, eps);
    const double base = backward_base(lv, derivative_trick);
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 1.0 - w[j] * x[j] + eps;
        g[j] = base / t * (h[j] - 1.0);
    }
    return g;
}

int conj_discrete(std::span<const std::uint8_t> h,
                  std::span<const std::uint8_t> w) {
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (w[j] && !h[j]) return 0;
    }
    return 1;
}

int disj_discrete(std::span<const std::uint8_t> h,
                  std::span<const std::uint8_t> w) {
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (w[j] && h[j]) return 1;
    }
    return 0;
}

LayerActivations layer_forward_continuous(const LogicalLayerParams& params,
                                          std::span<const double> u_prev) {
    const std::size_t n_in = params.n_in();
    const std::size_t n_half = params.n_half();
    const auto& ops = kernels::active();

    LayerActivations acts;
    acts.input.assign(u_prev.begin(), u_prev.end());
    acts.one_minus_input = one_minus(u_prev);
    acts.log_v_conj.resize(n_half);
    acts.log_v_disj.resize(n_half);
    acts.out.resize(2 * n_half);

    for (std::size_t i = 0; i < n_half; ++i) {
        const double lv = ops.log_prod_affine(
            params.w_conj.row(i), acts.one_minus_input.data(), n_in, params.eps);
        acts.log_v_conj[i] = lv;
        acts.out[i] = clamp01(projection_from_log(lv));
    }
    for (std::size_t i = 0; i < n_half; ++i) {
        const double lv = ops.log_prod_affine(params.w_disj.row(i),
                                              acts.input.data(), n_in, params.eps);
        acts.log_v_disj[i] = lv;
        acts.out[n_half + i] = clamp01(1.0 - projection_from_log(lv));
    }
    return acts;
}

PackedLayerWeights pack_discrete(const LogicalLayerParams& params) {
    PackedLayerWeights packed;
    const std::size_t n_in = params.n_in();
    packed.conj_rows.reserve(params.n_half());
    packed.disj_rows.reserve(params.n_half());
    for (std::size_t i = 0; i < params.n_half(); ++i) {
        BitVec row(n_in);
        for (std::size_t j = 0; j < n_in; ++j) {
            if (params.w_conj.at(i, j) > 0.5) row.set(j, true);
        }
        packed.conj_rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < params.n_half(); ++i) {
        BitVec row(n_in);
        for (std::size_t j = 0; j < n_in; ++j) {
            if (params.w_disj.at(i, j) > 0.5) row.set(j, true);
        }
        packed.disj_rows.push_back(std::move(row));
    }
    return packed;
}

BitVec layer_forward_discrete(const PackedLayerWeights& weights,
                              const BitVec& u_prev) {
    const std::size_t n_half = weights.conj_rows.size();
    BitVec out(2 * n_half);
    for (std::size_t i = 0; i < n_half; ++i) {
        if (bits_subset(weights.conj_rows[i], u_prev)) out.set(i, true);
    }
    for (std::size_t i = 0; i < n_half; ++i) {
        if (bits_intersect(weights.disj_rows[i], u_prev)) out.set(n_half + i, true);
    }
    return out;
}

void LayerGradients::zero() {
    w_conj.fill(0.0);
    w_disj.fill(0.0);
    input.assign(input.size(), 0.0);
}

void layer_backward(const LogicalLayerParams& params,
                    const LayerActivations& acts,
                    std::span<const double> upstream, LayerGradients& grads) {
    const std::size_t n_in = params.n_in();
    const std::size_t n_half = params.n_half();
    const auto& ops = kernels::active();

    for (std::size_t i = 0; i < n_half; ++i) {
        const double g = upstream[i];
        if (g == 0.0) continue;
        const double factor =
            g * backward_base(acts.log_v_conj[i], params.derivative_trick);
        if (factor == 0.0) continue;
        // d r / d w_j = base * (u_j - 1) / t_j;  d r / d u_j = base * w_j / t_j
        ops.logic_backward_row(params.w_conj.row(i),
                               acts.one_minus_input.data(), n_in, params.eps,
                               -factor, factor, grads.w_conj.row(i),
                               grads.input.data());
    }
    for (std::size_t i = 0; i < n_half; ++i) {
        const double g = upstream[n_half + i];
        if (g == 0.0) continue;
        const double factor =
            g * backward_base(acts.log_v_disj[i], params.derivative_trick);
        if (factor == 0.0) continue;
        // d s / d w_j = base * u_j / t_j;  d s / d u_j = base * w_j / t_j
        ops.logic_backward_row(params.w_disj.row(i), acts.input.data(), n_in,
                               params.eps, factor, factor, grads.w_disj.row(i),
                               grads.input.data());
    }
}

}  // namespace rrl
