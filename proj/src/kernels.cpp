#include "rrl/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rrl::kernels {

namespace {

const Ops* g_active = nullptr;

const Ops* pick(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &scalar_ops();
        case Backend::Avx2: {
            const Ops* ops = avx2_ops();
            if (!ops) throw std::runtime_error("avx2 kernels unavailable on this CPU/build");
            return ops;
        }
        case Backend::Auto:
        default: {
            const Ops* ops = avx2_ops();
            return ops ? ops : &scalar_ops();
        }
    }
}

const Ops* init_from_env() {
    Backend b = Backend::Auto;
    if (const char* env = std::getenv("RRL_KERNELS")) {
        b = parse_backend(env);
    }
    return pick(b);
}

}  // namespace

Backend parse_backend(std::string_view name) {
    if (name == "auto") return Backend::Auto;
    if (name == "scalar") return Backend::Scalar;
    if (name == "avx2") return Backend::Avx2;
    throw std::runtime_error("unknown kernel backend: " + std::string(name) +
                             " (expected auto|scalar|avx2)");
}

const Ops& active() {
    if (!g_active) g_active = init_from_env();
    return *g_active;
}

void select(Backend b) { g_active = pick(b); }

}  // namespace rrl::kernels
