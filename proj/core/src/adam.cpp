#include "trail/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace trail {

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               std::optional<double> clip_norm) {
    const std::size_t n = params.size();
    if (grad.size() != n || state.m.size() != n)
        throw std::invalid_argument("adam shape mismatch");
    double scale = 1.0;
    double sq = 0.0;
    for (double g : grad) {
        if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient in adam_step");
        sq += g * g;
    }
    if (clip_norm) {
        double norm = std::sqrt(sq);
        if (norm > *clip_norm && norm > 0.0) scale = *clip_norm / norm;
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i] * scale;
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

} // namespace trail
