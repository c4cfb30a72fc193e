#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace trail {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n_params, double learning_rate = 5e-4)
        : m(n_params, 0.0), v(n_params, 0.0), lr(learning_rate) {}
};

// One bias-corrected Adam update. With clip_norm set, global-norm clipping is
// applied to the gradient before the moment update. Throws std::runtime_error
// on non-finite gradients.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               std::optional<double> clip_norm = std::nullopt);

} // namespace trail
