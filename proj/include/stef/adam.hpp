#pragma once

#include <vector>

#include "stef/tensor.hpp"

namespace stef {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-parameter first/second moment estimates plus the shared step
/// counter. Moment arrays line up one-to-one with the parameter list the
/// state was initialized for.
struct AdamState {
    AdamConfig config;
    int64_t step_count = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState make(const std::vector<Tensor>& params, AdamConfig config = {});
};

/// One bias-corrected Adam update over a single array.
void adam_update_array(double* p, const double* g, double* m, double* v, int64_t n,
                       const AdamConfig& config, int64_t step);

/// Applies one step to every parameter, consuming the gradients attached
/// to the tensors. Increments state.step_count once.
void adam_update(std::vector<Tensor>& params, AdamState& state);

}  // namespace stef
