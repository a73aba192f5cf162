#include "stef/adam.hpp"

#include <cmath>

#include "stef/kernels.hpp"

namespace stef {

AdamState AdamState::make(const std::vector<Tensor>& params, AdamConfig config) {
    AdamState st;
    st.config = config;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const Tensor& p : params) {
        st.m.emplace_back(static_cast<size_t>(p.size()), 0.0);
        st.v.emplace_back(static_cast<size_t>(p.size()), 0.0);
    }
    return st;
}

void adam_update_array(double* p, const double* g, double* m, double* v, int64_t n,
                       const AdamConfig& config, int64_t step) {
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
    kernels::active().adam_step(p, g, m, v, n, config.learning_rate, config.beta1, config.beta2,
                                config.epsilon, bc1, bc2);
}

void adam_update(std::vector<Tensor>& params, AdamState& state) {
    if (params.size() != state.m.size())
        throw std::invalid_argument("adam_update: state initialized for " +
                                    std::to_string(state.m.size()) + " arrays, got " +
                                    std::to_string(params.size()));
    state.step_count++;
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        if (!p.has_grad())
            throw std::invalid_argument("adam_update: parameter " + std::to_string(i) +
                                        " has no gradient; run backward first");
        if (p.size() != static_cast<int64_t>(state.m[i].size()))
            throw std::invalid_argument("adam_update: parameter " + std::to_string(i) +
                                        " shape changed since state was initialized");
        adam_update_array(p.data(), p.grad().data(), state.m[i].data(), state.v[i].data(),
                          p.size(), state.config, state.step_count);
    }
}

}  // namespace stef
