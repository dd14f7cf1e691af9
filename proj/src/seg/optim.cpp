#include "seg/optim.hpp"

#include <cmath>

#include "core/error.hpp"

namespace slab {

AdamState::AdamState(const SegModel& model) {
    m_.reserve(model.params.size());
    v_.reserve(model.params.size());
    for (const auto& [name, p] : model.params) {
        m_.push_back(Tensor::zeros(p.shape()));
        v_.push_back(Tensor::zeros(p.shape()));
    }
}

void AdamState::step(SegModel& model, const std::vector<Tensor>& grads, float lr,
                     const AdamConfig& cfg) {
    if (grads.size() != model.params.size()) {
        throw UsageError("adam_step: gradient count does not match parameter count");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg.beta1), static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg.beta2), static_cast<double>(t_));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        auto& [name, p] = model.params[i];
        auto g = grads[i].data();
        auto pm = p.mut_data();
        auto m = m_[i].mut_data();
        auto v = v_[i].mut_data();
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!std::isfinite(g[j])) {
                throw NumericError("NaN gradient in parameter '" + name + "'");
            }
            m[j] = cfg.beta1 * m[j] + (1.0f - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0f - cfg.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            double upd = lr * mhat / (std::sqrt(vhat) + cfg.eps);
            if (cfg.weight_decay != 0.0f) upd += static_cast<double>(lr) * cfg.weight_decay * pm[j];
            pm[j] = static_cast<float>(pm[j] - upd);
        }
    }
}

}  // namespace slab
