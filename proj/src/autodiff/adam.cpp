#include "a2m/autodiff/adam.hpp"

#include <cmath>

#include "a2m/error.hpp"

namespace a2m::ad {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& cfg) {
    if (grad.rows() != param.rows() || grad.cols() != param.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "adam_step: gradient shape differs from parameter");
    }
    if (state.m.size() == 0) {
        state.m.setZero(param.rows(), param.cols());
        state.v.setZero(param.rows(), param.cols());
    }
    ++state.step;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    param.array() -= cfg.lr * ((state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps) +
                               cfg.weight_decay * param.array());
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), state_(params_.size()), cfg_(cfg) {}

void Adam::step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        if (p.grad.size() == 0) p.zero_grad();
        adam_step(p.value, p.grad, state_[i], cfg_);
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

}  // namespace a2m::ad
