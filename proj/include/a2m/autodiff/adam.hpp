#pragma once

#include <vector>

#include "a2m/autodiff/tape.hpp"

namespace a2m::ad {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-5;
};

struct AdamState {
    Matrix m;
    Matrix v;
    long step = 0;
};

// One Adam update with decoupled weight decay:
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& cfg);

class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig cfg = {});

    // Applies one update from the accumulated gradients; parameters whose
    // gradient is empty are treated as having a zero gradient.
    void step();
    void zero_grad();

    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    std::vector<Parameter*> params_;
    std::vector<AdamState> state_;
    AdamConfig cfg_;
};

}  // namespace a2m::ad
