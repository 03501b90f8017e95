#pragma once

#include <random>
#include <string>
#include <vector>

#include "a2m/autodiff/ops.hpp"

namespace a2m::ad {

using Rng = std::mt19937_64;

// Uniform in +-1/sqrt(fan_in).
Matrix uniform_init(Index rows, Index cols, Index fan_in, Rng& rng);

// y = x W + b with W (in x out) and b (1 x out).
struct Linear {
    Parameter weight;
    Parameter bias;

    Linear() = default;
    Linear(const std::string& name, Index in, Index out, Rng& rng);

    Index in_dim() const { return weight.value.rows(); }
    Index out_dim() const { return weight.value.cols(); }
    Tensor operator()(Tape& tape, const Tensor& x) const;
    std::vector<Parameter*> parameters() { return {&weight, &bias}; }
};

// Gate weights of one GRU cell. The input path is fused in column order
// [reset | update | candidate]; the hidden path keeps the reset/update
// block separate from the candidate block because the reset gate scales h
// before the candidate transform.
struct GruParams {
    Parameter w_x;   // in x 3H
    Parameter b_x;   // 1 x 3H
    Parameter w_hg;  // H x 2H, [reset | update]
    Parameter w_hn;  // H x H
    Parameter b_h;   // 1 x 3H

    GruParams() = default;
    GruParams(const std::string& name, Index in, Index hidden, Rng& rng);

    Index input_dim() const { return w_x.value.rows(); }
    Index hidden_dim() const { return w_hn.value.rows(); }
    std::vector<Parameter*> parameters() { return {&w_x, &b_x, &w_hg, &w_hn, &b_h}; }
};

// r = sigmoid(x W_xr + b_xr + h W_hr + b_hr)
// z = sigmoid(x W_xz + b_xz + h W_hz + b_hz)
// n = tanh(x W_xn + b_xn + (r * h) W_hn + b_hn)
// h' = (1 - z) * n + z * h
Tensor gru_cell(Tape& tape, const Tensor& x, const Tensor& h, const GruParams& p);

// Stack of GRU cells; layer l feeds layer l+1.
struct GruStack {
    std::vector<GruParams> layers;

    GruStack() = default;
    GruStack(const std::string& name, Index in, Index hidden, int depth, Rng& rng);

    Index hidden_dim() const { return layers.front().hidden_dim(); }
    // Advances every layer by one step; `state` holds one tensor per layer
    // and is updated in place. Returns the top layer output.
    Tensor step(Tape& tape, const Tensor& x, std::vector<Tensor>& state) const;
    std::vector<Tensor> zero_state(Tape& tape, Index batch) const;
    std::vector<Parameter*> parameters();
};

}  // namespace a2m::ad
