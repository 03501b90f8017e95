#include "a2m/autodiff/nn.hpp"

#include <cmath>

#include "a2m/error.hpp"

namespace a2m::ad {

Matrix uniform_init(Index rows, Index cols, Index fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    }
    return m;
}

Linear::Linear(const std::string& name, Index in, Index out, Rng& rng)
    : weight(name + ".weight", uniform_init(in, out, in, rng)),
      bias(name + ".bias", uniform_init(1, out, in, rng)) {}

Tensor Linear::operator()(Tape& tape, const Tensor& x) const {
    return matmul(x, tape.parameter(weight)) + tape.parameter(bias);
}

GruParams::GruParams(const std::string& name, Index in, Index hidden, Rng& rng)
    : w_x(name + ".w_x", uniform_init(in, 3 * hidden, hidden, rng)),
      b_x(name + ".b_x", uniform_init(1, 3 * hidden, hidden, rng)),
      w_hg(name + ".w_hg", uniform_init(hidden, 2 * hidden, hidden, rng)),
      w_hn(name + ".w_hn", uniform_init(hidden, hidden, hidden, rng)),
      b_h(name + ".b_h", uniform_init(1, 3 * hidden, hidden, rng)) {}

Tensor gru_cell(Tape& tape, const Tensor& x, const Tensor& h, const GruParams& p) {
    const Index hd = p.hidden_dim();
    if (x.cols() != p.input_dim() || h.cols() != hd || x.rows() != h.rows()) {
        throw Error(ErrorKind::ShapeMismatch,
                    "gru_cell: x is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                        ", h is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                        ", cell expects input " + std::to_string(p.input_dim()) + " and hidden " +
                        std::to_string(hd));
    }
    const Tensor gx = matmul(x, tape.parameter(p.w_x)) + tape.parameter(p.b_x);
    const Tensor bh = tape.parameter(p.b_h);
    const Tensor gh = matmul(h, tape.parameter(p.w_hg)) + slice(bh, 0, 2 * hd);
    const Tensor gates = sigmoid(slice(gx, 0, 2 * hd) + gh);
    const Tensor r = slice(gates, 0, hd);
    const Tensor z = slice(gates, hd, hd);
    const Tensor n = tanh(slice(gx, 2 * hd, hd) + matmul(r * h, tape.parameter(p.w_hn)) +
                          slice(bh, 2 * hd, hd));
    // (1 - z) n + z h = n + z (h - n)
    return n + z * (h - n);
}

GruStack::GruStack(const std::string& name, Index in, Index hidden, int depth, Rng& rng) {
    for (int l = 0; l < depth; ++l) {
        layers.emplace_back(name + ".l" + std::to_string(l), l == 0 ? in : hidden, hidden, rng);
    }
}

Tensor GruStack::step(Tape& tape, const Tensor& x, std::vector<Tensor>& state) const {
    Tensor in = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        state[l] = gru_cell(tape, in, state[l], layers[l]);
        in = state[l];
    }
    return in;
}

std::vector<Tensor> GruStack::zero_state(Tape& tape, Index batch) const {
    std::vector<Tensor> s;
    for (const auto& l : layers) s.push_back(tape.constant(Matrix::Zero(batch, l.hidden_dim())));
    return s;
}

std::vector<Parameter*> GruStack::parameters() {
    std::vector<Parameter*> out;
    for (auto& l : layers) {
        for (Parameter* p : l.parameters()) out.push_back(p);
    }
    return out;
}

}  // namespace a2m::ad
