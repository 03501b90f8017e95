#include "a2m/autodiff/tape.hpp"

#include "a2m/error.hpp"

namespace a2m::ad {

Matrix& GradSink::slot(std::size_t i) { return tape_.nodes_[parents_[i]].grad; }

const Matrix& Tape::value(int id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
}

Tensor Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::variable(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = recording_;
    nodes_.push_back(std::move(n));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::parameter(const Parameter& p) {
    if (auto it = bound_.find(&p); it != bound_.end()) return Tensor(this, it->second);
    Node n;
    n.external = &p.value;
    n.param = &p;
    n.requires_grad = recording_;
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    bound_.emplace(&p, id);
    return Tensor(this, id);
}

Tensor Tape::record(Matrix value, const std::vector<Tensor>& parents, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    if (recording_) {
        for (const Tensor& p : parents) {
            if (p.tape() != this) {
                throw Error(ErrorKind::InvalidArgument, "operands live on different tapes");
            }
            n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
        }
        if (n.requires_grad) {
            n.parents.reserve(parents.size());
            for (const Tensor& p : parents) n.parents.push_back(p.id());
            n.backward = std::move(backward);
        }
    }
    nodes_.push_back(std::move(n));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(const Tensor& loss) {
    if (loss.tape() != this) throw Error(ErrorKind::InvalidArgument, "loss is not on this tape");
    if (loss.rows() != 1 || loss.cols() != 1) {
        throw Error(ErrorKind::ShapeMismatch, "backward needs a 1x1 loss");
    }
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (int id = loss.id(); id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grad.size() == 0 || !n.requires_grad) continue;
        if (n.backward) {
            GradSink sink(*this, n.parents);
            n.backward(n.grad, sink);
        } else if (n.param) {
            Matrix& g = n.param->grad;
            if (g.rows() != n.grad.rows() || g.cols() != n.grad.cols()) {
                g.setZero(n.grad.rows(), n.grad.cols());
            }
            g += n.grad;
        }
    }
}

}  // namespace a2m::ad
