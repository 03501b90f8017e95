#pragma once

#include <array>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace a2m::ad {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Named trainable array. `grad` accumulates across backward passes until
// zero_grad(); it is mutable so read-only model views can still be bound to
// a recording tape.
struct Parameter {
    std::string name;
    Matrix value;
    mutable Matrix grad;

    Parameter() = default;
    Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) {}

    void zero_grad() const { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a Tape. Values are 2-D: rows are the batch dimension.
class Tensor {
public:
    Tensor() = default;

    bool valid() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int id() const { return id_; }

    const Matrix& value() const;
    // Gradient after Tape::backward; empty when the node did not receive one.
    const Matrix& grad() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    std::array<Index, 2> shape() const { return {rows(), cols()}; }
    double scalar() const { return value()(0, 0); }

private:
    friend class Tape;
    Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Accumulates parent gradients inside a backward rule.
class GradSink {
public:
    // True when parent i participates in differentiation.
    bool wants(std::size_t i) const;
    template <typename Expr>
    void add(std::size_t i, const Expr& g);

private:
    friend class Tape;
    GradSink(Tape& tape, const std::vector<int>& parents) : tape_(tape), parents_(parents) {}
    Matrix& slot(std::size_t i);

    Tape& tape_;
    const std::vector<int>& parents_;
};

using BackwardFn = std::function<void(const Matrix& grad_out, GradSink& sink)>;

// Linear record of operations in creation order, which is a topological
// order. A tape belongs to one thread; a non-recording tape only evaluates
// values.
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return recording_; }
    std::size_t size() const { return nodes_.size(); }

    Tensor constant(Matrix value);
    // Leaf whose gradient is kept on the tape.
    Tensor variable(Matrix value);
    // Leaf bound to a parameter; repeated binds return the same node, and
    // backward adds into Parameter::grad.
    Tensor parameter(const Parameter& p);

    // Extension point for operations: `parents` must live on this tape.
    Tensor record(Matrix value, const std::vector<Tensor>& parents, BackwardFn backward);

    // Reverse sweep from a 1x1 tensor; each node is visited once.
    void backward(const Tensor& loss);

    const Matrix& value(int id) const;
    const Matrix& grad(int id) const { return nodes_[id].grad; }

private:
    friend class GradSink;

    struct Node {
        Matrix value;
        const Matrix* external = nullptr;  // parameter storage, not copied
        Matrix grad;
        std::vector<int> parents;
        BackwardFn backward;
        const Parameter* param = nullptr;
        bool requires_grad = false;
    };

    bool recording_;
    std::deque<Node> nodes_;
    std::unordered_map<const Parameter*, int> bound_;
};

inline const Matrix& Tensor::value() const { return tape_->value(id_); }
inline const Matrix& Tensor::grad() const { return tape_->grad(id_); }

inline bool GradSink::wants(std::size_t i) const {
    return tape_.nodes_[parents_[i]].requires_grad;
}

template <typename Expr>
void GradSink::add(std::size_t i, const Expr& g) {
    if (!wants(i)) return;
    Matrix& s = slot(i);
    if (s.size() == 0) {
        s = g;
    } else {
        s += g;
    }
}

}  // namespace a2m::ad
