#include "a2m/autodiff/ops.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "a2m/error.hpp"

namespace a2m::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    std::ostringstream os;
    os << op << ": incompatible shapes (" << a.rows() << "x" << a.cols() << ") and ("
       << b.rows() << "x" << b.cols() << ")";
    throw Error(ErrorKind::ShapeMismatch, os.str());
}

// True when b broadcasts over the rows of a.
bool row_broadcast(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() == b.rows() && a.cols() == b.cols()) return false;
    if (b.rows() == 1 && a.cols() == b.cols()) return true;
    shape_error(op, a, b);
}

Tape& tape_of(const Tensor& a) { return *a.tape(); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a, b);
    Matrix out = a.value() * b.value();
    return tape_of(a).record(std::move(out), {a, b}, [a, b](const Matrix& g, GradSink& s) {
        if (s.wants(0)) s.add(0, g * b.value().transpose());
        if (s.wants(1)) s.add(1, a.value().transpose() * g);
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    const bool bc = row_broadcast(a, b, "add");
    Matrix out = bc ? Matrix(a.value().rowwise() + b.value().row(0)) : Matrix(a.value() + b.value());
    return tape_of(a).record(std::move(out), {a, b}, [bc](const Matrix& g, GradSink& s) {
        s.add(0, g);
        if (bc) {
            if (s.wants(1)) s.add(1, g.colwise().sum());
        } else {
            s.add(1, g);
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    const bool bc = row_broadcast(a, b, "sub");
    Matrix out = bc ? Matrix(a.value().rowwise() - b.value().row(0)) : Matrix(a.value() - b.value());
    return tape_of(a).record(std::move(out), {a, b}, [bc](const Matrix& g, GradSink& s) {
        s.add(0, g);
        if (bc) {
            if (s.wants(1)) s.add(1, -g.colwise().sum());
        } else {
            if (s.wants(1)) s.add(1, -g);
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const bool bc = row_broadcast(a, b, "mul");
    Matrix out = bc ? Matrix(a.value().array().rowwise() * b.value().row(0).array())
                    : Matrix(a.value().cwiseProduct(b.value()));
    return tape_of(a).record(std::move(out), {a, b}, [a, b, bc](const Matrix& g, GradSink& s) {
        if (bc) {
            if (s.wants(0)) s.add(0, Matrix(g.array().rowwise() * b.value().row(0).array()));
            if (s.wants(1)) s.add(1, g.cwiseProduct(a.value()).colwise().sum());
        } else {
            if (s.wants(0)) s.add(0, g.cwiseProduct(b.value()));
            if (s.wants(1)) s.add(1, g.cwiseProduct(a.value()));
        }
    });
}

Tensor mul_rows(const Tensor& a, const Tensor& m) {
    if (m.cols() != 1 || m.rows() != a.rows()) shape_error("mul_rows", a, m);
    Matrix out = a.value().array().colwise() * m.value().col(0).array();
    return tape_of(a).record(std::move(out), {a, m}, [a, m](const Matrix& g, GradSink& s) {
        if (s.wants(0)) s.add(0, Matrix(g.array().colwise() * m.value().col(0).array()));
        if (s.wants(1)) s.add(1, g.cwiseProduct(a.value()).rowwise().sum());
    });
}

Tensor scale(const Tensor& a, double k) {
    return tape_of(a).record(a.value() * k, {a}, [k](const Matrix& g, GradSink& s) { s.add(0, g * k); });
}

Tensor add_scalar(const Tensor& a, double k) {
    Matrix out = a.value().array() + k;
    return tape_of(a).record(std::move(out), {a}, [](const Matrix& g, GradSink& s) { s.add(0, g); });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw Error(ErrorKind::ShapeMismatch, "concat of nothing");
    const Index rows = parts.front().rows();
    Index cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) shape_error("concat", parts.front(), p);
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::vector<Index> offsets;
    Index off = 0;
    for (const auto& p : parts) {
        out.middleCols(off, p.cols()) = p.value();
        offsets.push_back(off);
        off += p.cols();
    }
    std::vector<Index> widths;
    for (const auto& p : parts) widths.push_back(p.cols());
    return tape_of(parts.front())
        .record(std::move(out), parts, [offsets, widths](const Matrix& g, GradSink& s) {
            for (std::size_t i = 0; i < offsets.size(); ++i) {
                if (s.wants(i)) s.add(i, g.middleCols(offsets[i], widths[i]));
            }
        });
}

Tensor slice(const Tensor& a, Index col_begin, Index col_count) {
    if (col_begin < 0 || col_count < 0 || col_begin + col_count > a.cols()) {
        std::ostringstream os;
        os << "slice [" << col_begin << ", " << col_begin + col_count << ") out of " << a.cols() << " columns";
        throw Error(ErrorKind::ShapeMismatch, os.str());
    }
    Matrix out = a.value().middleCols(col_begin, col_count);
    const Index rows = a.rows();
    const Index cols = a.cols();
    return tape_of(a).record(std::move(out), {a}, [=](const Matrix& g, GradSink& s) {
        Matrix full = Matrix::Zero(rows, cols);
        full.middleCols(col_begin, col_count) = g;
        s.add(0, full);
    });
}

Tensor tile_cols(const Tensor& a, Index times) {
    const Index w = a.cols();
    Matrix out(a.rows(), w * times);
    for (Index k = 0; k < times; ++k) out.middleCols(k * w, w) = a.value();
    return tape_of(a).record(std::move(out), {a}, [w, times](const Matrix& g, GradSink& s) {
        Matrix acc = g.middleCols(0, w);
        for (Index k = 1; k < times; ++k) acc += g.middleCols(k * w, w);
        s.add(0, acc);
    });
}

Tensor tanh(const Tensor& a) {
    Matrix y = a.value().array().tanh();
    Matrix y_copy = y;
    return tape_of(a).record(std::move(y), {a}, [y_copy](const Matrix& g, GradSink& s) {
        s.add(0, Matrix(g.array() * (1.0 - y_copy.array().square())));
    });
}

Tensor sigmoid(const Tensor& a) {
    Matrix y = (1.0 + (-a.value().array()).exp()).inverse();
    Matrix y_copy = y;
    return tape_of(a).record(std::move(y), {a}, [y_copy](const Matrix& g, GradSink& s) {
        s.add(0, Matrix(g.array() * y_copy.array() * (1.0 - y_copy.array())));
    });
}

Tensor relu(const Tensor& a) {
    Matrix y = a.value().cwiseMax(0.0);
    return tape_of(a).record(std::move(y), {a}, [a](const Matrix& g, GradSink& s) {
        s.add(0, Matrix((a.value().array() > 0.0).select(g.array(), 0.0)));
    });
}

Tensor exp(const Tensor& a) {
    Matrix y = a.value().array().exp();
    Matrix y_copy = y;
    return tape_of(a).record(std::move(y), {a}, [y_copy](const Matrix& g, GradSink& s) {
        s.add(0, g.cwiseProduct(y_copy));
    });
}

Tensor square(const Tensor& a) {
    Matrix y = a.value().array().square();
    return tape_of(a).record(std::move(y), {a}, [a](const Matrix& g, GradSink& s) {
        s.add(0, Matrix(2.0 * g.array() * a.value().array()));
    });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    Matrix y = a.value().cwiseMax(lo).cwiseMin(hi);
    return tape_of(a).record(std::move(y), {a}, [a, lo, hi](const Matrix& g, GradSink& s) {
        const auto& v = a.value().array();
        s.add(0, Matrix((v >= lo && v <= hi).select(g.array(), 0.0)));
    });
}

Tensor sum(const Tensor& a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    const Index r = a.rows();
    const Index c = a.cols();
    return tape_of(a).record(std::move(out), {a}, [r, c](const Matrix& g, GradSink& s) {
        s.add(0, Matrix::Constant(r, c, g(0, 0)));
    });
}

Tensor mean(const Tensor& a) {
    const double n = static_cast<double>(a.value().size());
    return scale(sum(a), 1.0 / n);
}

Tensor row_sum(const Tensor& a) {
    Matrix out = a.value().rowwise().sum();
    const Index c = a.cols();
    return tape_of(a).record(std::move(out), {a}, [c](const Matrix& g, GradSink& s) {
        s.add(0, g.col(0).replicate(1, c));
    });
}

Tensor l2_norm(const Tensor& a, Index group) {
    const Index cols = a.cols();
    if (group == 0) group = cols;
    if (group <= 0 || cols % group != 0) {
        throw Error(ErrorKind::ShapeMismatch, "l2_norm: group width does not divide the column count");
    }
    const Index groups = cols / group;
    const Index rows = a.rows();
    Matrix out(rows, groups);
    for (Index k = 0; k < groups; ++k) {
        out.col(k) = a.value().middleCols(k * group, group).rowwise().norm();
    }
    Matrix norms = out;
    return tape_of(a).record(std::move(out), {a}, [a, norms, group, groups, rows](const Matrix& g, GradSink& s) {
        Matrix ga = Matrix::Zero(rows, groups * group);
        for (Index k = 0; k < groups; ++k) {
            for (Index r = 0; r < rows; ++r) {
                const double n = norms(r, k);
                if (n > 0.0) {
                    ga.block(r, k * group, 1, group) =
                        (g(r, k) / n) * a.value().block(r, k * group, 1, group);
                }
            }
        }
        s.add(0, ga);
    });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
    const Index rows = logits.rows();
    const Index cols = logits.cols();
    if (static_cast<Index>(labels.size()) != rows) {
        throw Error(ErrorKind::ShapeMismatch, "softmax_cross_entropy: label count differs from batch size");
    }
    Matrix probs(rows, cols);
    double loss = 0.0;
    for (Index r = 0; r < rows; ++r) {
        const int y = labels[r];
        if (y < 0 || y >= cols) throw Error(ErrorKind::ShapeMismatch, "label out of range");
        const double m = logits.value().row(r).maxCoeff();
        const Eigen::RowVectorXd e = (logits.value().row(r).array() - m).exp();
        const double z = e.sum();
        probs.row(r) = e / z;
        loss += -(logits.value()(r, y) - m - std::log(z));
    }
    Matrix out(1, 1);
    out(0, 0) = loss / static_cast<double>(rows);
    std::vector<int> ys(labels.begin(), labels.end());
    return tape_of(logits).record(std::move(out), {logits}, [probs, ys, rows](const Matrix& g, GradSink& s) {
        Matrix d = probs;
        for (Index r = 0; r < rows; ++r) d(r, ys[r]) -= 1.0;
        s.add(0, d * (g(0, 0) / static_cast<double>(rows)));
    });
}

Tensor reparameterized_sample(const Tensor& mu, const Tensor& logvar, const Matrix& noise) {
    if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols()) shape_error("reparameterized_sample", mu, logvar);
    if (noise.rows() != mu.rows() || noise.cols() != mu.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "reparameterized_sample: noise shape differs");
    }
    Tape& t = tape_of(mu);
    return mu + exp(scale(logvar, 0.5)) * t.constant(noise);
}

Tensor kl_diag_gaussians_rows(const Tensor& mu_q, const Tensor& logvar_q,
                              const Tensor& mu_p, const Tensor& logvar_p) {
    for (const Tensor* t : {&logvar_q, &mu_p, &logvar_p}) {
        if (t->rows() != mu_q.rows() || t->cols() != mu_q.cols()) shape_error("kl_diag_gaussians", mu_q, *t);
    }
    // 0.5 * sum(lv_p - lv_q + (exp(lv_q) + (mu_q - mu_p)^2) / exp(lv_p) - 1)
    const Tensor diff = mu_q - mu_p;
    const Tensor ratio = (exp(logvar_q) + square(diff)) * exp(neg(logvar_p));
    const Tensor terms = add_scalar(logvar_p - logvar_q + ratio, -1.0);
    return scale(row_sum(terms), 0.5);
}

Tensor kl_diag_gaussians(const Tensor& mu_q, const Tensor& logvar_q,
                         const Tensor& mu_p, const Tensor& logvar_p) {
    const Tensor rows = kl_diag_gaussians_rows(mu_q, logvar_q, mu_p, logvar_p);
    return scale(sum(rows), 1.0 / static_cast<double>(rows.rows()));
}

}  // namespace a2m::ad
