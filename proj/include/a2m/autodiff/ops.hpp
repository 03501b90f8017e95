#pragma once

#include <span>
#include <vector>

#include "a2m/autodiff/tape.hpp"

namespace a2m::ad {

// Shapes are (rows = batch, cols = features). The only broadcast is a 1xN
// right operand of add/sub/mul against a BxN left operand, and BxN against
// a Bx1 column in mul_rows.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Scales row i of a by column entry m(i, 0).
Tensor mul_rows(const Tensor& a, const Tensor& m);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor concat(const std::vector<Tensor>& parts);  // along columns
Tensor slice(const Tensor& a, Index col_begin, Index col_count);
// Repeats the columns of a `times` times: [a a ... a].
Tensor tile_cols(const Tensor& a, Index times);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor square(const Tensor& a);
// Elementwise clamp; zero gradient outside [lo, hi].
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);   // 1x1
Tensor mean(const Tensor& a);  // 1x1
Tensor row_sum(const Tensor& a);  // Bx1
// Euclidean norm of consecutive column groups of width `group`
// (group = 0 means the whole row): result is B x (cols / group). The
// gradient at a zero norm is taken as zero.
Tensor l2_norm(const Tensor& a, Index group = 0);

// Mean over rows of -log softmax(logits)[label].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

// mu + exp(logvar / 2) * noise; the noise is a constant.
Tensor reparameterized_sample(const Tensor& mu, const Tensor& logvar, const Matrix& noise);

// KL(N(mu_q, exp(logvar_q)) || N(mu_p, exp(logvar_p))) summed over columns,
// one entry per row (Bx1).
Tensor kl_diag_gaussians_rows(const Tensor& mu_q, const Tensor& logvar_q,
                              const Tensor& mu_p, const Tensor& logvar_p);
// Same, averaged over the batch (1x1).
Tensor kl_diag_gaussians(const Tensor& mu_q, const Tensor& logvar_q,
                         const Tensor& mu_p, const Tensor& logvar_p);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

}  // namespace a2m::ad
