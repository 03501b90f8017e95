#include <cmath>
#include <filesystem>
#include <functional>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"

#include "a2m/autodiff/adam.hpp"
#include "a2m/autodiff/checkpoint.hpp"
#include "a2m/autodiff/nn.hpp"
#include "a2m/autodiff/ops.hpp"
#include "a2m/error.hpp"

using namespace a2m;
using namespace a2m::ad;

namespace {

using gradcheck::kOpTolerance;
using gradcheck::random_matrix;

}  // namespace

TEST_CASE("elementwise and matrix ops pass gradient checks") {
    std::mt19937_64 rng(1);
    const Matrix a = random_matrix(4, 3, rng), b = random_matrix(4, 3, rng), row = random_matrix(1, 3, rng);
    const Matrix w = random_matrix(3, 5, rng), col = random_matrix(4, 1, rng);

    CHECK(gradcheck::inputs({a, w}, [](Tape&, const std::vector<Tensor>& x) { return matmul(x[0], x[1]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, b}, [](Tape&, const std::vector<Tensor>& x) { return x[0] + x[1]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, row}, [](Tape&, const std::vector<Tensor>& x) { return x[0] + x[1]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, b}, [](Tape&, const std::vector<Tensor>& x) { return x[0] - x[1]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, row}, [](Tape&, const std::vector<Tensor>& x) { return x[0] - x[1]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, b}, [](Tape&, const std::vector<Tensor>& x) { return x[0] * x[1]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, row}, [](Tape&, const std::vector<Tensor>& x) { return x[0] * x[1]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a, col}, [](Tape&, const std::vector<Tensor>& x) { return mul_rows(x[0], x[1]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return 2.5 * x[0]; }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return add_scalar(x[0], 0.7); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return -x[0]; }) < kOpTolerance);
}

TEST_CASE("shape ops pass gradient checks") {
    std::mt19937_64 rng(2);
    const Matrix a = random_matrix(3, 4, rng), b = random_matrix(3, 2, rng), c = random_matrix(3, 1, rng);
    CHECK(gradcheck::inputs({a, b, c}, [](Tape&, const std::vector<Tensor>& x) { return concat({x[0], x[1], x[2]}); }) <
          kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return slice(x[0], 1, 2); }) < kOpTolerance);
    CHECK(gradcheck::inputs({b}, [](Tape&, const std::vector<Tensor>& x) { return tile_cols(x[0], 3); }) < kOpTolerance);
}

TEST_CASE("nonlinearities pass gradient checks") {
    std::mt19937_64 rng(3);
    Matrix a = random_matrix(5, 4, rng);
    // Keep relu and clamp away from their kinks.
    for (Index i = 0; i < a.size(); ++i) {
        if (std::abs(a.data()[i]) < 0.05) a.data()[i] = 0.3;
        if (std::abs(std::abs(a.data()[i]) - 0.8) < 0.05) a.data()[i] = 0.5;
    }
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return ad::tanh(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return sigmoid(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return relu(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return ad::exp(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return square(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return clamp(x[0], -0.8, 0.8); }) < kOpTolerance);
}

TEST_CASE("reductions pass gradient checks") {
    std::mt19937_64 rng(4);
    const Matrix a = random_matrix(4, 6, rng);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return sum(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return mean(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return row_sum(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return l2_norm(x[0]); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return l2_norm(x[0], 3); }) < kOpTolerance);
    CHECK(gradcheck::inputs({a}, [](Tape&, const std::vector<Tensor>& x) { return l2_norm(x[0], 2); }) < kOpTolerance);
}

TEST_CASE("l2_norm gradient at zero is zero") {
    Tape tape;
    const Tensor x = tape.variable(Matrix::Zero(2, 3));
    tape.backward(sum(l2_norm(x, 3)));
    CHECK(x.grad().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("probabilistic ops pass gradient checks") {
    std::mt19937_64 rng(5);
    const Matrix logits = random_matrix(5, 4, rng);
    const std::vector<int> labels = {0, 3, 1, 1, 2};
    CHECK(gradcheck::inputs({logits}, [&](Tape&, const std::vector<Tensor>& x) { return softmax_cross_entropy(x[0], labels); }) <
          kOpTolerance);

    const Matrix mu = random_matrix(3, 4, rng), lv = random_matrix(3, 4, rng, 0.5), noise = random_matrix(3, 4, rng);
    CHECK(gradcheck::inputs({mu, lv}, [&](Tape&, const std::vector<Tensor>& x) {
              return reparameterized_sample(x[0], x[1], noise);
          }) < kOpTolerance);

    const Matrix mu2 = random_matrix(3, 4, rng), lv2 = random_matrix(3, 4, rng, 0.5);
    CHECK(gradcheck::inputs({mu, lv, mu2, lv2}, [](Tape&, const std::vector<Tensor>& x) {
              return kl_diag_gaussians_rows(x[0], x[1], x[2], x[3]);
          }) < kOpTolerance);
    CHECK(gradcheck::inputs({mu, lv, mu2, lv2}, [](Tape&, const std::vector<Tensor>& x) {
              return kl_diag_gaussians(x[0], x[1], x[2], x[3]);
          }) < kOpTolerance);
}

TEST_CASE("softmax cross entropy and KL values match closed forms") {
    Tape tape;
    Matrix logits(1, 3);
    logits << 1.0, 2.0, 3.0;
    const std::vector<int> label = {2};
    const double expected = -3.0 + std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
    CHECK(softmax_cross_entropy(tape.constant(logits), label).scalar() == doctest::Approx(expected).epsilon(1e-14));

    // KL(N(1, e^0.5) || N(0, 1)) in one dimension.
    Matrix mq(1, 1), lq(1, 1), mp = Matrix::Zero(1, 1), lp = Matrix::Zero(1, 1);
    mq << 1.0;
    lq << 0.5;
    const double kl = 0.5 * (std::exp(0.5) + 1.0 - 1.0 - 0.5);
    CHECK(kl_diag_gaussians(tape.constant(mq), tape.constant(lq), tape.constant(mp), tape.constant(lp)).scalar() ==
          doctest::Approx(kl).epsilon(1e-14));
    CHECK(kl_diag_gaussians(tape.constant(mq), tape.constant(lq), tape.constant(mq), tape.constant(lq)).scalar() == 0.0);
}

TEST_CASE("shape mismatches throw") {
    Tape tape;
    const Tensor a = tape.constant(Matrix::Zero(2, 3)), b = tape.constant(Matrix::Zero(3, 2));
    CHECK_THROWS_AS(add(a, b), Error);
    CHECK_THROWS_AS(matmul(a, a), Error);
    CHECK_THROWS_AS(slice(a, 2, 2), Error);
    CHECK_THROWS_AS(tape.backward(a), Error);
    Tape other;
    CHECK_THROWS_AS(add(a, other.constant(Matrix::Zero(2, 3))), Error);
}

TEST_CASE("non-recording tape keeps no gradients") {
    Tape tape(false);
    Parameter p("p", Matrix::Ones(2, 2));
    const Tensor x = tape.parameter(p);
    const Tensor y = sum(x * x);
    CHECK(y.scalar() == 4.0);
    tape.backward(y);
    CHECK(p.grad.size() == 0);
}

TEST_CASE("parameters bind once per tape and accumulate gradients") {
    Parameter p("p", Matrix::Constant(1, 1, 3.0));
    Tape tape;
    const Tensor a = tape.parameter(p), b = tape.parameter(p);
    CHECK(a.id() == b.id());
    tape.backward(sum(a * b));
    CHECK(p.grad(0, 0) == doctest::Approx(6.0));
    Tape again;
    const Tensor c = again.parameter(p);
    again.backward(sum(c));
    CHECK(p.grad(0, 0) == doctest::Approx(7.0));
    p.zero_grad();
    CHECK(p.grad(0, 0) == 0.0);
}

TEST_CASE("Linear and GRU layers pass gradient checks") {
    Rng rng(6);
    std::mt19937_64 data(7);
    const Linear lin("lin", 4, 3, rng);
    const Matrix x = random_matrix(5, 4, data);
    const Matrix w = lin.weight.value, b = lin.bias.value;
    CHECK(gradcheck::inputs({x, w, b}, [](Tape&, const std::vector<Tensor>& in) { return matmul(in[0], in[1]) + in[2]; }) <
          kOpTolerance);

    GruParams g("gru", 4, 3, rng);
    const Matrix h = random_matrix(5, 3, data, 0.5);
    auto cell = [&](Tape& tape, const std::vector<Tensor>& in) {
        // Reference composition with the weights as differentiable inputs.
        const Index hd = 3;
        const Tensor gx = matmul(in[0], in[2]) + tape.constant(g.b_x.value);
        const Tensor hg = matmul(in[1], in[3]);
        const Tensor bh = tape.constant(g.b_h.value);
        const Tensor r = sigmoid(slice(gx, 0, hd) + slice(hg, 0, hd) + slice(bh, 0, hd));
        const Tensor z = sigmoid(slice(gx, hd, hd) + slice(hg, hd, hd) + slice(bh, hd, hd));
        const Tensor n = ad::tanh(slice(gx, 2 * hd, hd) + matmul(r * in[1], in[4]) + slice(bh, 2 * hd, hd));
        return n + z * (in[1] - n);
    };
    CHECK(gradcheck::inputs({x, h, g.w_x.value, g.w_hg.value, g.w_hn.value}, cell) < kOpTolerance);

    // gru_cell agrees with the reference composition above.
    Tape tape;
    const Tensor ref = cell(tape, {tape.constant(x), tape.constant(h), tape.constant(g.w_x.value),
                                   tape.constant(g.w_hg.value), tape.constant(g.w_hn.value)});
    const Tensor out = gru_cell(tape, tape.constant(x), tape.constant(h), g);
    CHECK((out.value() - ref.value()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("layer parameter gradients match finite differences") {
    Rng rng(8);
    std::mt19937_64 data(9);
    Linear lin("lin", 3, 2, rng);
    const Matrix x = random_matrix(2, 3, data), h = random_matrix(2, 4, data, 0.5), wout = random_matrix(2, 4, data);
    CHECK(gradcheck::parameters(lin.parameters(), [&](Tape& t) {
              return sum(ad::tanh(lin(t, t.constant(x))));
          }) < kOpTolerance);
    Tape tape;
    CHECK((lin(tape, tape.constant(x)).value() - ((x * lin.weight.value).rowwise() + lin.bias.value.row(0))).norm() <
          1e-14);

    GruParams g("gru", 3, 4, rng);
    CHECK(gradcheck::parameters(g.parameters(), [&](Tape& t) {
              return sum(gru_cell(t, t.constant(x), t.constant(h), g) * t.constant(wout));
          }) < kOpTolerance);

    GruStack stack("stack", 3, 4, 2, rng);
    CHECK(gradcheck::parameters(stack.parameters(), [&](Tape& t) {
              auto state = stack.zero_state(t, 2);
              stack.step(t, t.constant(x), state);
              return sum(stack.step(t, t.constant(x), state) * t.constant(wout));
          }) < kOpTolerance);
}

TEST_CASE("GRU stack steps and names its parameters") {
    Rng rng(10);
    GruStack s("gen", 5, 4, 2, rng);
    Tape tape;
    auto state = s.zero_state(tape, 3);
    CHECK(state.size() == 2);
    const Tensor y = s.step(tape, tape.constant(Matrix::Ones(3, 5)), state);
    CHECK(y.rows() == 3);
    CHECK(y.cols() == 4);
    CHECK(s.parameters().front()->name == "gen.l0.w_x");
    CHECK(s.parameters().back()->name == "gen.l1.b_h");
}

TEST_CASE("uniform init stays within 1/sqrt(fan_in)") {
    Rng rng(11);
    const Matrix m = uniform_init(50, 40, 16, rng);
    CHECK(m.cwiseAbs().maxCoeff() <= 0.25);
    CHECK(m.cwiseAbs().maxCoeff() > 0.2);
}

TEST_CASE("Adam step matches a hand computation") {
    AdamConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.01;
    Matrix p = Matrix::Constant(1, 1, 2.0);
    AdamState st;
    const Matrix g = Matrix::Constant(1, 1, 0.5);
    adam_step(p, g, st, cfg);
    // m_hat = g, v_hat = g^2 on the first step.
    const double expected = 2.0 - 0.1 * (0.5 / (0.5 + 1e-8) + 0.01 * 2.0);
    CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-15));
    adam_step(p, g, st, cfg);
    CHECK(st.step == 2);
}

TEST_CASE("Adam minimizes a quadratic") {
    Parameter p("p", Matrix::Constant(2, 1, 3.0));
    AdamConfig cfg;
    cfg.lr = 0.05;
    cfg.weight_decay = 0.0;
    Adam opt({&p}, cfg);
    for (int i = 0; i < 2000; ++i) {
        opt.zero_grad();
        Tape tape;
        const Tensor x = tape.parameter(p);
        tape.backward(sum(square(add_scalar(x, -1.0))));
        opt.step();
    }
    CHECK((p.value.array() - 1.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("checkpoints round trip by name and reject shape changes") {
    std::mt19937_64 rng(12);
    Parameter a("a", random_matrix(3, 2, rng)), b("b", random_matrix(1, 4, rng));
    const auto path = (std::filesystem::temp_directory_path() / "a2m_ckpt_test.bin").string();
    save_checkpoint(path, {&a, &b});
    Parameter a2("a", Matrix::Zero(3, 2)), b2("b", Matrix::Zero(1, 4));
    load_checkpoint(path, {&b2, &a2});
    CHECK(a2.value == a.value);
    CHECK(b2.value == b.value);
    CHECK(read_checkpoint(path).size() == 2);
    Parameter wrong("a", Matrix::Zero(2, 3));
    CHECK_THROWS_AS(load_checkpoint(path, {&wrong}), Error);
    Parameter missing("c", Matrix::Zero(1, 1));
    CHECK_THROWS_AS(load_checkpoint(path, {&missing}), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_checkpoint(path), Error);
}
