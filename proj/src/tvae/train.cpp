#include "a2m/tvae/train.hpp"

#include <algorithm>
#include <numeric>

#include "a2m/error.hpp"

namespace a2m::tvae {

using nlohmann::json;

namespace {

Matrix standard_normal(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    }
    return m;
}

}  // namespace

ElboTerms elbo_loss(Tape& tape, const Action2MotionModel& model, const data::TrainingTensors& batch,
                    const Eigen::VectorXd& forcing, const std::vector<Matrix>& noise, double lambda_kl,
                    double lambda_align) {
    const ModelConfig& cfg = model.config();
    const Index b = batch.batch();
    const int nj = cfg.joints();
    if (batch.joints != nj || static_cast<int>(noise.size()) < batch.window || forcing.size() != b) {
        throw Error(ErrorKind::ShapeMismatch, "elbo_loss: batch, forcing and noise sizes disagree with the model");
    }
    const double valid = batch.mask.sum();
    if (valid <= 0.0) throw Error(ErrorKind::EmptyDataset, "elbo_loss: batch has no valid frames");

    const bool all_forced = (forcing.array() == 1.0).all();
    const bool none_forced = (forcing.array() == 0.0).all();
    const Tensor forced = tape.constant(forcing);
    const Tensor free_rows = tape.constant((1.0 - forcing.array()).matrix());
    const Tensor onehot = tape.constant(batch.onehot);

    RecurrentState state = model.initial_state(tape, b);
    Tensor prev = tape.constant(Matrix::Zero(b, cfg.pose_dim()));
    Tensor recon_sum, kl_sum, align_sum;
    auto accumulate = [](Tensor& acc, const Tensor& v) { acc = acc.valid() ? acc + v : v; };

    for (int t = 0; t < batch.window; ++t) {
        const double c = batch.counters[t];
        const Tensor x = tape.constant(batch.poses[t]);
        const Tensor m = tape.constant(batch.mask.col(t));

        const Gaussian q = model.posterior_step(tape, x, onehot, c, state);
        Tensor enc;
        const Gaussian p = model.prior_step(tape, prev, onehot, c, state, &enc);
        const Tensor z = ad::reparameterized_sample(q.mu, q.logvar, noise[t]);
        const GeneratorOutput g = model.generator_step(tape, z, prev, onehot, c, state, &enc);

        const Tensor gt_joints = ad::slice(x, 0, 3 * nj);
        const Tensor recon_rows = ad::row_sum(ad::l2_norm(g.pose.joints - gt_joints, 3));
        accumulate(recon_sum, ad::sum(ad::mul_rows(recon_rows, m)));
        accumulate(kl_sum, ad::sum(ad::mul_rows(ad::kl_diag_gaussians_rows(q.mu, q.logvar, p.mu, p.logvar), m)));
        if (is_glmi(cfg.variant)) {
            const Tensor align_rows = ad::l2_norm(ad::slice(x, 3 * nj, 3) - g.pose.velocity);
            accumulate(align_sum, ad::sum(ad::mul_rows(align_rows, m)));
        }

        if (all_forced) {
            prev = x;
        } else if (none_forced) {
            prev = g.pose_vector;
        } else {
            prev = ad::mul_rows(x, forced) + ad::mul_rows(g.pose_vector, free_rows);
        }
    }

    ElboTerms out;
    out.recon = ad::scale(recon_sum, 1.0 / valid);
    out.kl = ad::scale(kl_sum, 1.0 / valid);
    out.align = align_sum.valid() ? ad::scale(align_sum, 1.0 / valid) : tape.constant(Matrix::Zero(1, 1));
    out.total = out.recon + ad::scale(out.kl, lambda_kl);
    if (align_sum.valid()) out.total = out.total + ad::scale(out.align, lambda_align);
    return out;
}

void TrainConfig::validate() const {
    if (batch < 1 || epochs < 1 || window < 1) throw Error(ErrorKind::InvalidArgument, "batch, epochs and window must be >= 1");
    if (teacher_forcing < 0.0 || teacher_forcing > 1.0) {
        throw Error(ErrorKind::InvalidArgument, "teacher_forcing must lie in [0, 1]");
    }
    if (kl_start < 0.0 || kl_end < 0.0 || lambda_align < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "loss weights must be >= 0");
    }
}

json TrainConfig::to_json() const {
    return {{"batch", batch},
            {"epochs", epochs},
            {"window", window},
            {"teacher_forcing", teacher_forcing},
            {"kl_start", kl_start},
            {"kl_end", kl_end},
            {"lambda_align", lambda_align},
            {"lr", adam.lr},
            {"beta1", adam.beta1},
            {"beta2", adam.beta2},
            {"eps", adam.eps},
            {"weight_decay", adam.weight_decay},
            {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
    TrainConfig c;
    c.batch = j.value("batch", c.batch);
    c.epochs = j.value("epochs", c.epochs);
    c.window = j.value("window", c.window);
    c.teacher_forcing = j.value("teacher_forcing", c.teacher_forcing);
    c.kl_start = j.value("kl_start", c.kl_start);
    c.kl_end = j.value("kl_end", c.kl_end);
    c.lambda_align = j.value("lambda_align", c.lambda_align);
    c.adam.lr = j.value("lr", c.adam.lr);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.eps = j.value("eps", c.adam.eps);
    c.adam.weight_decay = j.value("weight_decay", c.adam.weight_decay);
    c.seed = j.value("seed", c.seed);
    return c;
}

double kl_weight(const TrainConfig& cfg, int epoch) {
    if (cfg.epochs <= 1) return cfg.kl_end;
    const double f = std::clamp(static_cast<double>(epoch) / (cfg.epochs - 1), 0.0, 1.0);
    return cfg.kl_start + f * (cfg.kl_end - cfg.kl_start);
}

Eigen::VectorXd draw_teacher_forcing(std::mt19937_64& rng, int batch, double rate) {
    std::bernoulli_distribution coin(rate);
    Eigen::VectorXd v(batch);
    for (int i = 0; i < batch; ++i) v(i) = coin(rng) ? 1.0 : 0.0;
    return v;
}

TrainHistory train(Action2MotionModel& model, const data::MotionDataset& dataset, const TrainConfig& cfg,
                   const std::function<void(const EpochLog&)>& on_epoch) {
    cfg.validate();
    if (dataset.clips.empty()) throw Error(ErrorKind::EmptyDataset, "training set has no clips");
    if (dataset.skeleton.hash() != model.config().skeleton.hash()) {
        throw Error(ErrorKind::InvalidArgument, "dataset skeleton differs from the model skeleton");
    }
    if (dataset.actions != model.config().actions) {
        throw Error(ErrorKind::InvalidArgument, "dataset action vocabulary differs from the model");
    }
    const data::TrainingTensors all = data::to_training_tensors(dataset, cfg.window);
    const int n = all.batch();
    std::mt19937_64 rng(cfg.seed);
    ad::Adam opt(model.parameters(), cfg.adam);

    TrainHistory history;
    std::vector<int> order(n);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lambda_kl = kl_weight(cfg, epoch);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        EpochLog log;
        log.epoch = epoch;
        log.lambda_kl = lambda_kl;
        for (int start = 0; start < n; start += cfg.batch) {
            const int count = std::min(cfg.batch, n - start);
            const std::vector<int> rows(order.begin() + start, order.begin() + start + count);
            const data::TrainingTensors batch = all.select(rows);
            const Eigen::VectorXd forcing = draw_teacher_forcing(rng, count, cfg.teacher_forcing);
            std::vector<Matrix> noise;
            for (int t = 0; t < cfg.window; ++t) noise.push_back(standard_normal(rng, count, model.config().z_dim));

            Tape tape;
            const ElboTerms loss = elbo_loss(tape, model, batch, forcing, noise, lambda_kl, cfg.lambda_align);
            opt.zero_grad();
            tape.backward(loss.total);
            opt.step();

            const double w = static_cast<double>(count) / n;
            log.total += w * loss.total.scalar();
            log.recon += w * loss.recon.scalar();
            log.kl += w * loss.kl.scalar();
            log.align += w * loss.align.scalar();
        }
        history.epochs.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    return history;
}

}  // namespace a2m::tvae
