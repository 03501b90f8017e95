#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2m/autodiff/adam.hpp"
#include "a2m/datasets/dataset.hpp"
#include "a2m/tvae/model.hpp"

namespace a2m::tvae {

struct ElboTerms {
    Tensor total;
    Tensor recon;  // sum over joints of the per-joint distance
    Tensor kl;
    Tensor align;  // root-velocity error, zero for plain and lie
};

// Negative ELBO of one batch. `forcing` holds one 0/1 entry per sequence:
// forced rows feed the ground-truth previous pose to the prior and the
// generator, the others feed back the generated pose. `noise` holds one
// B x z_dim standard-normal matrix per time step. Every term is averaged
// over the batch and the unmasked time steps.
ElboTerms elbo_loss(Tape& tape, const Action2MotionModel& model, const data::TrainingTensors& batch,
                    const Eigen::VectorXd& forcing, const std::vector<Matrix>& noise, double lambda_kl,
                    double lambda_align);

struct TrainConfig {
    int batch = 128;
    int epochs = 200;
    int window = 16;
    double teacher_forcing = 0.6;
    double kl_start = 0.001;
    double kl_end = 0.01;
    double lambda_align = 10.0;
    ad::AdamConfig adam;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

// Linear from kl_start at the first epoch to kl_end at the last.
double kl_weight(const TrainConfig& cfg, int epoch);

// One Bernoulli(rate) draw per sequence.
Eigen::VectorXd draw_teacher_forcing(std::mt19937_64& rng, int batch, double rate);

struct EpochLog {
    int epoch = 0;
    double lambda_kl = 0.0;
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
    double align = 0.0;
};

struct TrainHistory {
    std::vector<EpochLog> epochs;
};

TrainHistory train(Action2MotionModel& model, const data::MotionDataset& dataset, const TrainConfig& cfg,
                   const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace a2m::tvae
