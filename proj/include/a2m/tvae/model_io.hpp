#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "a2m/tvae/model.hpp"
#include "a2m/tvae/train.hpp"

namespace a2m::tvae {

struct SavedModel {
    std::unique_ptr<Action2MotionModel> model;
    nlohmann::json sidecar;
};

// Writes `<path>` (binary parameters) and `<path>.json` (model config,
// skeleton hash, action vocabulary, decoder variant, training config).
void save_model(const std::string& path, const Action2MotionModel& model, const TrainConfig& train_cfg,
                const nlohmann::json& extra = nlohmann::json::object());
SavedModel load_model(const std::string& path);

}  // namespace a2m::tvae
