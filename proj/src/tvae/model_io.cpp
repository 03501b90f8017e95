#include "a2m/tvae/model_io.hpp"

#include <fstream>

#include "a2m/autodiff/checkpoint.hpp"
#include "a2m/error.hpp"

namespace a2m::tvae {

using nlohmann::json;

void save_model(const std::string& path, const Action2MotionModel& model, const TrainConfig& train_cfg,
                const json& extra) {
    ad::save_checkpoint(path, model.parameters());
    json side = {{"format", "a2m-model"},
                 {"version", 1},
                 {"model", model.config().to_json()},
                 {"skeleton_hash", model.config().skeleton.hash()},
                 {"actions", model.config().actions},
                 {"variant", to_string(model.config().variant)},
                 {"train", train_cfg.to_json()}};
    if (!extra.empty()) side["extra"] = extra;
    std::ofstream out(path + ".json");
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path + ".json");
    out << side.dump(2) << '\n';
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path + ".json");
    json side;
    try {
        in >> side;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("model sidecar: ") + e.what());
    }
    if (side.value("format", "") != "a2m-model") throw Error(ErrorKind::SchemaViolation, path + ".json is not a model sidecar");
    SavedModel out;
    out.model = std::make_unique<Action2MotionModel>(ModelConfig::from_json(side.at("model")), 0);
    ad::load_checkpoint(path, out.model->parameters());
    out.sidecar = std::move(side);
    return out;
}

}  // namespace a2m::tvae
