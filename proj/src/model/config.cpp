#include "eduvsum/model/config.hpp"

#include <cmath>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::model {

using nlohmann::json;

void ModelConfig::validate() const {
    if (modalities.count() == 0) fail(ErrorKind::InvalidConfig, "at least one modality must be enabled");
    if (classes != kClasses) fail(ErrorKind::InvalidConfig, "classes must be 10");
    if (dense_sizes != kDenseSizes) fail(ErrorKind::InvalidConfig, "dense sizes must be (32, 16)");
    if (rnn_units <= 0) fail(ErrorKind::InvalidConfig, "rnn_units must be positive");
    if (rnn_units != kRnnUnits && !nonpaper_units) {
        fail(ErrorKind::InvalidConfig, "rnn_units other than 64 requires nonpaper_units (--nonpaper-units)");
    }
    if (history < 0) fail(ErrorKind::InvalidConfig, "history window must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorKind::InvalidConfig, "dropout must be in [0, 1)");
    if (epochs < 0) fail(ErrorKind::InvalidConfig, "epochs must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        fail(ErrorKind::InvalidConfig, "learning rate must be positive");
    }
    if (batch_size <= 0) fail(ErrorKind::InvalidConfig, "batch size must be positive");
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        if (modalities.contains(m) && input_dim(m) <= 0) {
            fail(ErrorKind::InvalidConfig, std::string(features::to_string(m)) + " input width must be positive");
        }
    }
}

json ModelConfig::to_json() const {
    return json{{"visual_backend", visual_backend},
                {"modalities", modalities.to_string()},
                {"input_dims", {{"visual", input_dims[0]}, {"audio", input_dims[1]}, {"text", input_dims[2]}}},
                {"history", history},
                {"rnn_units", rnn_units},
                {"nonpaper_units", nonpaper_units},
                {"dense_sizes", dense_sizes},
                {"classes", classes},
                {"dropout", dropout},
                {"epochs", epochs},
                {"optimizer", "adam"},
                {"learning_rate", learning_rate},
                {"batch_size", batch_size},
                {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const json& j) {
    ModelConfig c;
    try {
        c.visual_backend = j.at("visual_backend").get<std::string>();
        c.modalities = ModalitySet::parse(j.at("modalities").get<std::string>());
        const auto& dims = j.at("input_dims");
        c.input_dims = {dims.at("visual").get<int>(), dims.at("audio").get<int>(), dims.at("text").get<int>()};
        c.history = j.at("history").get<int>();
        c.rnn_units = j.at("rnn_units").get<int>();
        c.nonpaper_units = j.value("nonpaper_units", false);
        c.dense_sizes = j.at("dense_sizes").get<std::array<int, 2>>();
        c.classes = j.at("classes").get<int>();
        c.dropout = j.at("dropout").get<double>();
        c.epochs = j.at("epochs").get<int>();
        if (j.value("optimizer", std::string("adam")) != "adam") fail(ErrorKind::InvalidConfig, "only adam is supported");
        c.learning_rate = j.at("learning_rate").get<double>();
        c.batch_size = j.at("batch_size").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

long long bilstm_parameter_count(int input_dim, int units) {
    return 2LL * 4 * units * (static_cast<long long>(input_dim) + units + 1);
}

long long expected_parameter_count(const ModelConfig& c) {
    long long total = 0;
    int branches = 0;
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        if (!c.modalities.contains(m)) continue;
        total += bilstm_parameter_count(c.input_dim(m), c.rnn_units);
        ++branches;
    }
    total += bilstm_parameter_count(2 * c.rnn_units * branches, c.rnn_units);
    int width = 2 * c.rnn_units;
    for (int size : c.dense_sizes) {
        total += static_cast<long long>(width) * size + size;
        width = size;
    }
    total += static_cast<long long>(width) * c.classes + c.classes;
    return total;
}

}  // namespace eduvsum::model
