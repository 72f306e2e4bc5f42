#include "eduvsum/pipeline/run_config.hpp"

#include "eduvsum/core/errors.hpp"

namespace eduvsum::pipeline {

using features::Modality;

std::filesystem::path RunConfig::resolved_media_root() const {
    if (media_root) return *media_root;
    return dataset.has_parent_path() ? dataset.parent_path() : std::filesystem::path(".");
}

features::FeatureConfig RunConfig::feature_config() const {
    features::FeatureConfig c;
    c.visual = features::make_backend_spec(Modality::Visual, visual_backend, stub_dim);
    c.audio = features::make_backend_spec(Modality::Audio, audio_backend, stub_dim);
    c.text = features::make_backend_spec(Modality::Text, text_backend, stub_dim);
    c.sample_rate = sample_rate;
    c.segment_length = segment_length;
    // Real backends ignore the seed; keep it out of their cache fingerprint.
    if (c.visual.is_stub() || c.audio.is_stub() || c.text.is_stub()) c.stub_seed = seed;
    return c;
}

model::ModelConfig RunConfig::model_config(const std::array<int, 3>& input_dims) const {
    model::ModelConfig c;
    c.visual_backend = visual_backend;
    c.modalities = features::ModalitySet::parse(modalities);
    c.input_dims = input_dims;
    c.history = history;
    c.rnn_units = rnn_units;
    c.nonpaper_units = nonpaper_units;
    c.dropout = dropout;
    c.epochs = epochs;
    c.learning_rate = learning_rate;
    c.batch_size = batch_size;
    c.seed = seed;
    c.validate();
    return c;
}

void RunConfig::validate() const {
    feature_config();
    model_config({1, 1, 1});
    if (!(sample_rate > 0.0)) fail(ErrorKind::InvalidConfig, "sample rate must be positive");
    if (!(segment_length > 0.0)) fail(ErrorKind::InvalidConfig, "segment length must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorKind::InvalidConfig, "train fraction must be in (0, 1)");
    if (jobs < 1) fail(ErrorKind::InvalidConfig, "jobs must be >= 1");
}

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{{"dataset", dataset.string()},
                          {"media_root", resolved_media_root().string()},
                          {"cache", cache.string()},
                          {"out", out.string()},
                          {"visual_backend", visual_backend},
                          {"audio_backend", audio_backend},
                          {"text_backend", text_backend},
                          {"stub_dim", stub_dim},
                          {"weights_dir", weights_dir.string()},
                          {"text_model_dir", text_model_dir.string()},
                          {"sample_rate", sample_rate},
                          {"segment_length", segment_length},
                          {"modalities", features::ModalitySet::parse(modalities).to_string()},
                          {"history", history},
                          {"rnn_units", rnn_units},
                          {"nonpaper_units", nonpaper_units},
                          {"dropout", dropout},
                          {"epochs", epochs},
                          {"learning_rate", learning_rate},
                          {"batch_size", batch_size},
                          {"train_fraction", train_fraction},
                          {"seed", seed},
                          {"round_segments", round_segments}};
}

}  // namespace eduvsum::pipeline
