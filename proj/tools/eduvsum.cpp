// eduvsum: ingest | train | eval | predict | ablate | export | serve
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/pipeline/commands.hpp"

using namespace eduvsum;

namespace {

void add_run_options(CLI::App& app, pipeline::RunConfig& c) {
    app.add_option("--dataset", c.dataset, "Dataset manifest (JSON)")->capture_default_str();
    app.add_option("--media-root", c.media_root, "Base for relative media/subtitle paths [default: dataset dir]");
    app.add_option("--cache", c.cache, "Feature cache directory")->capture_default_str();
    app.add_option("--out", c.out, "Output directory for models, reports and plots")->capture_default_str();
    app.add_option("--backbone", c.visual_backend, "Visual backbone: vgg16, resnet50, inceptionv3, xception, stub")
        ->capture_default_str();
    app.add_option("--audio-backend", c.audio_backend, "Audio features: shortterm34, stub")->capture_default_str();
    app.add_option("--text-backend", c.text_backend, "Text encoder: bert-base, stub")->capture_default_str();
    app.add_option("--stub-dim", c.stub_dim, "Feature width of stub backends")->capture_default_str();
    app.add_option("--weights-dir", c.weights_dir, "Directory holding <backbone>.onnx")->capture_default_str();
    app.add_option("--text-model-dir", c.text_model_dir, "Directory holding vocab.txt and model.onnx")
        ->capture_default_str();
    app.add_option("--sample-rate", c.sample_rate, "Sampled frames per second")->capture_default_str();
    app.add_option("--segment-length", c.segment_length, "Segment length in seconds")->capture_default_str();
    app.add_flag("--save-frames", c.save_frames, "Also write sampled frames as PNG under the cache");
    app.add_option("--modalities", c.modalities, "Enabled modalities, e.g. v,a,t or v,t")->capture_default_str();
    app.add_option("--history", c.history, "History window h (preceding frames)")->capture_default_str();
    app.add_option("--rnn-units", c.rnn_units, "Recurrent units per direction (64 unless --nonpaper-units)")
        ->capture_default_str();
    app.add_flag("--nonpaper-units", c.nonpaper_units, "Allow --rnn-units other than 64");
    app.add_option("--dropout", c.dropout, "Dropout on recurrent layer outputs")->capture_default_str();
    app.add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
    app.add_option("--learning-rate", c.learning_rate, "Adam learning rate")->capture_default_str();
    app.add_option("--batch-size", c.batch_size, "Minibatch size")->capture_default_str();
    app.add_option("--train-fraction", c.train_fraction, "Share of annotated videos used for training")
        ->capture_default_str();
    app.add_option("--seed", c.seed, "Seed for split, initialisation, shuffling, dropout and stubs")
        ->capture_default_str();
    app.add_option("--jobs", c.jobs, "Worker threads for ingest and eval")->capture_default_str();
    app.add_flag("--round-segments", c.round_segments, "Round segment predictions before segment MAE");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segment importance prediction for educational videos"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file with option values (command line wins)");
    pipeline::RunConfig config;
    add_run_options(app, config);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "Extract and cache features for every manifest video");
    auto* train = app.add_subcommand("train", "Train on the training split");
    std::filesystem::path model_path;
    auto* evaluate = app.add_subcommand("eval", "Evaluate on the test split; writes report.json and curves");
    evaluate->add_option("--model", model_path, "Model file [default: <out>/model.eduvsum]");
    auto* predict = app.add_subcommand("predict", "Per-segment scores and a curve plot for one video");
    std::string video_id;
    predict->add_option("--video", video_id, "Video id")->required();
    predict->add_option("--model", model_path, "Model file [default: <out>/model.eduvsum]");

    auto* ablate = app.add_subcommand("ablate", "Train and evaluate a backbone x history x modality grid");
    pipeline::AblationGrid grid{{"vgg16", "resnet50", "inceptionv3", "xception"}, {1, 2, 3}, {"v,a", "v,t", "v,a,t"}};
    ablate->add_option("--backbones", grid.backbones, "Backbones")->delimiter(',')->capture_default_str();
    ablate->add_option("--histories", grid.histories, "History windows")->delimiter(',')->capture_default_str();
    ablate->add_option("--modality-sets", grid.modality_sets, "Modality sets separated by ';', e.g. \"v,a;v,t\"")
        ->delimiter(';')
        ->capture_default_str();

    auto* exporter = app.add_subcommand("export", "Write a dataset manifest from the annotation store");
    std::string source = "annotations.db";
    bool allow_partial = false;
    std::filesystem::path export_path = "dataset.json";
    exporter->add_option("--source", source, "Service URL (http://host:port) or database path")->capture_default_str();
    exporter->add_flag("--allow-partial", allow_partial, "Keep partially annotated videos, flagged as partial");
    exporter->add_option("--output", export_path, "Manifest to write")->capture_default_str();

    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    pipeline::ServeOptions serve_opts;
    std::filesystem::path ui_root;
    std::filesystem::path import_path;
    serve->add_option("--port", serve_opts.server.port, "Port (0 picks one)")->capture_default_str();
    serve->add_option("--host", serve_opts.server.host, "Bind address")->capture_default_str();
    serve->add_option("--db", serve_opts.db, "SQLite database file")->capture_default_str();
    serve->add_option("--ui-root", ui_root, "Directory with the annotation UI's static files");
    serve->add_option("--import", import_path, "Manifest whose videos are loaded into the store");
    serve->add_option("--cors-origin", serve_opts.server.cors_origin, "Allowed CORS origin")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*ingest) {
            const auto summary = pipeline::cmd_ingest(config);
            return summary.failures.empty() ? 0 : 2;
        }
        if (*train) {
            const auto s = pipeline::cmd_train(config);
            std::cout << s.model_path.string() << '\n';
        } else if (*evaluate) {
            pipeline::cmd_eval(config, model_path);
            std::cout << (config.out / "report.json").string() << '\n';
        } else if (*predict) {
            std::cout << pipeline::cmd_predict(config, video_id, model_path).string() << '\n';
        } else if (*ablate) {
            std::cout << pipeline::cmd_ablate(config, grid).to_text();
        } else if (*exporter) {
            const auto s = pipeline::cmd_export(source, allow_partial, export_path);
            std::cout << export_path.string() << ": " << s.manifest.videos.size() << " videos\n";
        } else if (*serve) {
            serve_opts.server.media_root = config.media_root.value_or(".");
            if (!ui_root.empty()) serve_opts.server.ui_root = ui_root;
            if (!import_path.empty()) serve_opts.dataset = import_path;
            pipeline::cmd_serve(serve_opts);
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return pipeline::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
