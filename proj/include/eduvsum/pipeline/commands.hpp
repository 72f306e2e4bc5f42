#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/eval/ablation.hpp"
#include "eduvsum/eval/report.hpp"
#include "eduvsum/features/bundle.hpp"
#include "eduvsum/model/trainer.hpp"
#include "eduvsum/pipeline/run_config.hpp"
#include "eduvsum/service/server.hpp"

namespace eduvsum::pipeline {

struct IngestSummary {
    int extracted = 0;
    int cache_hits = 0;
    std::vector<std::string> failures;  // "video_id: reason"
};

// Extracts and caches features for every manifest video. Per-video failures
// are collected, not thrown.
IngestSummary cmd_ingest(const RunConfig& config);

// Cached bundle or an Io error telling the user to run `eduvsum ingest`.
features::FeatureBundle load_features(const RunConfig& config, const std::string& video_id);

// Split over annotated videos; deterministic in config.seed.
SplitSpec make_split(const RunConfig& config, const DatasetManifest& manifest);

struct TrainSummary {
    std::filesystem::path model_path;
    model::TrainResult result;
};

// Writes <out>/model.eduvsum, <out>/loss.json and <out>/split.json.
TrainSummary cmd_train(const RunConfig& config);

// Evaluates <out>/model.eduvsum (or `model_path`) on the test split; writes
// <out>/report.json and <out>/curves/<video_id>.png.
eval::EvaluationReport cmd_eval(const RunConfig& config, const std::filesystem::path& model_path = {},
                                bool plots = true);

// Writes <out>/predictions/<video_id>.json and, when the video is annotated,
// <out>/curves/<video_id>.png. NotFound for ids outside the manifest.
std::filesystem::path cmd_predict(const RunConfig& config, const std::string& video_id,
                                  const std::filesystem::path& model_path = {});

struct AblationGrid {
    std::vector<std::string> backbones;
    std::vector<int> histories;
    std::vector<std::string> modality_sets;
};

// Train + eval for every grid point under <out>/ablation/<backbone>_h<h>_<mods>/,
// then <out>/ablation.csv and <out>/ablation.txt.
eval::AblationTable cmd_ablate(const RunConfig& config, const AblationGrid& grid);

struct ExportSummary {
    DatasetManifest manifest;
    std::vector<std::string> incomplete;
};

// `source` is an http(s) URL of a running service or a path to its database.
// Incomplete videos are left out unless allow_partial.
ExportSummary cmd_export(const std::string& source, bool allow_partial, const std::filesystem::path& out_path);

struct ServeOptions {
    std::filesystem::path db = "annotations.db";
    std::optional<std::filesystem::path> dataset;  // videos to import first
    service::ServerOptions server;
};

void cmd_serve(const ServeOptions& options);

// 0 ok, 1 validation / bad input, 2 I/O, 3 training divergence.
int exit_code_for(ErrorKind kind);

}  // namespace eduvsum::pipeline
