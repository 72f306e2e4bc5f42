#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eduvsum/core/types.hpp"
#include "eduvsum/eval/metrics.hpp"
#include "eduvsum/features/bundle.hpp"
#include "eduvsum/model/fusion_model.hpp"

namespace eduvsum::eval {

struct VideoResult {
    std::string video_id;
    double top1 = 0.0;
    double mae_fra = 0.0;
    double mae_seg = 0.0;
    std::vector<int> inherited_segments;

    bool operator==(const VideoResult&) const = default;
};

struct EvaluationReport {
    std::string model_id;
    std::string split_id;
    double top1 = 0.0;
    double top2 = 0.0;
    double top3 = 0.0;
    double mae_fra = 0.0;
    double mae_seg = 0.0;
    std::string backbone;
    int history = 0;
    std::string modalities;  // "v,a,t" style
    std::vector<VideoResult> per_video;
    nlohmann::json config;  // effective run configuration

    nlohmann::json to_json() const;
    static EvaluationReport from_json(const nlohmann::json& j);
};

struct EvaluationInput {
    const features::FeatureBundle* bundle = nullptr;
    const AnnotationSet* annotation = nullptr;
};

struct VideoPrediction {
    std::string video_id;
    std::vector<model::PredictionDistribution> frames;
    SegmentScores segments;
    double top1 = 0.0;
};

struct EvaluateOptions {
    std::string model_id;
    std::string split_id;
    bool round_segments = false;
    int jobs = 1;
    nlohmann::json config = nlohmann::json::object();
};

// Frame metrics pool every frame of every video, segment metrics every segment.
EvaluationReport evaluate(const model::FusionModel& model, std::span<const EvaluationInput> videos,
                          const EvaluateOptions& options, std::vector<VideoPrediction>* predictions = nullptr);

void write_report(const EvaluationReport& report, const std::filesystem::path& path);

}  // namespace eduvsum::eval
