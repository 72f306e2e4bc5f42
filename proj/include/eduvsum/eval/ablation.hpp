#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eduvsum/eval/report.hpp"

namespace eduvsum::eval {

struct AblationRow {
    std::string backbone;
    int history = 0;
    std::string modalities;
    double top1 = 0.0, top2 = 0.0, top3 = 0.0;
    double mae_fra = 0.0, mae_seg = 0.0;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    // Keys ("backbone h=.. v,a,t") that appeared more than once; the first report wins.
    std::vector<std::string> duplicates;

    std::string to_csv() const;
    std::string to_text() const;
};

// Rows grouped by backbone (vgg16, resnet50, inceptionv3, xception, then any
// other name alphabetically), then by history and modality set.
AblationTable build_ablation_table(std::span<const EvaluationReport> reports);

void write_ablation(const AblationTable& table, const std::filesystem::path& csv_path,
                    const std::filesystem::path& text_path);

}  // namespace eduvsum::eval
