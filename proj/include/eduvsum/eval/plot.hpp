#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace eduvsum::eval {

// Ground-truth step curve and predicted curve over segment index on a 1..10
// axis, written as PNG. Throws InvalidInput on length mismatch, Io when the
// image cannot be written.
void plot_prediction_curves(std::span<const int> annotated_scores, std::span<const double> segment_predictions,
                            const std::string& caption, const std::filesystem::path& out_path);

}  // namespace eduvsum::eval
