#include "eduvsum/eval/plot.hpp"

#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::eval {

namespace {

constexpr int kWidth = 900, kHeight = 420;
constexpr int kLeft = 50, kRight = 20, kTop = 40, kBottom = 45;

const cv::Scalar kTruthColour(200, 110, 30);  // BGR
const cv::Scalar kPredColour(40, 40, 220);

}  // namespace

void plot_prediction_curves(std::span<const int> annotated_scores, std::span<const double> segment_predictions,
                            const std::string& caption, const std::filesystem::path& out_path) {
    if (annotated_scores.size() != segment_predictions.size()) {
        fail(ErrorKind::InvalidInput, "plot: ground truth and prediction lengths differ");
    }
    if (annotated_scores.empty()) fail(ErrorKind::InvalidInput, "plot: no segments");

    cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    const auto n = static_cast<double>(annotated_scores.size());
    auto px = [&](double seg) { return static_cast<int>(kLeft + plot_w * seg / n); };
    auto py = [&](double score) { return static_cast<int>(kTop + plot_h * (10.0 - score) / 9.0); };

    for (int s = 1; s <= 10; ++s) {
        cv::line(img, {kLeft, py(s)}, {kWidth - kRight, py(s)}, cv::Scalar(225, 225, 225), 1);
        cv::putText(img, std::to_string(s), {12, py(s) + 5}, cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(90, 90, 90), 1,
                    cv::LINE_AA);
    }
    cv::rectangle(img, {kLeft, kTop}, {kWidth - kRight, kTop + static_cast<int>(plot_h)}, cv::Scalar(120, 120, 120), 1);
    const int tick = std::max(1, static_cast<int>(n) / 10);
    for (int s = 0; s <= static_cast<int>(n); s += tick) {
        cv::putText(img, std::to_string(s), {px(s) - 4, kHeight - kBottom + 18}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
                    cv::Scalar(90, 90, 90), 1, cv::LINE_AA);
    }
    cv::putText(img, "segment", {kWidth / 2 - 30, kHeight - 8}, cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(60, 60, 60), 1,
                cv::LINE_AA);

    // Truth as steps, prediction as a line through segment centres.
    std::vector<cv::Point> truth;
    for (std::size_t s = 0; s < annotated_scores.size(); ++s) {
        truth.emplace_back(px(static_cast<double>(s)), py(annotated_scores[s]));
        truth.emplace_back(px(static_cast<double>(s + 1)), py(annotated_scores[s]));
    }
    cv::polylines(img, truth, false, kTruthColour, 2, cv::LINE_AA);
    std::vector<cv::Point> pred;
    for (std::size_t s = 0; s < segment_predictions.size(); ++s) {
        pred.emplace_back(px(static_cast<double>(s) + 0.5), py(segment_predictions[s]));
    }
    if (pred.size() == 1) pred.push_back(pred.front());
    cv::polylines(img, pred, false, kPredColour, 2, cv::LINE_AA);

    cv::putText(img, caption, {kLeft, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.55, cv::Scalar(20, 20, 20), 1, cv::LINE_AA);
    cv::line(img, {kWidth - 230, 20}, {kWidth - 205, 20}, kTruthColour, 2);
    cv::putText(img, "ground truth", {kWidth - 200, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.4, kTruthColour, 1, cv::LINE_AA);
    cv::line(img, {kWidth - 115, 20}, {kWidth - 90, 20}, kPredColour, 2);
    cv::putText(img, "predicted", {kWidth - 85, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.4, kPredColour, 1, cv::LINE_AA);

    bool ok = false;
    try {
        if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
        ok = cv::imwrite(out_path.string(), img);
    } catch (const std::exception& e) {
        fail(ErrorKind::Io, "cannot write plot " + out_path.string() + ": " + e.what());
    }
    if (!ok) fail(ErrorKind::Io, "cannot write plot " + out_path.string());
}

}  // namespace eduvsum::eval
