#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "eduvsum/core/types.hpp"
#include "eduvsum/eval/report.hpp"

namespace eduvsum::fixtures {

// Paints frame `index` into a packed BGR24 buffer of width * height * 3 bytes.
using Painter = std::function<void(int index, std::uint8_t* bgr, int width, int height)>;
// Sample value in [-1, 1] at time t seconds.
using Signal = std::function<double(double t)>;

struct SyntheticVideo {
    int width = 32;
    int height = 24;
    int fps = 30;
    int frames = 90;
    Painter paint = {};  // default: frame index in the first pixels, see frame_index_painter
    bool audio = true;
    int audio_rate = 16000;
    double audio_seconds = -1.0;  // < 0: same as the video
    Signal signal = {};           // default: silence
};

// Uncompressed AVI: rawvideo bgr24 plus mono pcm_s16le.
void write_avi(const std::filesystem::path& path, const SyntheticVideo& spec);

// Writes the frame index as (index & 255, index >> 8, 0) over the whole frame.
Painter frame_index_painter();
int decode_frame_index(const std::uint8_t* rgb);

// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& name);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

// Five 30 s videos across two topics (3 + 2) whose frames, audio level and
// subtitles are constant inside each segment and depend only on its score.
// Writes media, subtitles and dataset.json into `dir`; returns the manifest.
DatasetManifest write_toy_dataset(const std::filesystem::path& dir, int videos = 5, double seconds = 30.0);

// Score of segment s in toy video v.
int toy_score(int video, int segment);

// The 24 reference ablation rows in fixtures/ablation_rows.csv, as reports.
std::vector<eval::EvaluationReport> reference_reports();

}  // namespace eduvsum::fixtures
