#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eduvsum::ingest {

struct SubtitleCue {
    double start = 0.0;
    double end = 0.0;
    std::string text;  // plain text, markup stripped, lines joined by a space

    bool operator==(const SubtitleCue&) const = default;
};

// Accepts SubRip ("00:00:01,000 --> 00:00:03,500") and WebVTT
// ("00:00:01.000 --> 00:00:03.500", hours optional) cue timing. Cues are
// returned sorted by start; cues whose text is empty after stripping are dropped.
std::vector<SubtitleCue> parse_subtitles_text(std::string_view text, std::string_view origin = "<memory>");
std::vector<SubtitleCue> parse_subtitles(const std::filesystem::path& subtitle_path);

// Removes <tags> and {\ass} overrides and decodes the common HTML entities.
std::string strip_markup(std::string_view text);

std::string format_srt_time(double seconds);
std::string serialize_srt(const std::vector<SubtitleCue>& cues);

}  // namespace eduvsum::ingest
