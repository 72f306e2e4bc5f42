#include "eduvsum/ingest/subtitles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

bool parse_number(std::string_view s, int& out) {
    if (s.empty() || s.size() > 9) return false;
    int v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

// [HH:]MM:SS(,|.)mmm
bool parse_timestamp(std::string_view s, double& seconds) {
    s = trim(s);
    const std::size_t frac_sep = s.find_last_of(",.");
    if (frac_sep == std::string_view::npos) return false;
    int millis = 0;
    std::string_view frac = s.substr(frac_sep + 1);
    if (frac.empty() || frac.size() > 3 || !parse_number(frac, millis)) return false;
    for (std::size_t i = frac.size(); i < 3; ++i) millis *= 10;

    std::vector<int> parts;
    std::string_view clock = s.substr(0, frac_sep);
    while (true) {
        const std::size_t colon = clock.find(':');
        int v = 0;
        if (!parse_number(clock.substr(0, colon), v)) return false;
        parts.push_back(v);
        if (colon == std::string_view::npos) break;
        clock.remove_prefix(colon + 1);
    }
    if (parts.size() < 2 || parts.size() > 3) return false;
    int hours = 0, minutes = 0, secs = 0;
    if (parts.size() == 3) {
        hours = parts[0];
        minutes = parts[1];
        secs = parts[2];
    } else {
        minutes = parts[0];
        secs = parts[1];
    }
    if (minutes > 59 || secs > 59) return false;
    seconds = hours * 3600.0 + minutes * 60.0 + secs + millis / 1000.0;
    return true;
}

bool is_timing_line(std::string_view line) { return line.find("-->") != std::string_view::npos; }

[[noreturn]] void timing_error(std::string_view origin, std::size_t line_no, std::string_view line) {
    std::ostringstream os;
    os << origin << ":" << line_no << ": unparseable cue timing \"" << line << "\"";
    fail(ErrorKind::Parse, os.str());
}

SubtitleCue parse_timing(std::string_view line, std::string_view origin, std::size_t line_no) {
    const std::size_t arrow = line.find("-->");
    SubtitleCue cue;
    std::string_view rhs = trim(line.substr(arrow + 3));
    // WebVTT cue settings follow the end time.
    const std::size_t space = rhs.find_first_of(" \t");
    if (space != std::string_view::npos) rhs = rhs.substr(0, space);
    if (!parse_timestamp(line.substr(0, arrow), cue.start) || !parse_timestamp(rhs, cue.end)) {
        timing_error(origin, line_no, line);
    }
    if (!(cue.end > cue.start)) timing_error(origin, line_no, line);
    return cue;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string strip_markup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '<') {
            const std::size_t close = text.find('>', i);
            if (close != std::string_view::npos) {
                i = close;
                continue;
            }
        } else if (c == '{' && i + 1 < text.size() && text[i + 1] == '\\') {
            const std::size_t close = text.find('}', i);
            if (close != std::string_view::npos) {
                i = close;
                continue;
            }
        } else if (c == '&') {
            static constexpr std::pair<std::string_view, char> entities[] = {
                {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''}, {"&nbsp;", ' '}};
            bool replaced = false;
            for (const auto& [name, ch] : entities) {
                if (text.substr(i, name.size()) == name) {
                    out.push_back(ch);
                    i += name.size() - 1;
                    replaced = true;
                    break;
                }
            }
            if (replaced) continue;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<SubtitleCue> parse_subtitles_text(std::string_view text, std::string_view origin) {
    const auto lines = split_lines(text);
    std::vector<SubtitleCue> cues;
    std::size_t i = 0;

    auto skip_block = [&] {
        while (i < lines.size() && !trim(lines[i]).empty()) ++i;
    };

    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i < lines.size() && lines[i].substr(0, 6) == "WEBVTT") skip_block();

    while (i < lines.size()) {
        if (trim(lines[i]).empty()) {
            ++i;
            continue;
        }
        const std::string_view first = trim(lines[i]);
        if (first.substr(0, 4) == "NOTE" || first == "STYLE" || first == "REGION") {
            skip_block();
            continue;
        }
        std::size_t timing_idx = i;
        if (!is_timing_line(lines[i])) {
            // Identifier line (SubRip counter or WebVTT cue id).
            timing_idx = i + 1;
            if (timing_idx >= lines.size() || !is_timing_line(lines[timing_idx])) {
                timing_error(origin, timing_idx < lines.size() ? timing_idx + 1 : i + 1,
                             timing_idx < lines.size() ? lines[timing_idx] : lines[i]);
            }
        }
        SubtitleCue cue = parse_timing(lines[timing_idx], origin, timing_idx + 1);
        i = timing_idx + 1;
        std::string joined;
        while (i < lines.size() && !trim(lines[i]).empty()) {
            if (!joined.empty()) joined.push_back(' ');
            joined.append(lines[i]);
            ++i;
        }
        cue.text = collapse_whitespace(strip_markup(joined));
        if (!cue.text.empty()) cues.push_back(std::move(cue));
    }
    std::stable_sort(cues.begin(), cues.end(),
                     [](const SubtitleCue& a, const SubtitleCue& b) { return a.start < b.start; });
    return cues;
}

std::vector<SubtitleCue> parse_subtitles(const std::filesystem::path& subtitle_path) {
    std::ifstream in(subtitle_path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open subtitles " + subtitle_path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_subtitles_text(buffer.str(), subtitle_path.string());
}

std::string format_srt_time(double seconds) {
    const long long total_ms = std::llround(seconds * 1000.0);
    const long long ms = total_ms % 1000;
    const long long s = (total_ms / 1000) % 60;
    const long long m = (total_ms / 60000) % 60;
    const long long h = total_ms / 3600000;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld,%03lld", h, m, s, ms);
    return buf;
}

std::string serialize_srt(const std::vector<SubtitleCue>& cues) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cues.size(); ++i) {
        os << (i + 1) << "\n"
           << format_srt_time(cues[i].start) << " --> " << format_srt_time(cues[i].end) << "\n"
           << cues[i].text << "\n\n";
    }
    return os.str();
}

}  // namespace eduvsum::ingest
