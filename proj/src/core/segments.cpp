#include "eduvsum/core/segments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eduvsum/core/errors.hpp"

namespace eduvsum {

int segment_count(double duration, double segment_length) {
    if (!std::isfinite(duration) || duration <= 0.0) {
        std::ostringstream os;
        os << "duration must be positive, got " << duration;
        fail(ErrorKind::InvalidInput, os.str());
    }
    if (!std::isfinite(segment_length) || segment_length <= 0.0) {
        fail(ErrorKind::InvalidInput, "segment length must be positive");
    }
    return static_cast<int>(std::ceil(duration / segment_length));
}

std::vector<Segment> segmentize(double duration, double segment_length) {
    const int count = segment_count(duration, segment_length);
    std::vector<Segment> segments;
    segments.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double start = i * segment_length;
        const double end = std::min((i + 1) * segment_length, duration);
        segments.push_back({i, start, end});
    }
    return segments;
}

int frame_to_segment(double timestamp, std::span<const Segment> segments) {
    if (segments.empty() || !(timestamp >= segments.front().start) ||
        !(timestamp < segments.back().end)) {
        std::ostringstream os;
        os << "timestamp " << timestamp << " outside ["
           << (segments.empty() ? 0.0 : segments.front().start) << ", "
           << (segments.empty() ? 0.0 : segments.back().end) << ")";
        fail(ErrorKind::InvalidInput, os.str());
    }
    // First segment whose end lies strictly after the timestamp.
    auto it = std::upper_bound(segments.begin(), segments.end(), timestamp,
                               [](double t, const Segment& s) { return t < s.end; });
    return static_cast<int>(it - segments.begin());
}

}  // namespace eduvsum
