#pragma once

#include <span>
#include <vector>

#include "eduvsum/core/types.hpp"

namespace eduvsum {

// Tiles [0, duration) with segments of `segment_length` seconds; the last one
// may be shorter. Throws InvalidInput for non-positive or non-finite duration.
std::vector<Segment> segmentize(double duration, double segment_length = kSegmentSeconds);

// Number of segments segmentize() would return.
int segment_count(double duration, double segment_length = kSegmentSeconds);

// Index i with segments[i].start <= timestamp < segments[i].end.
int frame_to_segment(double timestamp, std::span<const Segment> segments);

}  // namespace eduvsum
