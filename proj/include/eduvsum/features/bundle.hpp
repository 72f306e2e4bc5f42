#pragma once

#include <string>
#include <vector>

#include "eduvsum/features/backend.hpp"

namespace eduvsum::features {

// Per-sampled-frame features of one video. Every matrix has one row per frame;
// an absent modality keeps zero rows and is left out of `present`.
struct FeatureBundle {
    std::string video_id;
    std::vector<double> timestamps;
    std::vector<int> segment_index;
    FeatureMatrix visual;
    FeatureMatrix audio;
    FeatureMatrix text;
    ModalitySet present{false, false, false};

    int frame_count() const { return static_cast<int>(timestamps.size()); }
    const FeatureMatrix& matrix(Modality m) const;
    FeatureMatrix& matrix(Modality m);

    // Throws Contract on mismatched leading dimensions or non-finite entries.
    void validate() const;
};

}  // namespace eduvsum::features
