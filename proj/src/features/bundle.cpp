#include "eduvsum/features/bundle.hpp"

#include "eduvsum/core/errors.hpp"

namespace eduvsum::features {

const FeatureMatrix& FeatureBundle::matrix(Modality m) const {
    switch (m) {
        case Modality::Visual: return visual;
        case Modality::Audio: return audio;
        case Modality::Text: return text;
    }
    return visual;
}

FeatureMatrix& FeatureBundle::matrix(Modality m) {
    return const_cast<FeatureMatrix&>(static_cast<const FeatureBundle&>(*this).matrix(m));
}

void FeatureBundle::validate() const {
    const auto frames = static_cast<Eigen::Index>(timestamps.size());
    if (segment_index.size() != timestamps.size()) {
        fail(ErrorKind::Contract, video_id + ": segment index count differs from frame count");
    }
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        const FeatureMatrix& mat = matrix(m);
        if (mat.rows() != frames) {
            fail(ErrorKind::Contract, video_id + ": " + to_string(m) + " matrix has " + std::to_string(mat.rows()) +
                                          " rows for " + std::to_string(frames) + " frames");
        }
        if (!mat.allFinite()) fail(ErrorKind::Contract, video_id + ": non-finite " + to_string(m) + " features");
    }
}

}  // namespace eduvsum::features
