#include "eduvsum/features/backend.hpp"

#include <sstream>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::features {

const char* to_string(Modality m) {
    switch (m) {
        case Modality::Visual: return "visual";
        case Modality::Audio: return "audio";
        case Modality::Text: return "text";
    }
    return "?";
}

bool ModalitySet::contains(Modality m) const {
    switch (m) {
        case Modality::Visual: return visual;
        case Modality::Audio: return audio;
        case Modality::Text: return text;
    }
    return false;
}

bool ModalitySet::includes(const ModalitySet& other) const {
    return (visual || !other.visual) && (audio || !other.audio) && (text || !other.text);
}

std::string ModalitySet::to_string() const {
    std::string out;
    auto add = [&](bool on, const char* tag) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += tag;
    };
    add(visual, "v");
    add(audio, "a");
    add(text, "t");
    return out;
}

ModalitySet ModalitySet::parse(std::string_view spec) {
    ModalitySet set{false, false, false};
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string_view::npos) comma = spec.size();
        const std::string_view tok = spec.substr(pos, comma - pos);
        if (tok == "v" || tok == "visual") set.visual = true;
        else if (tok == "a" || tok == "audio") set.audio = true;
        else if (tok == "t" || tok == "text") set.text = true;
        else if (!tok.empty()) fail(ErrorKind::InvalidConfig, "unknown modality \"" + std::string(tok) + "\"");
        pos = comma + 1;
    }
    if (set.count() == 0) fail(ErrorKind::InvalidConfig, "at least one modality must be enabled");
    return set;
}

std::optional<int> canonical_dim(Modality modality, std::string_view name) {
    switch (modality) {
        case Modality::Visual:
            if (name == "vgg16") return 4096;
            if (name == "resnet50" || name == "inceptionv3" || name == "xception") return 2048;
            break;
        case Modality::Audio:
            if (name == "shortterm34") return kAudioFeatureDim;
            break;
        case Modality::Text:
            if (name == "bert-base") return kTextFeatureDim;
            break;
    }
    return std::nullopt;
}

BackendSpec make_backend_spec(Modality modality, std::string_view name, int stub_dim) {
    if (name == "stub") {
        if (stub_dim <= 0) fail(ErrorKind::InvalidConfig, "stub backend width must be positive");
        return {modality, "stub", stub_dim};
    }
    const auto dim = canonical_dim(modality, name);
    if (!dim) {
        std::ostringstream os;
        os << "unknown " << to_string(modality) << " backend \"" << name << "\"";
        fail(ErrorKind::InvalidConfig, os.str());
    }
    return {modality, std::string(name), *dim};
}

}  // namespace eduvsum::features
