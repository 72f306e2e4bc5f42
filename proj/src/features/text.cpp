#include "eduvsum/features/text.hpp"

#include <mutex>

#include <opencv2/dnn.hpp>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/rng.hpp"
#include "eduvsum/features/visual.hpp"

namespace eduvsum::features {

namespace {

bool is_punctuation_token(const std::string& token) { return token.size() == 1 && is_punctuation(token[0]); }

class StubTextEncoder final : public TextEncoder {
public:
    StubTextEncoder(BackendSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {}

    const BackendSpec& spec() const override { return spec_; }

    std::vector<EncodedWord> encode_sentence(std::string_view sentence) const override {
        // Context enters through the sentence hash, so equal words in different cues differ.
        const std::uint64_t context = fnv1a64(sentence, splitmix64(seed_));
        std::vector<EncodedWord> out;
        std::uint64_t position = 0;
        for (auto& token : basic_tokenize(sentence)) {
            if (is_punctuation_token(token)) continue;
            const std::uint64_t key = splitmix64(context ^ fnv1a64(token)) + position++;
            out.push_back({token, hashed_vector(key, spec_.output_dim)});
        }
        return out;
    }

private:
    BackendSpec spec_;
    std::uint64_t seed_;
};

// Runs an ONNX encoder whose inputs are input_ids, attention_mask and
// token_type_ids and whose first output is the last hidden state.
class OnnxTokenEmbedder final : public TokenEmbedder {
public:
    OnnxTokenEmbedder(const std::filesystem::path& model_path, int dim) : dim_(dim) {
        try {
            net_ = cv::dnn::readNetFromONNX(model_path.string());
        } catch (const cv::Exception& e) {
            fail(ErrorKind::BackendLoad, "cannot load " + model_path.string() + ": " + e.what());
        }
        if (net_.empty()) fail(ErrorKind::BackendLoad, "empty network in " + model_path.string());
    }

    int dim() const override { return dim_; }

    Eigen::MatrixXf embed(const std::vector<int>& token_ids) const override {
        const int n = static_cast<int>(token_ids.size());
        const int shape[] = {1, n};
        cv::Mat ids(2, shape, CV_32F), mask(2, shape, CV_32F), types(2, shape, CV_32F);
        for (int i = 0; i < n; ++i) {
            ids.at<float>(0, i) = static_cast<float>(token_ids[i]);
            mask.at<float>(0, i) = 1.0f;
            types.at<float>(0, i) = 0.0f;
        }
        cv::Mat out;
        try {
            std::lock_guard lock(mutex_);
            net_.setInput(ids, "input_ids");
            net_.setInput(mask, "attention_mask");
            net_.setInput(types, "token_type_ids");
            out = net_.forward().clone();
        } catch (const cv::Exception& e) {
            fail(ErrorKind::BackendLoad, std::string("text encoder inference failed: ") + e.what());
        }
        out = out.reshape(1, static_cast<int>(out.total() / dim_));
        if (out.rows != n || out.cols != dim_) fail(ErrorKind::BackendLoad, "text encoder output has wrong shape");
        Eigen::MatrixXf m(n, dim_);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < dim_; ++c) m(r, c) = out.at<float>(r, c);
        }
        return m;
    }

private:
    int dim_;
    mutable cv::dnn::Net net_;
    mutable std::mutex mutex_;
};

}  // namespace

WordPieceTextEncoder::WordPieceTextEncoder(BackendSpec spec, WordPieceVocab vocab,
                                           std::unique_ptr<TokenEmbedder> embedder)
    : spec_(std::move(spec)), vocab_(std::move(vocab)), embedder_(std::move(embedder)) {
    if (!embedder_ || embedder_->dim() != spec_.output_dim) {
        fail(ErrorKind::BackendLoad, "token embedder width does not match " + spec_.name);
    }
    if (embedder_->max_tokens() < 3) fail(ErrorKind::BackendLoad, "token embedder window too small");
}

std::vector<EncodedWord> WordPieceTextEncoder::encode_sentence(std::string_view sentence) const {
    struct Token {
        std::string text;
        std::vector<int> pieces;
    };
    std::vector<Token> tokens;
    for (auto& t : basic_tokenize(sentence)) {
        auto pieces = wordpiece_ids(t, vocab_);
        tokens.push_back({std::move(t), std::move(pieces)});
    }

    std::vector<EncodedWord> out;
    const std::size_t budget = static_cast<std::size_t>(embedder_->max_tokens()) - 2;
    std::size_t first = 0;
    while (first < tokens.size()) {
        // Greedily pack whole words into one window.
        std::size_t last = first, used = 0;
        while (last < tokens.size() && used + tokens[last].pieces.size() <= budget) {
            used += tokens[last].pieces.size();
            ++last;
        }
        if (last == first) {
            tokens[first].pieces.resize(budget);
            used = budget;
            last = first + 1;
        }
        std::vector<int> ids{vocab_.cls_id()};
        for (std::size_t w = first; w < last; ++w) ids.insert(ids.end(), tokens[w].pieces.begin(), tokens[w].pieces.end());
        ids.push_back(vocab_.sep_id());
        const Eigen::MatrixXf hidden = embedder_->embed(ids);
        if (hidden.rows() != static_cast<Eigen::Index>(ids.size()) || hidden.cols() != spec_.output_dim) {
            fail(ErrorKind::Contract, "token embedder returned the wrong shape");
        }
        Eigen::Index row = 1;
        for (std::size_t w = first; w < last; ++w) {
            const auto n = static_cast<Eigen::Index>(tokens[w].pieces.size());
            if (!is_punctuation_token(tokens[w].text)) {
                Eigen::VectorXf mean = hidden.middleRows(row, n).colwise().mean().transpose();
                out.push_back({tokens[w].text, std::move(mean)});
            }
            row += n;
        }
        first = last;
    }
    return out;
}

std::unique_ptr<TextEncoder> make_text_encoder(const BackendSpec& spec, const TextBackendOptions& options) {
    if (spec.modality != Modality::Text) fail(ErrorKind::InvalidConfig, "not a text backend: " + spec.name);
    if (spec.is_stub()) return std::make_unique<StubTextEncoder>(spec, options.stub_seed);
    const auto vocab_path = options.model_dir / "vocab.txt";
    const auto model_path = options.model_dir / "model.onnx";
    if (!std::filesystem::exists(vocab_path) || !std::filesystem::exists(model_path)) {
        fail(ErrorKind::BackendLoad,
             spec.name + " needs vocab.txt and model.onnx in " + options.model_dir.string());
    }
    return std::make_unique<WordPieceTextEncoder>(spec, WordPieceVocab::load(vocab_path),
                                                  std::make_unique<OnnxTokenEmbedder>(model_path, spec.output_dim));
}

std::vector<WordVector> extract_text(std::span<const ingest::SubtitleCue> cues, const TextEncoder& encoder) {
    std::vector<WordVector> out;
    for (const auto& cue : cues) {
        auto words = encoder.encode_sentence(cue.text);
        const double n = static_cast<double>(words.size());
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (words[i].vector.size() != encoder.spec().output_dim) {
                fail(ErrorKind::Contract, "text encoder returned a vector of the wrong width");
            }
            const double ts = cue.start + (static_cast<double>(i) + 0.5) * (cue.end - cue.start) / n;
            out.push_back({std::move(words[i].word), ts, std::move(words[i].vector)});
        }
    }
    return out;
}

}  // namespace eduvsum::features
