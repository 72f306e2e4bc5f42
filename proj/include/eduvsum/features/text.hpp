#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eduvsum/features/alignment.hpp"
#include "eduvsum/features/backend.hpp"
#include "eduvsum/features/wordpiece.hpp"
#include "eduvsum/ingest/subtitles.hpp"

namespace eduvsum::features {

struct EncodedWord {
    std::string word;
    Eigen::VectorXf vector;
};

class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual const BackendSpec& spec() const = 0;
    // Encodes one sentence as a single context; one vector per word.
    // Punctuation takes part in the context but yields no word.
    virtual std::vector<EncodedWord> encode_sentence(std::string_view sentence) const = 0;
};

// Contextual token embedder: token ids (with [CLS] / [SEP]) in, one row per token out.
class TokenEmbedder {
public:
    virtual ~TokenEmbedder() = default;
    virtual int dim() const = 0;
    virtual int max_tokens() const { return 512; }
    virtual Eigen::MatrixXf embed(const std::vector<int>& token_ids) const = 0;
};

// WordPiece front end over a TokenEmbedder. Word vectors are the mean of
// their pieces; sentences longer than the embedder window are encoded in chunks.
class WordPieceTextEncoder final : public TextEncoder {
public:
    WordPieceTextEncoder(BackendSpec spec, WordPieceVocab vocab, std::unique_ptr<TokenEmbedder> embedder);

    const BackendSpec& spec() const override { return spec_; }
    std::vector<EncodedWord> encode_sentence(std::string_view sentence) const override;

private:
    BackendSpec spec_;
    WordPieceVocab vocab_;
    std::unique_ptr<TokenEmbedder> embedder_;
};

struct TextBackendOptions {
    // Holds vocab.txt and model.onnx (last hidden state output).
    std::filesystem::path model_dir = "models/bert-base";
    std::uint64_t stub_seed = 0;
};

std::unique_ptr<TextEncoder> make_text_encoder(const BackendSpec& spec, const TextBackendOptions& options);

// Word timestamps are spread evenly over each cue: word i of n in [s, e]
// sits at s + (i + 0.5) * (e - s) / n.
std::vector<WordVector> extract_text(std::span<const ingest::SubtitleCue> cues, const TextEncoder& encoder);

}  // namespace eduvsum::features
