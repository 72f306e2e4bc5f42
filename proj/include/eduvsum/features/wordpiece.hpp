#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eduvsum::features {

class WordPieceVocab {
public:
    // One token per line; the line number is the id.
    static WordPieceVocab load(const std::filesystem::path& path);
    static WordPieceVocab from_tokens(const std::vector<std::string>& tokens);

    int id(std::string_view token) const;  // -1 when absent
    std::size_t size() const { return tokens_.size(); }
    const std::string& token(int id) const { return tokens_.at(id); }

    int unk_id() const { return unk_; }
    int cls_id() const { return cls_; }
    int sep_id() const { return sep_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
    int unk_ = -1, cls_ = -1, sep_ = -1;
};

bool is_punctuation(char c);

// Lower-cases ASCII and splits on whitespace and punctuation; each
// punctuation character becomes its own token.
std::vector<std::string> basic_tokenize(std::string_view text, bool lowercase = true);

// Greedy longest-match-first segmentation with "##" continuation pieces.
// Returns {unk} when the word cannot be covered.
std::vector<int> wordpiece_ids(std::string_view word, const WordPieceVocab& vocab, std::size_t max_chars = 100);

}  // namespace eduvsum::features
