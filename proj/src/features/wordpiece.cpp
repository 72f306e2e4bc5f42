#include "eduvsum/features/wordpiece.hpp"

#include <cctype>
#include <fstream>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::features {

WordPieceVocab WordPieceVocab::from_tokens(const std::vector<std::string>& tokens) {
    WordPieceVocab v;
    v.tokens_ = tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) v.ids_.emplace(tokens[i], static_cast<int>(i));
    v.unk_ = v.id("[UNK]");
    v.cls_ = v.id("[CLS]");
    v.sep_ = v.id("[SEP]");
    if (v.unk_ < 0 || v.cls_ < 0 || v.sep_ < 0) {
        fail(ErrorKind::BackendLoad, "vocabulary lacks [UNK], [CLS] or [SEP]");
    }
    return v;
}

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::BackendLoad, "cannot open vocabulary " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return from_tokens(tokens);
}

int WordPieceVocab::id(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? -1 : it->second;
}

bool is_punctuation(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) || (u >= 123 && u <= 126);
}

std::vector<std::string> basic_tokenize(std::string_view text, bool lowercase) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (is_punctuation(c)) {
            flush();
            out.emplace_back(1, c);
        } else {
            current.push_back(lowercase ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);
        }
    }
    flush();
    return out;
}

std::vector<int> wordpiece_ids(std::string_view word, const WordPieceVocab& vocab, std::size_t max_chars) {
    if (word.size() > max_chars) return {vocab.unk_id()};
    std::vector<int> ids;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        int found = -1;
        while (end > start) {
            std::string piece(word.substr(start, end - start));
            if (start > 0) piece = "##" + piece;
            found = vocab.id(piece);
            if (found >= 0) break;
            --end;
        }
        if (found < 0) return {vocab.unk_id()};
        ids.push_back(found);
        start = end;
    }
    return ids;
}

}  // namespace eduvsum::features
