// Whitespace tokenizer and vocabulary with fixed reserved ids.
#pragma once

#include <cctype>
#include <string>
#include <unordered_map>
#include <vector>

#include "pwi/error.hpp"

namespace pwi {

// Lowercased whitespace splitting; no subword handling.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;

    Vocabulary() {
        tokens_ = {"<pad>", "<unk>", "<cls>", "<sep>"};
        for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) index_[tokens_[i]] = i;
    }

    // Rebuilds a vocabulary from a full id-ordered token list, reserved
    // entries included.
    static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
        Vocabulary v;
        if (tokens.size() < v.size())
            throw DataError("vocabulary list is missing reserved tokens");
        for (std::size_t i = 0; i < v.size(); ++i)
            if (tokens[i] != v.tokens_[i])
                throw DataError("vocabulary list does not start with the reserved tokens");
        for (std::size_t i = v.size(); i < tokens.size(); ++i)
            if (v.add(tokens[i]) != static_cast<int>(i))
                throw DataError("vocabulary list contains a duplicate token: " + tokens[i]);
        return v;
    }

    // Inserts the token if absent; returns its id either way.
    int add(const std::string& token) {
        auto it = index_.find(token);
        if (it != index_.end()) return it->second;
        const int id = static_cast<int>(tokens_.size());
        index_[token] = id;
        tokens_.push_back(token);
        return id;
    }

    // UNK for unseen tokens.
    int id(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? kUnk : it->second;
    }

    const std::string& token(int id) const {
        if (id < 0 || id >= static_cast<int>(tokens_.size()))
            throw InputError("vocabulary has no id " + std::to_string(id));
        return tokens_[static_cast<std::size_t>(id)];
    }

    std::size_t size() const { return tokens_.size(); }

    void add_sentence(const std::string& text) {
        for (const std::string& t : tokenize(text)) add(t);
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace pwi
