// Tab-separated datasets for the two tasks.
//
// Similarity rows: id, sentence1, sentence2, score in [1,5].
// Ranking rows:    query_id, question, candidate, label in {0,1}.
// Malformed input is reported with its 1-based line number.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pwi/config.hpp"
#include "pwi/error.hpp"

namespace pwi {

struct SimilarityExample {
    std::string id;
    std::string s1;
    std::string s2;
    double score = 0.0;
};

struct RankingCandidate {
    std::string text;
    int label = 0;
};

struct RankingGroup {
    std::string query_id;
    std::string question;
    std::vector<RankingCandidate> candidates;

    bool has_positive() const {
        for (const RankingCandidate& c : candidates)
            if (c.label == 1) return true;
        return false;
    }
};

struct Dataset {
    TaskKind task = TaskKind::Similarity;
    std::vector<SimilarityExample> similarity;
    std::vector<RankingGroup> ranking;
    std::size_t dropped_queries = 0;  // ranking groups removed for lacking a positive

    bool empty() const { return similarity.empty() && ranking.empty(); }
    std::size_t example_count() const {
        if (task == TaskKind::Similarity) return similarity.size();
        std::size_t n = 0;
        for (const RankingGroup& g : ranking) n += g.candidates.size();
        return n;
    }
};

namespace detail {

inline std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

template <typename Fn>
void for_tsv_rows(const std::string& path, std::size_t fields, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> row = split_tsv(line);
        if (row.size() != fields)
            throw DataError(path + " line " + std::to_string(lineno) + ": expected " +
                            std::to_string(fields) + " tab-separated fields, got " +
                            std::to_string(row.size()));
        fn(lineno, row);
    }
}

inline double parse_score(const std::string& path, std::size_t lineno, const std::string& text) {
    double score = 0.0;
    try {
        std::size_t used = 0;
        score = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw DataError(path + " line " + std::to_string(lineno) + ": score '" + text +
                        "' is not a number");
    }
    if (score < 1.0 || score > 5.0)
        throw DataError(path + " line " + std::to_string(lineno) + ": score " + text +
                        " outside [1,5]");
    return score;
}

}  // namespace detail

inline std::vector<SimilarityExample> load_similarity_tsv(const std::string& path) {
    std::vector<SimilarityExample> out;
    detail::for_tsv_rows(path, 4, [&](std::size_t lineno, const std::vector<std::string>& row) {
        if (row[1].empty() || row[2].empty())
            throw DataError(path + " line " + std::to_string(lineno) + ": empty sentence");
        out.push_back({row[0], row[1], row[2], detail::parse_score(path, lineno, row[3])});
    });
    return out;
}

// Groups candidates per query in first-appearance order. With
// filter_empty, queries lacking any positive candidate are dropped and
// counted, so every retained query has a defined reciprocal rank.
inline Dataset load_ranking_tsv(const std::string& path, bool filter_empty = true) {
    Dataset ds;
    ds.task = TaskKind::Ranking;
    std::vector<RankingGroup>& groups = ds.ranking;
    detail::for_tsv_rows(path, 4, [&](std::size_t lineno, const std::vector<std::string>& row) {
        if (row[1].empty() || row[2].empty())
            throw DataError(path + " line " + std::to_string(lineno) + ": empty sentence");
        int label = 0;
        if (row[3] == "0") label = 0;
        else if (row[3] == "1") label = 1;
        else
            throw DataError(path + " line " + std::to_string(lineno) + ": label '" + row[3] +
                            "' is not 0 or 1");
        if (groups.empty() || groups.back().query_id != row[0]) {
            for (const RankingGroup& g : groups)
                if (g.query_id == row[0])
                    throw DataError(path + " line " + std::to_string(lineno) + ": query '" +
                                    row[0] + "' is not contiguous");
            groups.push_back({row[0], row[1], {}});
        }
        groups.back().candidates.push_back({row[2], label});
    });
    if (filter_empty) {
        std::vector<RankingGroup> kept;
        for (RankingGroup& g : groups) {
            if (g.has_positive()) kept.push_back(std::move(g));
            else ++ds.dropped_queries;
        }
        groups = std::move(kept);
    }
    return ds;
}

inline Dataset load_dataset(const std::string& path, TaskKind task, bool filter_empty = true) {
    if (task == TaskKind::Ranking) return load_ranking_tsv(path, filter_empty);
    Dataset ds;
    ds.task = TaskKind::Similarity;
    ds.similarity = load_similarity_tsv(path);
    return ds;
}

inline void write_similarity_tsv(const std::string& path,
                                 const std::vector<SimilarityExample>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write data file: " + path);
    std::ostringstream buf;
    buf.precision(17);
    for (const SimilarityExample& r : rows)
        buf << r.id << "\t" << r.s1 << "\t" << r.s2 << "\t" << r.score << "\n";
    out << buf.str();
}

}  // namespace pwi
