// Evaluation metrics: Pearson and Spearman correlation for similarity,
// MAP and MRR for ranking.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "pwi/error.hpp"

namespace pwi {

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InputError("pearson: need two equal-length series of at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericError("pearson: correlation undefined for a zero-variance series");
    return sxy / std::sqrt(sxx * syy);
}

// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

// Candidate labels ordered by descending score; ties keep original
// candidate order.
inline std::vector<int> rank_labels_by_score(const std::vector<double>& scores,
                                             const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw InputError("rank_labels_by_score: scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<int> ranked;
    ranked.reserve(order.size());
    for (std::size_t i : order) ranked.push_back(labels[i]);
    return ranked;
}

// Mean over positive positions k of (positives among the top k) / k.
inline double average_precision(const std::vector<int>& ranked_labels) {
    std::size_t positives = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < ranked_labels.size(); ++k) {
        if (ranked_labels[k] != 1) continue;
        ++positives;
        sum += static_cast<double>(positives) / static_cast<double>(k + 1);
    }
    if (positives == 0)
        throw ContractError(
            "average_precision: query has no positive candidate; filter such queries first");
    return sum / static_cast<double>(positives);
}

inline double reciprocal_rank(const std::vector<int>& ranked_labels) {
    for (std::size_t k = 0; k < ranked_labels.size(); ++k)
        if (ranked_labels[k] == 1) return 1.0 / static_cast<double>(k + 1);
    throw ContractError(
        "reciprocal_rank: query has no positive candidate; filter such queries first");
}

inline double mean_average_precision(const std::vector<std::vector<int>>& queries) {
    if (queries.empty()) throw InputError("mean_average_precision: no queries");
    double sum = 0.0;
    for (const auto& q : queries) sum += average_precision(q);
    return sum / static_cast<double>(queries.size());
}

inline double mean_reciprocal_rank(const std::vector<std::vector<int>>& queries) {
    if (queries.empty()) throw InputError("mean_reciprocal_rank: no queries");
    double sum = 0.0;
    for (const auto& q : queries) sum += reciprocal_rank(q);
    return sum / static_cast<double>(queries.size());
}

// Expectation of the class index + 1 under a distribution, mapping a
// 5-class posterior back onto the [1,5] score scale.
inline double predicted_score(const std::vector<double>& dist) {
    double s = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) s += static_cast<double>(i + 1) * dist[i];
    return s;
}

}  // namespace pwi
