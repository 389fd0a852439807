#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace randgad {

namespace {

std::size_t checked_positive_count(std::span<const double> scores,
                                   std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw ArgumentError("metrics: score/label length mismatch");
    if (scores.empty()) throw ArgumentError("metrics: empty input");
    for (double s : scores)
        if (!std::isfinite(s)) throw NumericError("metrics: non-finite score");
    std::size_t positives = 0;
    for (auto l : labels) positives += l;
    if (positives == 0 || positives == labels.size())
        throw NumericError("metrics: labels contain a single class");
    return positives;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    const std::size_t positives = checked_positive_count(scores, labels);
    const std::size_t n = scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
    });

    // Average ranks over tie groups; rank sum of positives gives the
    // Mann-Whitney statistic with 0.5 per tied pair.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * double(i + 1 + j);  // mean of i+1 .. j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) rank_sum_pos += avg_rank;
        i = j;
    }
    const double p = double(positives);
    const double q = double(n - positives);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);
}

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels) {
    const std::size_t positives = checked_positive_count(scores, labels);
    const std::size_t n = scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });

    // AP = sum over recall steps of precision at that cutoff.
    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!labels[order[k]]) continue;
        ++hits;
        ap += double(hits) / double(k + 1);
    }
    return ap / double(positives);
}

}  // namespace randgad
